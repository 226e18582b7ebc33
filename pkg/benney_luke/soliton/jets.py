"""Second-order forward-mode jets in the wave speed c.

A Jet carries (value, d/dc, d2/dc2) of a quantity, each entry a float or
a numpy array. Arithmetic follows the Leibniz and chain rules truncated
at second order.
"""

from dataclasses import dataclass
from typing import Union
import numpy as np

Number = Union[float, np.ndarray]


@dataclass(frozen=True)
class Jet:
    v: Number
    d1: Number = 0.0
    d2: Number = 0.0

    @classmethod
    def variable(cls, c: Number) -> "Jet":
        value = np.asarray(c, dtype=float)
        return cls(float(value) if value.ndim == 0 else value, 1.0, 0.0)

    @staticmethod
    def lift(other) -> "Jet":
        return other if isinstance(other, Jet) else Jet(other, 0.0, 0.0)

    def component(self, order: int) -> Number:
        return (self.v, self.d1, self.d2)[order]

    def __add__(self, other):
        o = Jet.lift(other)
        return Jet(self.v + o.v, self.d1 + o.d1, self.d2 + o.d2)

    __radd__ = __add__

    def __neg__(self):
        return Jet(-self.v, -self.d1, -self.d2)

    def __sub__(self, other):
        return self + (-Jet.lift(other))

    def __rsub__(self, other):
        return Jet.lift(other) - self

    def __mul__(self, other):
        o = Jet.lift(other)
        return Jet(self.v * o.v,
                   self.d1 * o.v + self.v * o.d1,
                   self.d2 * o.v + 2.0 * self.d1 * o.d1 + self.v * o.d2)

    __rmul__ = __mul__

    def reciprocal(self) -> "Jet":
        inv = 1.0 / self.v
        return Jet(inv, -self.d1 * inv ** 2, -self.d2 * inv ** 2 + 2.0 * self.d1 ** 2 * inv ** 3)

    def __truediv__(self, other):
        return self * Jet.lift(other).reciprocal()

    def __rtruediv__(self, other):
        return Jet.lift(other) * self.reciprocal()

    def __pow__(self, n: int):
        return self.compose(self.v ** n, n * self.v ** (n - 1), n * (n - 1) * self.v ** (n - 2))

    def compose(self, g0, g1, g2) -> "Jet":
        """g(self) from g, g' and g'' evaluated at self.v."""
        return Jet(g0, g1 * self.d1, g2 * self.d1 ** 2 + g1 * self.d2)


def jsqrt(f: Jet) -> Jet:
    s = np.sqrt(f.v)
    return f.compose(s, 0.5 / s, -0.25 / (s * f.v))


def jtanh(f: Jet) -> Jet:
    t = np.tanh(f.v)
    sech2 = 1.0 - t ** 2
    return f.compose(t, sech2, -2.0 * t * sech2)


def jpolyval(coefficients, t: Jet) -> Jet:
    """Evaluate a polynomial (coefficients in increasing degree) at a jet."""
    result = Jet.lift(0.0)
    for coef in reversed(list(coefficients)):
        result = result * t + float(coef)
    return result
