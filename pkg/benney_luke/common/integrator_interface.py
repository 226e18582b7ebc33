from abc import ABC, abstractmethod
from typing import Optional
import numpy as np
from benney_luke.spectral.fields import Background


class IntegratorInterface(ABC):
    """
    Abstract base class for time steppers of the spectral system.

    An integrator advances the stacked half spectra ``u`` (periodic phi1 part
    and phi2) by one step of size ``h`` for a
    :class:`benney_luke.evolution.system.BLSystem`. The linear block is
    treated exactly; the explicit part is sampled at the stage times, with
    the background moved by its drift.
    """

    NAME: str = ""

    @abstractmethod
    def prepare(self, system, h: float) -> None:
        """
        Precompute the per-mode coefficients for step size ``h``.

        :param system: The system to be integrated.
        :type system: BLSystem
        :param h: The step size.
        :type h: float
        """
        pass

    @abstractmethod
    def step(self, system, u: np.ndarray, background: Optional[Background], h: float) -> np.ndarray:
        """
        Advance ``u`` by one step.

        :param system: The system to be integrated.
        :type system: BLSystem
        :param u: Stacked half spectra of shape (2, ny, nx//2+1).
        :type u: np.ndarray
        :param background: Kink background at the start of the step, or None.
        :type background: Optional[Background]
        :param h: The step size; must match the last call to :meth:`prepare`.
        :type h: float
        :return: The stacked half spectra after the step.
        :rtype: np.ndarray
        """
        pass


def advance_background(background: Optional[Background], dt: float) -> Optional[Background]:
    """Background after ``dt``, or None when there is none."""
    if background is None or not hasattr(background, "advanced"):
        return background
    return background.advanced(dt)
