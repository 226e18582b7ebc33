"""Structured error definitions and helpers for the Benney-Luke lab.

This module provides:
- ErrorSpec: static registry entries for known error codes.
- BLError: an exception carrying structured metadata (category, code, exit status, details).
- warn_or_raise for W codes under a strict flag; BLError.to_payload produces
  machine-readable payloads for manifests and JSON logs.

Code prefixes encode severity: E is an error, W a warning that callers may
downgrade to a logged record, X a fatal condition reached after fallbacks.
"""

from __future__ import annotations


import logging
from enum import Enum
from typing import Dict, Optional, Any
from pydantic import BaseModel
from rich.console import Console
from rich.panel import Panel
from rich.text import Text
from benney_luke.common.logging_config import internal_logger


class Category(str, Enum):
    GRID = "grid"
    PARAMS = "params"
    SOLITON = "soliton"
    EVOLUTION = "evolution"
    SPECTRUM = "spectrum"
    DECOMPOSITION = "decomposition"
    REDUCED = "reduced"
    CONFIG = "config"
    IO = "io"
    FIT = "fit"
    GENERAL = "general"


class Code(str, Enum):
    # Grid and parameter issues
    E0101 = "E0101"
    E0102 = "E0102"
    E0103 = "E0103"
    E0104 = "E0104"

    # Soliton issues
    E0201 = "E0201"
    E0202 = "E0202"
    W0202 = "W0202"
    E0203 = "E0203"

    # Evolution issues
    E0301 = "E0301"
    E0302 = "E0302"
    E0303 = "E0303"
    E0304 = "E0304"
    E0305 = "E0305"
    W0305 = "W0305"
    E0306 = "E0306"
    E0307 = "E0307"

    # Linearized spectrum issues
    E0401 = "E0401"
    E0402 = "E0402"
    E0403 = "E0403"
    E0404 = "E0404"
    E0405 = "E0405"
    E0406 = "E0406"
    W0406 = "W0406"
    E0407 = "E0407"

    # Decomposition, reduced system and asymptotics issues
    E0501 = "E0501"
    X0501 = "X0501"
    E0502 = "E0502"
    E0503 = "E0503"
    E0504 = "E0504"
    E0505 = "E0505"

    # Config/File issues
    E0601 = "E0601"
    E0602 = "E0602"
    E0603 = "E0603"
    E0604 = "E0604"
    E0605 = "E0605"
    E0606 = "E0606"

    # Fit issues
    E0701 = "E0701"
    E0702 = "E0702"
    E0703 = "E0703"

    # General Issues
    E0801 = "E0801"
    E0802 = "E0802"


class ErrorSpec(BaseModel):
    """Registry entry for a known error code.

    ``default_status`` is the process exit status the CLI uses when the
    error escapes a command.
    """

    code: Code
    default_message: str
    category: Category
    default_status: int = 4
    meta: Optional[Dict[str, Any]] = None

    model_config = {
        "frozen": True,
    }


def _spec(code: Code, message: str, category: Category, status: int = 4) -> ErrorSpec:
    return ErrorSpec(code=code, default_message=message, category=category, default_status=status)


ERROR_REGISTRY: Dict[str, ErrorSpec] = {
    # Grid and parameter issues
    "E0101": _spec(Code.E0101, "Invalid grid: counts must be even and >= 8, lengths positive", Category.GRID),
    "E0102": _spec(Code.E0102, "Invalid physical parameters: 0 < a < b required", Category.PARAMS),
    "E0103": _spec(Code.E0103, "Grid mismatch between operands", Category.GRID),
    "E0104": _spec(Code.E0104, "Fourier symbol is not finite on the grid", Category.GRID),
    # Soliton issues
    "E0201": _spec(Code.E0201, "Invalid wave speed: |c| > 1 and b c^2 - a > 0 required", Category.SOLITON),
    "E0202": _spec(Code.E0202, "Soliton tail at the periodic seam exceeds tolerance", Category.SOLITON),
    "W0202": _spec(Code.W0202, "Soliton tail at the periodic seam exceeds tolerance (warning)", Category.SOLITON, 0),
    "E0203": _spec(Code.E0203, "Invalid mollifier offset: h >= 0 required", Category.SOLITON),
    # Evolution issues
    "E0301": _spec(Code.E0301, "Non-finite values in the state", Category.EVOLUTION),
    "E0302": _spec(Code.E0302, "Instability detected: energy grew by more than 10% in one step", Category.EVOLUTION),
    "E0303": _spec(Code.E0303, "Time step exceeds the stability bound of the explicit part", Category.EVOLUTION),
    "E0304": _spec(Code.E0304, "Invalid evolution config", Category.EVOLUTION),
    "E0305": _spec(Code.E0305, "Energy near the periodic seam exceeds the weight guard", Category.EVOLUTION),
    "W0305": _spec(Code.W0305, "Energy near the periodic seam exceeds the weight guard", Category.EVOLUTION, 0),
    "E0306": _spec(Code.E0306, "Dispersion bound |grad omega| <= 1 violated", Category.EVOLUTION),
    "E0307": _spec(Code.E0307, "Unknown integrator requested", Category.EVOLUTION),
    # Linearized spectrum issues
    "E0401": _spec(Code.E0401, "Weight rate must satisfy 0 < alpha < alpha_c", Category.SPECTRUM),
    "E0402": _spec(Code.E0402, "Sign invariant of the modulation coefficients violated", Category.SPECTRUM),
    "E0403": _spec(Code.E0403, "Biorthogonality pairing violated", Category.SPECTRUM),
    "E0404": _spec(Code.E0404, "Eigenvalue tracking lost the resonant branch", Category.SPECTRUM),
    "E0405": _spec(Code.E0405, "Dense eigensolve failed", Category.SPECTRUM),
    "E0406": _spec(Code.E0406, "Projection normalization is ill-conditioned", Category.SPECTRUM),
    "W0406": _spec(Code.W0406, "Projection normalization fell back to the zeta basis", Category.SPECTRUM, 0),
    "E0407": _spec(Code.E0407, "1D grid too short for the profile tails", Category.SPECTRUM),
    # Decomposition, reduced system and asymptotics issues
    "E0501": _spec(Code.E0501, "Decomposition Newton iteration did not converge", Category.DECOMPOSITION),
    "X0501": _spec(Code.X0501, "Decomposition failed after Jacobian refresh", Category.DECOMPOSITION),
    "E0502": _spec(Code.E0502, "Perturbation exceeds the decomposition smallness threshold", Category.DECOMPOSITION),
    "E0503": _spec(Code.E0503, "Reduced modulation system blew up", Category.REDUCED),
    "E0504": _spec(Code.E0504, "Band edge violates |nu| eta0 < lambda1", Category.REDUCED),
    "E0505": _spec(Code.E0505, "Requested Burgers mass is outside the attainable range", Category.REDUCED),
    # Config/File issues
    "E0601": _spec(Code.E0601, "Configuration missing or invalid", Category.CONFIG, 5),
    "E0602": _spec(Code.E0602, "Failed to parse configuration file", Category.CONFIG, 5),
    "E0603": _spec(Code.E0603, "Snapshot file has an invalid header", Category.IO, 5),
    "E0604": _spec(Code.E0604, "Snapshot payload size does not match the header", Category.IO, 5),
    "E0605": _spec(Code.E0605, "I/O failure", Category.IO, 5),
    "E0606": _spec(Code.E0606, "Series record is malformed", Category.IO, 5),
    # Fit issues
    "E0701": _spec(Code.E0701, "Not enough samples in the fit window", Category.FIT),
    "E0702": _spec(Code.E0702, "Non-positive values in the fit window", Category.FIT),
    "E0703": _spec(Code.E0703, "Fit window outside the data range", Category.FIT),
    # General Issues
    "E0801": _spec(Code.E0801, "Unexpected error", Category.GENERAL, 1),
    "E0802": _spec(Code.E0802, "Experiment stage failed", Category.GENERAL),
}


class ErrorPayload(BaseModel):
    """Pydantic model for serialized error payloads."""

    type: str
    code: str
    status: Optional[int] = None
    message: str
    details: Optional[Any] = None
    meta: Optional[Dict[str, Any]] = None


class BLError(Exception):
    """Exception carrying structured metadata for logging, manifests and exit codes.

    Attributes:
        code: short code like 'E0101'
        message: human readable message
        category: Category enum
        status_code: process exit status
        details: optional dict with extra data
    """

    def __init__(
        self,
        code: str | Code,
        message: Optional[str] = None,
        details: Optional[Any] = None,
        cause: Optional[BaseException] = None,
        meta: Optional[Dict[str, Any]] = None,
    ):
        spec = ERROR_REGISTRY.get(str(code.value if isinstance(code, Code) else code))
        if spec is None:
            spec = ErrorSpec(
                code=Code(code) if isinstance(code, str) else code,
                default_message=message or "Unknown error",
                category=Category.GENERAL,
                default_status=1,
                meta=meta,
            )

        self.code = spec.code
        self.category = spec.category
        self.status_code = int(spec.default_status)
        self.message = message or spec.default_message
        self.details = details
        self.__cause__ = cause
        self.meta = meta or getattr(spec, "meta", None)
        super().__init__(f"{self.code.value}: {self.message}")

    @property
    def is_warning(self) -> bool:
        return self.code.value.startswith("W")

    def log(self, logger=None, level=None, extra=None, use_rich: bool = True):
        """
        Log the error through ``logger`` (defaults to internal_logger), or print a
        rich panel when ``use_rich`` is True.
        """
        code_prefix = self.code.value[0]
        resolved_level = self._resolve_log_level(level, code_prefix)
        log_msg, log_extra = self._build_log_message(extra)
        if use_rich:
            self._print_rich(code_prefix)
        else:
            (logger or internal_logger).log(resolved_level, log_msg, extra=log_extra)

    def _resolve_log_level(self, level, code_prefix):
        if level is not None:
            return level
        if code_prefix == "W":
            return logging.WARNING
        if code_prefix == "X":
            return logging.CRITICAL
        return logging.ERROR

    def _build_log_message(self, extra):
        log_msg = f"[{self.code.value}] {self.message} (category: {self.category.value})"
        log_extra = {
            "code": self.code.value,
            "category": self.category.value,
            "status": self.status_code,
            "details": self.details,
            "meta": self.meta,
        }
        if extra:
            log_extra.update(extra)
        return log_msg, log_extra

    def _print_rich(self, code_prefix):
        console = Console(stderr=True)
        payload = self.to_payload(include_status=True)
        code_color = "red" if code_prefix in ("E", "X") else "yellow"
        body = Text(payload["message"], style="bold")
        if payload.get("details"):
            body.append(f"\nDetails: {payload['details']}", style="dim")
        if payload.get("meta"):
            body.append(f"\nMeta: {payload['meta']}", style="dim")
        console.print(Panel(body, title=f"{payload['code']} ({payload['type']})", border_style=code_color))

    def to_payload(
        self, include_status: bool = False, meta: Optional[Dict[str, Any]] = None
    ) -> Dict[str, Any]:
        """Return a JSON-serializable payload.

        Format:
        {
            "type": "bl:<category>",
            "code": "E0101",
            "status": 4,
            "message": "...",
            "details": {...},
            "meta": {...}
        }
        """
        payload = ErrorPayload(
            type=f"bl:{self.category.value}",
            code=self.code.value,
            status=(self.status_code if include_status else None),
            message=self.message,
            details=self.details,
            meta=meta or self.meta,
        )
        return payload.model_dump()


def warn_or_raise(code: Code, message: str, strict: bool, details: Optional[Any] = None) -> BLError:
    """
    Raise the E variant of a W code when ``strict``; otherwise log the warning
    and return it so callers can attach it to their reports.
    """
    if strict:
        raise BLError(Code("E" + code.value[1:]), message=message, details=details)
    warning = BLError(code, message=message, details=details)
    warning.log(use_rich=False)
    return warning


__all__ = [
    "Category",
    "Code",
    "ErrorSpec",
    "ERROR_REGISTRY",
    "BLError",
    "warn_or_raise",
    "ErrorPayload",
]
