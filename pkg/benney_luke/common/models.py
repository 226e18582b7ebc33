from typing import Literal, Optional
from pydantic import BaseModel, Field, model_validator
from benney_luke.common.logging_config import LoggingConfig
from benney_luke.common.error import BLError, Code


class PhysParams(BaseModel):
    """Dispersion coefficients of the model, weak surface tension regime."""
    a: float = 0.5
    b: float = 1.0

    model_config = {"frozen": True}

    @model_validator(mode="after")
    def _check_regime(self) -> "PhysParams":
        if not 0.0 < self.a < self.b:
            raise BLError(Code.E0102, details={"a": self.a, "b": self.b})
        return self


class GridSpec(BaseModel):
    """Box lengths and sample counts as written in experiment files."""
    lx: float = 160.0
    ly: float = 800.0
    nx: int = 512
    ny: int = 128


class EvolutionConfig(BaseModel):
    dt: float = 0.01
    t_final: float = 10.0
    integrator: str = "imex-spectral"
    dealias: bool = True
    snapshot_every: int = 100
    frame_speed: Optional[float] = None
    sponge_width: float = 0.0
    sponge_time: float = 1.0
    energy_guard: float = 0.1

    @property
    def n_steps(self) -> int:
        return int(round(self.t_final / self.dt))

    @model_validator(mode="after")
    def _check_cadence(self) -> "EvolutionConfig":
        if self.dt <= 0 or self.t_final <= 0:
            raise BLError(Code.E0304, message="dt and t_final must be positive",
                          details={"dt": self.dt, "t_final": self.t_final})
        if abs(self.n_steps * self.dt - self.t_final) > 1e-9 * max(1.0, self.t_final):
            raise BLError(Code.E0304, message="t_final must be a whole number of steps",
                          details={"dt": self.dt, "t_final": self.t_final})
        if self.snapshot_every <= 0 or self.n_steps % self.snapshot_every:
            raise BLError(Code.E0304, message="snapshot cadence must divide the step count",
                          details={"n_steps": self.n_steps, "snapshot_every": self.snapshot_every})
        if self.sponge_width < 0 or self.sponge_time <= 0:
            raise BLError(Code.E0304, message="sponge width must be >= 0 and sponge time > 0")
        return self


class PerturbationSpec(BaseModel):
    kind: Literal["localized_bump", "resonant_mode", "none"] = "localized_bump"
    epsilon: float = 1e-3
    width_x: float = 4.0
    width_y: float = 20.0
    offset: float = 15.0

    @model_validator(mode="after")
    def _check_sizes(self) -> "PerturbationSpec":
        if self.epsilon < 0 or self.width_x <= 0 or self.width_y <= 0:
            raise BLError(Code.E0601, message="perturbation amplitude and widths must be positive",
                          details=self.model_dump())
        return self


class ModulationSettings(BaseModel):
    """Decomposition and linearized-spectrum knobs.

    ``eta0`` and ``alpha`` default to the rules of the coefficient tables
    when left as None. ``adjoint`` picks the functions the orthogonality
    conditions pair against: g_k*(eta) at the local speed, or zeta_k*.
    """
    eta0: Optional[float] = None
    alpha: Optional[float] = None
    h: float = 10.0
    adjoint: Literal["zeta", "projection"] = "projection"
    recenter_adjoint: bool = False
    newton_tol: float = 1e-10
    max_iter: int = 25
    smallness: float = 0.5
    grid1d_n: int = 384
    grid1d_decay: float = 32.0

    @model_validator(mode="after")
    def _check_values(self) -> "ModulationSettings":
        if self.h < 0:
            raise BLError(Code.E0203, details={"h": self.h})
        if self.eta0 is not None and self.eta0 <= 0:
            raise BLError(Code.E0601, message="eta0 must be positive")
        if self.alpha is not None and self.alpha <= 0:
            raise BLError(Code.E0401, details={"alpha": self.alpha})
        if self.grid1d_n < 8 or self.grid1d_n % 2:
            raise BLError(Code.E0101, message="grid1d_n must be even and >= 8")
        return self


class ExperimentConfig(BaseModel):
    """Everything a run needs; also the shape of the written manifest."""
    params: PhysParams = Field(default_factory=PhysParams)
    c0: float = 1.05
    grid: GridSpec = Field(default_factory=GridSpec)
    evolution: EvolutionConfig = Field(default_factory=EvolutionConfig)
    perturbation: PerturbationSpec = Field(default_factory=PerturbationSpec)
    modulation: ModulationSettings = Field(default_factory=ModulationSettings)
    logging: LoggingConfig = Field(default_factory=LoggingConfig)
    output_dir: str = "bl_output"
    seed: int = 0
    threads: int = 1
    strict: bool = False

    @model_validator(mode="after")
    def _check_speed(self) -> "ExperimentConfig":
        if self.c0 <= 1.0 or self.params.b * self.c0 ** 2 - self.params.a <= 0:
            raise BLError(Code.E0201, details={"c0": self.c0})
        if self.threads < 1:
            raise BLError(Code.E0601, message="threads must be >= 1")
        return self

    def get(self, key: str, default=None):
        return getattr(self, key, default)
