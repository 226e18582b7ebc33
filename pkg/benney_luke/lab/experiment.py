"""End-to-end experiment: soliton + perturbation, evolution, decomposition, reports.

Stages run in order and are traced on ``bl.run``:

    coefficients  modulation coefficients, rho map and the band edge eta0
    initial       line soliton plus the configured perturbation U0
    evolve        full evolution in the frame moving at c0, snapshots on disk
                  (or load: the BLK1 snapshots of an earlier run, read back)
    free          U0 evolved on its own (the free part U1)
    decompose     (gamma, c~) of every snapshot
    analysis      phase-limit prediction and decay fits
    export        track.csv, energy.csv, coefficients.yaml and manifest.yaml

A failing stage raises a BLError whose ``meta["stage"]`` names it.
"""

import logging
from contextlib import contextmanager
from pathlib import Path
from typing import Any, Dict, List, Mapping, Optional, Tuple, Union
import numpy as np
from pydantic import BaseModel, ConfigDict, Field
from benney_luke.common.config_handler import ConfigHandler
from benney_luke.common.error import BLError, Category, Code
from benney_luke.common.logging_config import internal_logger, reconfigure_logging, run_logger
from benney_luke.common.models import ExperimentConfig
from benney_luke.common.stage_tracer import stage_tracer
from benney_luke.evolution.energy import weighted_initial_size
from benney_luke.evolution.simulation import EnergyLedger, Simulation, VirialProbe, sample_ledger
from benney_luke.helper.version import VERSION
from benney_luke.lab.export import SeriesRecord, export_series
from benney_luke.lab.fitting import DecayFit, fit_decay_exponent
from benney_luke.lab.scenarios import build_perturbation
from benney_luke.linear1d.coefficients import ModulationCoefficients, RhoMap, modulation_coefficients
from benney_luke.linear1d.eigencurve import default_eta0, eigencurve
from benney_luke.linear1d.grid1d import grid1d_for
from benney_luke.modulation.decomposition import decompose_series, evolve_free_reference
from benney_luke.modulation.phase_limit import phase_limit_predictor, track_forcing
from benney_luke.modulation.reduced import ModulationTrack
from benney_luke.soliton.line_wave import KinkBackground, line_wave_field
from benney_luke.soliton.profile import soliton_profile
from benney_luke.soliton.psi_correction import mollifier_constant
from benney_luke.spectral.fields import FieldPair
from benney_luke.spectral.grid import grid_from_spec, set_fft_workers
from benney_luke.spectral.snapshot_io import read_snapshot

FITTED_SERIES = ("c_norm", "cy_norm")
TRACK_UNITS = {"t": "time"}
ENERGY_UNITS = {"t": "time"}
SNAPSHOT_GLOB = "snapshot_*.blk"


def plain(value: Any) -> Any:
    """Nested numpy scalars and arrays as builtin types for YAML."""
    if isinstance(value, Mapping):
        return {str(key): plain(item) for key, item in value.items()}
    if isinstance(value, (list, tuple)):
        return [plain(item) for item in value]
    if isinstance(value, np.ndarray):
        return value.tolist()
    if isinstance(value, np.generic):
        return value.item()
    return value


class WarningCollector(logging.Handler):
    """Keeps the W-coded records logged on bl.internal while attached."""

    def __init__(self):
        super().__init__(level=logging.WARNING)
        self.records: List[Dict[str, Any]] = []

    def emit(self, record: logging.LogRecord) -> None:
        code = str(getattr(record, "code", ""))
        if code.startswith("W"):
            self.records.append({"code": code, "message": record.getMessage(),
                                 "details": plain(getattr(record, "details", None))})


@contextmanager
def collect_warnings():
    collector = WarningCollector()
    internal_logger.addHandler(collector)
    try:
        yield collector
    finally:
        internal_logger.removeHandler(collector)


@contextmanager
def _stage(name: str):
    with stage_tracer.stage(name):
        try:
            yield
        except BLError as e:
            e.meta = {**(e.meta or {}), "stage": name}
            raise
        except Exception as e:
            raise BLError(Code.E0802, message=f"stage '{name}' failed: {e}", cause=e,
                          meta={"stage": name}) from e


class ExperimentResult(BaseModel):
    out_dir: Path
    eta0: float
    alpha: float
    initial_size: float
    coefficients: ModulationCoefficients
    track: ModulationTrack
    ledger: EnergyLedger
    phase_limit: Dict[str, float]
    fits: Dict[str, DecayFit] = Field(default_factory=dict)
    skipped_fits: Dict[str, Dict[str, Any]] = Field(default_factory=dict)
    warnings: List[Dict[str, Any]] = Field(default_factory=list)
    artifacts: Dict[str, Path] = Field(default_factory=dict)
    snapshots: List[Path] = Field(default_factory=list)

    model_config = ConfigDict(arbitrary_types_allowed=True)


class SnapshotSeries(BaseModel):
    """Snapshots read back from disk, in index order."""
    indices: List[int]
    states: List[Tuple[float, FieldPair]]
    paths: List[Path]

    model_config = ConfigDict(arbitrary_types_allowed=True)


def load_snapshot_series(snapshot_dir: Union[str, Path], config: ExperimentConfig) -> SnapshotSeries:
    """
    Read the ``snapshot_NNNNN.blk`` files an evolve run of ``config`` wrote.
    The c0 kink is split off phi1 again, and snapshot NNNNN is taken at
    t = NNNNN * snapshot_every * dt.
    """
    directory = Path(snapshot_dir)
    if not directory.is_dir():
        raise BLError(Code.E0605, message=f"{directory} is not a snapshot directory")
    files = sorted(directory.glob(SNAPSHOT_GLOB))
    if not files:
        raise BLError(Code.E0605, message=f"no {SNAPSHOT_GLOB} files in {directory}")
    grid = grid_from_spec(config.grid)
    background = KinkBackground(params=config.params, speed=config.c0)
    evolution = config.evolution
    indices, states = [], []
    for path in files:
        try:
            index = int(path.stem.rsplit("_", 1)[-1])
        except ValueError as e:
            raise BLError(Code.E0603, message=f"{path.name} does not carry a snapshot index", cause=e) from e
        state = read_snapshot(path, background)
        if not isinstance(state, FieldPair):
            raise BLError(Code.E0604, message=f"{path} holds a single field where a pair is needed")
        if not state.grid.same_as(grid):
            raise BLError(Code.E0103, message=f"{path.name} was not written on the configured grid",
                          details={"snapshot": state.grid.key(), "config": grid.key()})
        indices.append(index)
        states.append(((index * evolution.snapshot_every) * evolution.dt, state))
    if indices[-1] > evolution.n_steps // evolution.snapshot_every:
        raise BLError(Code.E0601, message="snapshots reach beyond t_final of the configuration",
                      details={"last_index": indices[-1], "t_final": evolution.t_final})
    internal_logger.debug(f"Read {len(files)} snapshots from {directory}")
    return SnapshotSeries(indices=indices, states=states, paths=files)


def resolved_config(config: ExperimentConfig, eta0: float, alpha: float) -> ExperimentConfig:
    """``config`` with the defaulted eta0 and alpha written in, so a rerun needs nothing else."""
    modulation = config.modulation.model_copy(update={"eta0": eta0, "alpha": alpha})
    return config.model_copy(update={"modulation": modulation})


def write_manifest(config: ExperimentConfig, coeffs: ModulationCoefficients, path: Union[str, Path],
                   extra: Optional[Mapping[str, Any]] = None) -> Path:
    """
    YAML manifest: the full configuration followed by the derived constants
    (coefficient table, mollifier constant, package version) and ``extra``.
    """
    payload: Dict[str, Any] = {
        "version": VERSION,
        "constants": {"mollifier_constant": mollifier_constant(), "eta0": coeffs.eta0, "alpha": coeffs.alpha,
                      "grid1d_length": coeffs.length, "grid1d_n": coeffs.n},
        "coefficients": coeffs.to_report(),
    }
    if extra:
        payload.update(extra)
    return ConfigHandler.save(config, path, extra=plain(payload))


def resolve_coefficients(config: ExperimentConfig) -> Tuple[ModulationCoefficients, RhoMap]:
    params, c0, settings = config.params, config.c0, config.modulation
    grid1d = grid1d_for(soliton_profile(params, c0), settings.alpha, settings.grid1d_n, settings.grid1d_decay)
    rho_map = RhoMap(params, c0, n=settings.grid1d_n, decay=settings.grid1d_decay)
    coeffs = modulation_coefficients(params, c0, grid1d, rho_map)
    eta0 = settings.eta0
    if eta0 is None:
        curve = eigencurve(params, c0, grid1d.alpha, grid=grid1d, coeffs=coeffs, threads=config.threads,
                           strict=config.strict)
        eta0 = default_eta0(coeffs, curve)
        run_logger.info(f"Band edge eta0 = {eta0:.4f} from the sampled eigencurve")
    return coeffs.with_eta0(eta0), rho_map


def _fits(track: ModulationTrack, seed: int) -> Tuple[Dict[str, DecayFit], Dict[str, Dict[str, Any]]]:
    fits, skipped = {}, {}
    times = track.times
    later = times > 0
    for name in FITTED_SERIES:
        try:
            fits[name] = fit_decay_exponent(times[later], np.asarray(getattr(track, name))[later], seed=seed)
        except BLError as e:
            if e.category != Category.FIT:
                raise
            internal_logger.info(f"No decay fit for {name}: {e.message}")
            skipped[name] = e.to_payload()
    return fits, skipped


def run_experiment(config: ExperimentConfig, out_dir: Optional[Union[str, Path]] = None,
                   snapshot_dir: Optional[Union[str, Path]] = None) -> ExperimentResult:
    """
    Run every stage for ``config`` and write the artifacts under ``out_dir``
    (default ``config.output_dir``). Given the same configuration the CSV
    outputs are identical from run to run. With ``snapshot_dir`` the full
    evolution is not rerun: the snapshots an earlier run of the same
    configuration wrote there are decomposed instead.
    """
    out = Path(out_dir if out_dir is not None else config.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    if config.logging.json_log and config.logging.json_path is None:
        reconfigure_logging(config.logging.model_copy(update={"json_path": str(out / "run_log.jsonl")}))
    set_fft_workers(config.threads)
    params, c0, settings = config.params, config.c0, config.modulation

    with collect_warnings() as warnings:
        with _stage("coefficients"):
            coeffs, rho_map = resolve_coefficients(config)
            eta0 = float(coeffs.eta0)
            settings = settings.model_copy(update={"eta0": eta0})

        with _stage("initial"):
            grid = grid_from_spec(config.grid)
            soliton = line_wave_field(grid, soliton_profile(params, c0), strict=config.strict)
            perturbation = build_perturbation(grid, params, c0, config.perturbation, eta0=eta0, h=settings.h)
            initial = soliton + perturbation
            initial_size = weighted_initial_size(perturbation)
            run_logger.info(f"Initial perturbation '{config.perturbation.kind}': weighted size {initial_size:.6e}")

        full: List[Tuple[float, FieldPair]] = []
        free: List[FieldPair] = []
        evolution = config.evolution.model_copy(update={"frame_speed": c0})
        virial = VirialProbe(alpha=coeffs.alpha, c1=0.5 * (1.0 + c0))

        if snapshot_dir is None:
            with _stage("evolve"):
                result = Simulation(params, grid, evolution).run(
                    initial, observer=lambda t, state: full.append((t, state)), snapshot_dir=out / "snapshots",
                    virial=virial)
                ledger, snapshots, indices = result.ledger, result.snapshots, None
        else:
            with _stage("load"):
                series = load_snapshot_series(snapshot_dir, config)
                full, snapshots, indices = series.states, series.paths, series.indices
                ledger = EnergyLedger()
                for t, state in full:
                    sample_ledger(ledger, t, state, params, c0, virial=virial)

        with _stage("free"):
            evolve_free_reference(perturbation, params, evolution, c0, observer=lambda t, state: free.append(state))
            if indices is not None:
                free = [free[index] for index in indices]

        with _stage("decompose"):
            track, _ = decompose_series(full, free, params, c0, settings, coeffs, rho_map, threads=config.threads,
                                        strict=config.strict)

        with _stage("analysis"):
            prediction = phase_limit_predictor(track.times, track_forcing(track, coeffs), track.grid, coeffs)
            fits, skipped = _fits(track, config.seed)

        with _stage("export"):
            record = SeriesRecord.from_frame("track", track.to_frame(), TRACK_UNITS)
            record = record.model_copy(update={"fits": fits})
            artifacts = {
                "track": export_series(record, out / "track.csv"),
                "energy": export_series(SeriesRecord.from_frame("energy", ledger.to_frame(), ENERGY_UNITS),
                                        out / "energy.csv"),
                "coefficients": coeffs.dump_yaml(out / "coefficients.yaml"),
            }
            extra = {
                "results": {
                    "initial_size": initial_size,
                    "energy_drift": ledger.relative_drift(),
                    "largest_residual": max(track.residual),
                    "phase_limit": prediction.to_report(),
                    "final_gamma_sup": track.gamma_sup[-1],
                    "fits": {name: fit.to_report() for name, fit in fits.items()},
                    "skipped_fits": skipped,
                },
                "artifacts": {name: str(path.relative_to(out)) for name, path in artifacts.items()},
                "snapshots": len(snapshots),
                "snapshot_source": str(snapshot_dir) if snapshot_dir is not None else "evolve",
                "warnings": list(warnings.records),
            }
            artifacts["manifest"] = write_manifest(resolved_config(config, eta0, coeffs.alpha), coeffs,
                                                   out / "manifest.yaml", extra)

    run_logger.info(f"Experiment written to {out}")
    return ExperimentResult(out_dir=out, eta0=eta0, alpha=coeffs.alpha, initial_size=initial_size,
                            coefficients=coeffs, track=track, ledger=ledger,
                            phase_limit=prediction.to_report(), fits=fits, skipped_fits=skipped,
                            warnings=list(warnings.records), artifacts=artifacts, snapshots=snapshots)
