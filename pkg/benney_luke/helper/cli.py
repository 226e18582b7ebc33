import argparse
import sys
from pathlib import Path
from typing import Any, Dict, List, Literal, Optional, Sequence, Tuple
import numpy as np
import yaml
from pydantic import BaseModel
from rich.console import Console
from rich.table import Table
from benney_luke.common.config_handler import ConfigHandler
from benney_luke.common.error import BLError, Code
from benney_luke.common.logging_config import run_logger
from benney_luke.common.models import ExperimentConfig
from benney_luke.evolution.energy import weighted_initial_size
from benney_luke.evolution.simulation import Simulation
from benney_luke.helper.version import VERSION
from benney_luke.lab.experiment import plain, resolve_coefficients, run_experiment
from benney_luke.lab.export import SeriesRecord, export_series, read_series
from benney_luke.lab.fitting import fit_decay_exponent
from benney_luke.lab.scenarios import build_perturbation
from benney_luke.linear1d.coefficients import modulation_coefficients
from benney_luke.linear1d.eigencurve import default_eta0, eigencurve
from benney_luke.linear1d.grid1d import grid1d_for
from benney_luke.linear1d.spectral_gap import spectral_gap_check
from benney_luke.modulation.burgers import burgers_profile
from benney_luke.modulation.reduced import integrate_reduced
from benney_luke.modulation.semigroup import diffusion_wave_prediction
from benney_luke.modulation.ygrid import ReducedState, y_grid
from benney_luke.soliton.line_wave import line_wave_field
from benney_luke.soliton.profile import soliton_profile
from benney_luke.spectral.grid import grid_from_spec, set_fft_workers

console = Console()


def load_config(args) -> ExperimentConfig:
    """Defaults, then --config, then the global flags."""
    overrides: Dict[str, Any] = {}
    if getattr(args, "out", None):
        overrides["output_dir"] = args.out
    if getattr(args, "seed", None) is not None:
        overrides["seed"] = args.seed
    if getattr(args, "log_level", None):
        overrides["logging"] = {"log_level": args.log_level}
    config = ConfigHandler().load(getattr(args, "config", None), overrides, cli_threads=getattr(args, "threads", None))
    set_fft_workers(config.threads)
    return config


def print_report(title: str, report: Dict[str, Any]) -> None:
    table = Table(title=title, show_header=False)
    for key, value in report.items():
        table.add_row(str(key), f"{value:.10g}" if isinstance(value, float) else str(value))
    console.print(table)


def output_dir(config: ExperimentConfig) -> Path:
    out = Path(config.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    return out


class Command:
    """
    Abstract base class for CLI commands.

    Subclasses must implement the ``register`` and ``execute`` methods;
    ``execute`` returns the report it printed.
    """

    def register(self, subparsers: argparse._SubParsersAction):
        """
        Register the command with the given subparsers.

        :param subparsers: The argparse subparsers object.
        :type subparsers: argparse._SubParsersAction
        :raises NotImplementedError: If the subclass does not implement this method.
        """
        raise NotImplementedError(
            "Subclasses must implement the `register` method.")

    def execute(self, args):
        """
        Execute the command using the provided arguments.

        :param args: The parsed command-line arguments.
        """
        raise NotImplementedError(
            "Subclasses must implement the `execute` method.")


class SolitonArgs(BaseModel):
    """Arguments for the soliton command."""
    c: Optional[float] = None
    z_max: float = 40.0
    n: int = 2048


class SolitonCommand(Command):
    def register(self, subparsers: argparse._SubParsersAction):
        parser = subparsers.add_parser("soliton", help="Sample a line soliton profile and check its residual")
        parser.add_argument("--c", type=float, help="Speed (default: c0 from the configuration)")
        parser.add_argument("--z-max", type=float, default=40.0, help="Half width of the sample line (default: 40)")
        parser.add_argument("--n", type=int, default=2048, help="Number of samples (default: 2048)")
        parser.set_defaults(func=self.execute)

    def execute(self, args):
        soliton_args = SolitonArgs(c=args.c, z_max=args.z_max, n=args.n)
        config = load_config(args)
        profile = soliton_profile(config.params, soliton_args.c if soliton_args.c is not None else config.c0)
        z = np.linspace(-soliton_args.z_max, soliton_args.z_max, soliton_args.n)
        record = SeriesRecord(name="soliton", columns={"z": z.tolist(), "phi": profile.phi(z).tolist(),
                                                       "q": profile.q(z).tolist(), "r": profile.r(z).tolist()})
        export_series(record, output_dir(config) / "soliton.csv")
        report = {"c": profile.c, "alpha": profile.alpha, "beta": profile.beta, "amplitude": profile.amplitude,
                  "energy_1d": profile.energy_1d(), "residual": float(np.max(np.abs(profile.residual(z))))}
        print_report("Line soliton", report)
        return report


class EvolveCommand(Command):
    def register(self, subparsers: argparse._SubParsersAction):
        parser = subparsers.add_parser("evolve", help="Evolve a perturbed line soliton and record the energy ledger")
        parser.set_defaults(func=self.execute)

    def execute(self, args):
        config = load_config(args)
        out = output_dir(config)
        grid = grid_from_spec(config.grid)
        soliton = line_wave_field(grid, soliton_profile(config.params, config.c0), strict=config.strict)
        perturbation = build_perturbation(grid, config.params, config.c0, config.perturbation,
                                          eta0=config.modulation.eta0, h=config.modulation.h)
        result = Simulation(config.params, grid, config.evolution).run(soliton + perturbation,
                                                                       snapshot_dir=out / "snapshots")
        export_series(SeriesRecord.from_frame("energy", result.ledger.to_frame(), {"t": "time"}), out / "energy.csv")
        report = {"t": result.t, "frame_speed": result.frame_speed, "snapshots": len(result.snapshots),
                  "initial_size": weighted_initial_size(perturbation),
                  "energy_drift": result.ledger.relative_drift()}
        print_report("Evolution", report)
        return report


class SpectrumArgs(BaseModel):
    """Arguments for the spectrum command."""
    eta_max: float = 0.1
    count: int = 17
    gap: bool = False


class SpectrumCommand(Command):
    def register(self, subparsers: argparse._SubParsersAction):
        parser = subparsers.add_parser("spectrum", help="Resonant eigencurve, coefficients and spectral gap")
        parser.add_argument("--eta-max", type=float, default=0.1, help="Largest |eta| sampled (default: 0.1)")
        parser.add_argument("--count", type=int, default=17, help="Number of eta samples (default: 17)")
        parser.add_argument("--gap", action="store_true", help="Also check the spectral gap of the deflated spectrum")
        parser.set_defaults(func=self.execute)

    def execute(self, args):
        spectrum_args = SpectrumArgs(eta_max=args.eta_max, count=args.count, gap=args.gap)
        config = load_config(args)
        out = output_dir(config)
        params, c0, settings = config.params, config.c0, config.modulation
        grid = grid1d_for(soliton_profile(params, c0), settings.alpha, settings.grid1d_n, settings.grid1d_decay)
        coeffs = modulation_coefficients(params, c0, grid)
        etas = np.linspace(-spectrum_args.eta_max, spectrum_args.eta_max, spectrum_args.count)
        curve = eigencurve(params, c0, grid.alpha, etas, grid, coeffs, threads=config.threads, strict=config.strict)
        eta0 = settings.eta0 if settings.eta0 is not None else default_eta0(coeffs, curve)
        coeffs = coeffs.with_eta0(eta0)
        coeffs.dump_yaml(out / "coefficients.yaml")
        export_series(SeriesRecord.from_frame("eigencurve", curve.to_frame()), out / "eigencurve.csv")
        report = {"lambda1": coeffs.lambda1, "lambda1_fit": curve.lambda1_fit, "lambda2": coeffs.lambda2,
                  "lambda2_fit": curve.lambda2_fit, "conjugate_defect": curve.conjugate_defect(), "eta0": eta0}
        if spectrum_args.gap:
            gap = spectral_gap_check(params, c0, grid.alpha, eta0, grid=grid, threads=config.threads)
            with open(out / "spectral_gap.yaml", "w", encoding="utf-8") as f:
                yaml.safe_dump(plain(gap.model_dump()), f, sort_keys=False)
            report.update({"max_re_outside_band": gap.max_re_outside_band, "gap_passed": gap.passed})
        print_report(f"Spectrum at c0 = {c0}", report)
        return report


class ModulationArgs(BaseModel):
    """Arguments for the modulation command."""
    snapshots: Optional[str] = None
    full: bool = False


class ModulationCommand(Command):
    def register(self, subparsers: argparse._SubParsersAction):
        parser = subparsers.add_parser("modulation", help="Extract (gamma, c~) from the snapshots of an evolve run")
        parser.add_argument("--snapshots", metavar="DIR",
                            help="Snapshot directory of the evolve run (default: <out>/snapshots)")
        parser.add_argument("--full", action="store_true",
                            help="Evolve from scratch instead of reading snapshots")
        parser.set_defaults(func=self.execute)

    def execute(self, args):
        modulation_args = ModulationArgs(snapshots=args.snapshots, full=args.full)
        config = load_config(args)
        if modulation_args.full:
            if modulation_args.snapshots:
                raise BLError(Code.E0601, message="--full and --snapshots exclude each other")
            result = run_experiment(config)
        else:
            snapshot_dir = modulation_args.snapshots or Path(config.output_dir) / "snapshots"
            result = run_experiment(config, snapshot_dir=snapshot_dir)
        report = {"out_dir": str(result.out_dir), "eta0": result.eta0, "initial_size": result.initial_size,
                  "energy_drift": result.ledger.relative_drift(), "final_gamma_sup": result.track.gamma_sup[-1],
                  **{f"gamma_{key}": value for key, value in result.phase_limit.items() if key != "t"},
                  **{f"{name}_slope": fit.slope for name, fit in result.fits.items()}}
        print_report("Modulation experiment", report)
        return report


class ReduceArgs(BaseModel):
    """Arguments for the reduce command."""
    length: float = 8000.0
    n: int = 1024
    t_final: float = 1e4
    dt: float = 2.0
    record_every: int = 10
    amplitude: float = 1e-3
    width: float = 8.0
    form: Literal["gamma_c", "gamma_b"] = "gamma_c"
    fit_start: float = 100.0


class ReduceCommand(Command):
    def register(self, subparsers: argparse._SubParsersAction):
        parser = subparsers.add_parser("reduce", help="Integrate the reduced modulation system from a speed pulse")
        parser.add_argument("--length", type=float, default=8000.0, help="Period in y (default: 8000)")
        parser.add_argument("--n", type=int, default=1024, help="Samples in y (default: 1024)")
        parser.add_argument("--t-final", type=float, default=1e4, help="Final time (default: 1e4)")
        parser.add_argument("--dt", type=float, default=2.0, help="Time step (default: 2)")
        parser.add_argument("--record-every", type=int, default=10, help="Steps between records (default: 10)")
        parser.add_argument("--amplitude", type=float, default=1e-3, help="Height of the speed pulse (default: 1e-3)")
        parser.add_argument("--width", type=float, default=8.0, help="Width of the speed pulse (default: 8)")
        parser.add_argument("--form", choices=["gamma_c", "gamma_b"], default="gamma_c",
                            help="Unknowns of the reduced system (default: gamma_c)")
        parser.add_argument("--fit-start", type=float, default=100.0, help="Start of the decay fit window (default: 100)")
        parser.set_defaults(func=self.execute)

    def execute(self, args):
        reduce_args = ReduceArgs(length=args.length, n=args.n, t_final=args.t_final, dt=args.dt,
                                 record_every=args.record_every, amplitude=args.amplitude, width=args.width,
                                 form=args.form, fit_start=args.fit_start)
        config = load_config(args)
        coeffs, rho_map = resolve_coefficients(config)
        grid = y_grid(reduce_args.length, reduce_args.n)
        pulse = reduce_args.amplitude * np.exp(-(grid.y / reduce_args.width) ** 2)
        init = ReducedState(grid=grid, gamma=np.zeros(grid.n), speed=pulse, form=reduce_args.form)
        track = integrate_reduced(init, coeffs, reduce_args.t_final, reduce_args.dt, reduce_args.record_every,
                                  rho_map=rho_map if reduce_args.form == "gamma_b" else None)
        window = (reduce_args.fit_start, float(track.t[-1]))
        fits = {name: fit_decay_exponent(track.t, getattr(track, name), window, seed=config.seed)
                for name in ("c_norm", "cy_norm")}
        record = SeriesRecord.from_frame("reduced", track.to_frame(), {"t": "time"})
        export_series(record.model_copy(update={"fits": fits}), output_dir(config) / "reduced.csv")
        report = {"eta0": coeffs.eta0, "final_gamma_sup": track.gamma_sup[-1],
                  "final_mismatch": track.burgers_mismatch[-1],
                  **{f"{name}_slope": fit.slope for name, fit in fits.items()}}
        print_report("Reduced system", report)
        return report


class BurgersArgs(BaseModel):
    """Arguments for the burgers command."""
    mass_plus: float
    mass_minus: float
    t: float = 100.0
    y_max: Optional[float] = None
    n: int = 2001


class BurgersCommand(Command):
    def register(self, subparsers: argparse._SubParsersAction):
        parser = subparsers.add_parser("burgers", help="Sample the self-similar Burgers two-wave profile")
        parser.add_argument("--mass-plus", type=float, required=True, help="Mass of the wave travelling to -y")
        parser.add_argument("--mass-minus", type=float, required=True, help="Mass of the wave travelling to +y")
        parser.add_argument("--t", type=float, default=100.0, help="Time of the sample (default: 100)")
        parser.add_argument("--y-max", type=float, help="Half width in y (default: 3 lambda1 t)")
        parser.add_argument("--n", type=int, default=2001, help="Number of samples (default: 2001)")
        parser.set_defaults(func=self.execute)

    def execute(self, args):
        burgers_args = BurgersArgs(mass_plus=args.mass_plus, mass_minus=args.mass_minus, t=args.t,
                                   y_max=args.y_max, n=args.n)
        config = load_config(args)
        coeffs = modulation_coefficients(config.params, config.c0)
        profile = burgers_profile(coeffs, burgers_args.mass_plus, burgers_args.mass_minus)
        t = burgers_args.t
        y_max = burgers_args.y_max if burgers_args.y_max is not None else 3.0 * coeffs.lambda1 * t
        y = np.linspace(-y_max, y_max, burgers_args.n)
        gamma_y, c_tilde = profile.pair(t, y)
        heat_gamma_y, heat_c_tilde = diffusion_wave_prediction(burgers_args.mass_plus, burgers_args.mass_minus,
                                                               coeffs, t, y)
        record = SeriesRecord(name="burgers", columns={
            "y": y.tolist(), "gamma_y": gamma_y.tolist(), "c_tilde": c_tilde.tolist(),
            "heat_gamma_y": heat_gamma_y.tolist(), "heat_c_tilde": heat_c_tilde.tolist()})
        export_series(record, output_dir(config) / "burgers.csv")
        report = {"t": t, "lambda1": coeffs.lambda1, "lambda2": coeffs.lambda2, "p3": coeffs.p3,
                  "m_plus": profile.m_plus, "m_minus": profile.m_minus}
        print_report("Burgers profile", report)
        return report


class FitArgs(BaseModel):
    """Arguments for the fit command."""
    path: str
    column: str
    time_column: str = "t"
    window: Optional[Tuple[float, float]] = None
    resamples: int = 1000


class FitCommand(Command):
    def register(self, subparsers: argparse._SubParsersAction):
        parser = subparsers.add_parser("fit", help="Fit a decay exponent to a column of a series CSV")
        parser.add_argument("path", help="Series CSV written by another command")
        parser.add_argument("column", help="Column to fit")
        parser.add_argument("--time-column", default="t", help="Column holding the times (default: t)")
        parser.add_argument("--window", type=float, nargs=2, metavar=("T0", "T1"), help="Fit window in time")
        parser.add_argument("--resamples", type=int, default=1000, help="Bootstrap resamples (default: 1000)")
        parser.set_defaults(func=self.execute)

    def execute(self, args):
        fit_args = FitArgs(path=args.path, column=args.column, time_column=args.time_column,
                           window=tuple(args.window) if args.window else None, resamples=args.resamples)
        config = load_config(args)
        record = read_series(fit_args.path)
        missing = [key for key in (fit_args.time_column, fit_args.column) if key not in record.columns]
        if missing:
            raise BLError(Code.E0606, message=f"{fit_args.path} has no column(s) {', '.join(missing)}",
                          details={"columns": list(record.columns)})
        fit = fit_decay_exponent(record.columns[fit_args.time_column], record.columns[fit_args.column],
                                 fit_args.window, fit_args.resamples, seed=config.seed)
        export_series(record.model_copy(update={"fits": {**record.fits, fit_args.column: fit}}), fit_args.path)
        report = {"column": fit_args.column, **fit.to_report()}
        print_report(f"Decay fit of {fit_args.column}", report)
        return report


COMMANDS: List[Command] = [
    SolitonCommand(),
    EvolveCommand(),
    SpectrumCommand(),
    ModulationCommand(),
    ReduceCommand(),
    BurgersCommand(),
    FitCommand(),
]


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="bl-lab", description="Benney-Luke line soliton lab")
    parser.add_argument(
        "--version",
        action="version",
        version=f"Benney-Luke Lab {VERSION}",
        help="Print the current version",
    )
    parser.add_argument("--config", help="YAML experiment configuration")
    parser.add_argument("--out", help="Output directory (overrides output_dir)")
    parser.add_argument("--threads", type=int, help="Worker threads (overrides BL_THREADS and the file)")
    parser.add_argument("--seed", type=int, help="Seed of the bootstrap resampling")
    parser.add_argument("--log-level", choices=["DEBUG", "INFO", "WARNING", "ERROR"], help="Console log level")

    subparsers = parser.add_subparsers(dest="command")
    for cmd in COMMANDS:
        cmd.register(subparsers)
    return parser


def main(argv: Optional[Sequence[str]] = None):
    """
    Main entry point for the bl-lab CLI.

    Exit status: 0 on success, the error's status for a BLError (4, or 5
    for configuration and I/O), 3 for other value errors, 2 for argument
    errors, 130 on interrupt and 1 for anything unexpected.
    """
    parser = build_parser()
    args = parser.parse_args(argv)
    if hasattr(args, "func"):
        try:
            args.func(args)
        except KeyboardInterrupt:
            print("Operation cancelled by user.", file=sys.stderr)
            sys.exit(130)
        except BLError as e:
            e.log()
            stage = (e.meta or {}).get("stage")
            where = f" in stage '{stage}'" if stage else ""
            run_logger.error(f"'{args.command}' failed{where} with {e.code.value}",
                             extra={"stage": stage, "status": "FAILED", "duration": None})
            sys.exit(e.status_code)
        except argparse.ArgumentError as e:
            print(f"Argument error: {e}", file=sys.stderr)
            sys.exit(2)
        except ValueError as e:
            print(f"Value error: {e}", file=sys.stderr)
            sys.exit(3)
        except Exception as e:  # pylint: disable=broad-except
            BLError(Code.E0801, message=f"Unexpected error: {e}", cause=e).log()
            sys.exit(1)
    else:
        parser.print_help()


if __name__ == "__main__":
    main()
