import numpy as np
import pytest
import yaml
from conftest import synthetic_coefficients
from benney_luke.common.config_handler import THREADS_ENV
from benney_luke.common.error import BLError, Code
from benney_luke.helper import cli
from benney_luke.helper.cli import SolitonCommand, build_parser, load_config, main
from benney_luke.helper.version import VERSION
from benney_luke.lab.export import SeriesRecord, export_series, read_series


def exit_code(argv):
    with pytest.raises(SystemExit) as err:
        main(argv)
    return err.value.code


class TestParser:
    """
    UNIT TESTS: bl-lab argument parsing

    PURPOSE: Check the version flag, help and the global flags
    TESTING TYPE: Black-box unit testing
    """

    @pytest.mark.black_box
    def test_version(self, capsys):
        assert exit_code(["--version"]) == 0
        assert VERSION in capsys.readouterr().out

    @pytest.mark.black_box
    def test_help_without_command(self, capsys):
        main([])
        assert "bl-lab" in capsys.readouterr().out

    @pytest.mark.black_box
    def test_global_flags_precede_command(self):
        args = build_parser().parse_args(["--out", "runs", "--threads", "2", "--seed", "9", "fit", "a.csv", "c_norm",
                                          "--window", "10", "100"])
        assert (args.out, args.threads, args.seed, args.command) == ("runs", 2, 9, "fit")
        assert args.window == [10.0, 100.0]

    @pytest.mark.black_box
    def test_unknown_command(self):
        assert exit_code(["ripple"]) == 2

    @pytest.mark.black_box
    def test_burgers_needs_masses(self):
        assert exit_code(["burgers", "--mass-plus", "0.1"]) == 2


class TestLoadConfig:
    """
    UNIT TESTS: configuration layering from the command line

    PURPOSE: Verify that flags override the file and the thread environment variable
    TESTING TYPE: White-box unit testing
    """

    @pytest.mark.white_box
    def test_flags_override_file(self, tmp_path, monkeypatch):
        monkeypatch.delenv(THREADS_ENV, raising=False)
        config_file = tmp_path / "run.yaml"
        config_file.write_text("c0: 1.5\nseed: 3\noutput_dir: from_file\n", encoding="utf-8")
        args = build_parser().parse_args(["--config", str(config_file), "--out", str(tmp_path / "cli"),
                                          "--seed", "11", "--log-level", "WARNING", "soliton"])
        config = load_config(args)
        assert config.c0 == 1.5
        assert config.seed == 11
        assert config.output_dir == str(tmp_path / "cli")
        assert config.logging.log_level == "WARNING"

    @pytest.mark.white_box
    def test_thread_precedence(self, monkeypatch):
        monkeypatch.setenv(THREADS_ENV, "3")
        assert load_config(build_parser().parse_args(["soliton"])).threads == 3
        assert load_config(build_parser().parse_args(["--threads", "2", "soliton"])).threads == 2

    @pytest.mark.white_box
    def test_missing_config_file(self, tmp_path):
        assert exit_code(["--config", str(tmp_path / "absent.yaml"), "soliton"]) == 5


class TestCommands:
    """
    UNIT TESTS: bl-lab subcommands

    PURPOSE: Run the cheap commands end to end and check the files they write
    TESTING TYPE: Black-box unit testing
    """

    @pytest.mark.black_box
    def test_soliton(self, tmp_path):
        main(["--out", str(tmp_path), "soliton", "--c", "1.5", "--n", "401"])
        record = read_series(tmp_path / "soliton.csv")
        assert list(record.columns) == ["z", "phi", "q", "r"]
        assert len(record.columns["z"]) == 401
        assert max(record.columns["q"]) == pytest.approx(record.columns["q"][200])

    @pytest.mark.black_box
    def test_burgers(self, tmp_path, mocker):
        coeffs = synthetic_coefficients()
        mocker.patch("benney_luke.helper.cli.modulation_coefficients", return_value=coeffs)
        main(["--out", str(tmp_path), "burgers", "--mass-plus", "0.5", "--mass-minus", "0.2", "--t", "50",
              "--n", "101"])
        record = read_series(tmp_path / "burgers.csv")
        assert list(record.columns) == ["y", "gamma_y", "c_tilde", "heat_gamma_y", "heat_c_tilde"]
        y = np.asarray(record.columns["y"])
        assert y[0] == pytest.approx(-3.0 * coeffs.lambda1 * 50) and y.size == 101

    @pytest.mark.black_box
    def test_burgers_unattainable_mass(self, tmp_path, mocker):
        mocker.patch("benney_luke.helper.cli.modulation_coefficients", return_value=synthetic_coefficients())
        code = exit_code(["--out", str(tmp_path), "burgers", "--mass-plus", "1e4", "--mass-minus", "0"])
        assert code == BLError(Code.E0505).status_code

    @pytest.mark.black_box
    def test_fit_adds_sidecar(self, tmp_path):
        t = np.logspace(0, 3, 60)
        path = export_series(SeriesRecord(name="series", columns={"t": t.tolist(), "v": (2.0 * t ** -0.5).tolist()}),
                             tmp_path / "series.csv")
        main(["--out", str(tmp_path), "fit", str(path), "v", "--resamples", "50"])
        fit = read_series(path).fits["v"]
        assert fit.slope == pytest.approx(-0.5, abs=1e-12)
        assert fit.samples == 60

    @pytest.mark.black_box
    def test_fit_missing_column(self, tmp_path):
        path = export_series(SeriesRecord(name="s", columns={"t": [1.0, 2.0]}), tmp_path / "s.csv")
        assert exit_code(["--out", str(tmp_path), "fit", str(path), "v"]) == 5

    @pytest.mark.black_box
    def test_fit_too_short(self, tmp_path):
        path = export_series(SeriesRecord(name="s", columns={"t": [1.0, 2.0], "v": [1.0, 0.5]}), tmp_path / "s.csv")
        assert exit_code(["--out", str(tmp_path), "fit", str(path), "v"]) == 4




QUIET_RUN = """\
params: {a: 0.5, b: 1.0}
c0: 1.5
grid: {lx: 60.0, ly: 8.0, nx: 256, ny: 8}
evolution: {dt: 0.05, t_final: 0.5, snapshot_every: 5}
perturbation: {kind: none}
modulation: {eta0: 0.3}
"""

SPECTRUM_RUN = """\
params: {a: 0.5, b: 1.0}
c0: 1.2
modulation: {grid1d_n: 256, grid1d_decay: 24.0}
"""


def write_config(tmp_path, text):
    path = tmp_path / "run.yaml"
    path.write_text(text, encoding="utf-8")
    return str(path)


class TestPipelineCommands:
    """
    UNIT TESTS: the evolve, modulation, spectrum and reduce commands

    PURPOSE: Run each command to success on small inputs and check the files it leaves behind
    TESTING TYPE: Black-box unit testing
    """

    @pytest.mark.black_box
    def test_evolve_then_modulation(self, tmp_path):
        config_file = write_config(tmp_path, QUIET_RUN)
        out = tmp_path / "out"
        main(["--config", config_file, "--out", str(out), "evolve"])
        assert sorted(p.name for p in (out / "snapshots").iterdir()) == [
            "snapshot_00000.blk", "snapshot_00001.blk", "snapshot_00002.blk"]
        energy = read_series(out / "energy.csv")
        assert energy.columns["t"] == pytest.approx([0.0, 0.25, 0.5])

        main(["--config", config_file, "--out", str(out), "modulation"])
        track = read_series(out / "track.csv")
        assert track.columns["t"] == pytest.approx([0.0, 0.25, 0.5])
        assert max(abs(v) for v in track.columns["gamma_sup"]) <= 1e-5
        manifest = yaml.safe_load((out / "manifest.yaml").read_text(encoding="utf-8"))
        assert manifest["snapshot_source"] == str(out / "snapshots")

    @pytest.mark.black_box
    def test_modulation_without_snapshots(self, tmp_path):
        config_file = write_config(tmp_path, QUIET_RUN)
        assert exit_code(["--config", config_file, "--out", str(tmp_path / "empty"), "modulation"]) == 5

    @pytest.mark.black_box
    def test_full_excludes_snapshots(self, tmp_path):
        assert exit_code(["--out", str(tmp_path), "modulation", "--full", "--snapshots", str(tmp_path)]) == 5

    @pytest.mark.black_box
    def test_spectrum(self, tmp_path):
        config_file = write_config(tmp_path, SPECTRUM_RUN)
        main(["--config", config_file, "--out", str(tmp_path), "spectrum", "--eta-max", "0.1", "--count", "9"])
        curve = read_series(tmp_path / "eigencurve.csv")
        assert curve.columns["eta"] == pytest.approx(np.linspace(-0.1, 0.1, 9).tolist())
        coefficients = yaml.safe_load((tmp_path / "coefficients.yaml").read_text(encoding="utf-8"))
        assert 0 < coefficients["eta0"] <= 0.1

    @pytest.mark.black_box
    def test_reduce(self, tmp_path, mocker):
        mocker.patch("benney_luke.helper.cli.resolve_coefficients",
                     return_value=(synthetic_coefficients(eta0=0.25), None))
        main(["--out", str(tmp_path), "reduce", "--length", "2000", "--n", "256", "--t-final", "200", "--dt", "2",
              "--record-every", "2", "--fit-start", "10"])
        record = read_series(tmp_path / "reduced.csv")
        assert record.columns["t"][0] == pytest.approx(0.0)
        assert record.columns["t"][-1] == pytest.approx(200.0)
        assert set(record.fits) == {"c_norm", "cy_norm"}


class TestExitCodes:
    """
    UNIT TESTS: mapping of failures to exit status

    PURPOSE: Check every branch of the error handling in main
    TESTING TYPE: White-box unit testing
    """

    @pytest.mark.white_box
    @pytest.mark.parametrize("error, expected", [
        (BLError(Code.E0601), 5),
        (BLError(Code.E0302), 4),
        (ValueError("bad value"), 3),
        (RuntimeError("boom"), 1),
        (KeyboardInterrupt(), 130),
    ])
    def test_error_mapping(self, mocker, tmp_path, error, expected):
        mocker.patch.object(SolitonCommand, "execute", side_effect=error)
        assert exit_code(["--out", str(tmp_path), "soliton"]) == expected

    @pytest.mark.white_box
    def test_stage_is_reported(self, mocker, tmp_path):
        failure = BLError(Code.E0802, meta={"stage": "evolve"})
        mocker.patch("benney_luke.helper.cli.run_experiment", side_effect=failure)
        spy = mocker.spy(cli.run_logger, "error")
        assert exit_code(["--out", str(tmp_path), "modulation"]) == 4
        assert "stage 'evolve'" in spy.call_args.args[0]
