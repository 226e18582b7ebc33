import numpy as np
import pandas as pd
import pytest
from benney_luke.common.error import BLError, Code
from benney_luke.lab.export import SeriesRecord, export_series, fits_path, read_series
from benney_luke.lab.fitting import fit_decay_exponent


class TestExportSeries:
    """
    UNIT TESTS: CSV writing of named series

    PURPOSE: Check the header format, quoting and the fit sidecar
    TESTING TYPE: Black-box unit testing
    """

    @pytest.mark.black_box
    def test_empty_record_is_header_only(self, tmp_path):
        record = SeriesRecord(name="empty", columns={"t": [], "E": []}, units={"t": "time"})
        path = export_series(record, tmp_path / "empty.csv")
        assert path.read_text(encoding="ascii") == "t (time),E\n"

    @pytest.mark.black_box
    def test_header_is_quoted_when_needed(self, tmp_path):
        record = SeriesRecord(name="q", columns={"a,b": [1.5], "c": [2.0]})
        path = export_series(record, tmp_path / "q.csv")
        assert path.read_text(encoding="ascii").splitlines()[0] == '"a,b",c'
        assert list(read_series(path).columns) == ["a,b", "c"]

    @pytest.mark.black_box
    @pytest.mark.parametrize("name", ["γ_sup", "c̃"])
    def test_non_ascii_header_rejected(self, tmp_path, name):
        with pytest.raises(BLError) as err:
            export_series(SeriesRecord(name="u", columns={name: [1.0]}), tmp_path / "u.csv")
        assert err.value.code == Code.E0606
        assert not (tmp_path / "u.csv").exists()

    @pytest.mark.black_box
    def test_non_ascii_unit_rejected(self, tmp_path):
        record = SeriesRecord(name="u", columns={"t": [1.0]}, units={"t": "µs"})
        with pytest.raises(BLError) as err:
            export_series(record, tmp_path / "u.csv")
        assert err.value.code == Code.E0606

    @pytest.mark.black_box
    def test_malformed_records(self, tmp_path):
        for record in (SeriesRecord(name="none"), SeriesRecord(name="ragged", columns={"a": [1.0], "b": []})):
            with pytest.raises(BLError) as err:
                export_series(record, tmp_path / f"{record.name}.csv")
            assert err.value.code == Code.E0606
        with pytest.raises(BLError) as err:
            export_series(SeriesRecord(name="x", columns={"a": [1.0]}), tmp_path / "x.json", format="json")
        assert err.value.code == Code.E0606

    @pytest.mark.black_box
    def test_fits_sidecar(self, tmp_path):
        t = np.logspace(0, 3, 50)
        fit = fit_decay_exponent(t, t ** -0.25)
        record = SeriesRecord(name="track", columns={"t": t.tolist(), "c_norm": (t ** -0.25).tolist()},
                              fits={"c_norm": fit})
        path = export_series(record, tmp_path / "track.csv")
        assert fits_path(path).name == "track.fits.yaml"
        back = read_series(path)
        assert back.fits["c_norm"] == fit

    @pytest.mark.black_box
    def test_io_failure(self, tmp_path):
        blocker = tmp_path / "file"
        blocker.write_text("x")
        with pytest.raises(BLError) as err:
            export_series(SeriesRecord(name="x", columns={"a": [1.0]}), blocker / "x.csv")
        assert err.value.code == Code.E0605


class TestReadSeries:
    """
    UNIT TESTS: CSV reading back into a SeriesRecord

    PURPOSE: Verify bitwise float round trips, units and missing files
    TESTING TYPE: Black-box unit testing
    """

    @pytest.mark.black_box
    def test_bitwise_round_trip(self, tmp_path, rng):
        values = np.concatenate([rng.normal(size=200) * 10.0 ** rng.integers(-300, 300, size=200),
                                 [0.1, 1.0 / 3.0, np.pi, 5e-324, 1.7976931348623157e308, 1.0, 2.0]])
        record = SeriesRecord(name="r", columns={"t": np.arange(values.size, dtype=float).tolist(),
                                                 "v": values.tolist()}, units={"v": "m/s"})
        back = read_series(export_series(record, tmp_path / "r.csv"))
        got = np.asarray(back.columns["v"])
        assert np.array_equal(got.view(np.int64), values.view(np.int64)), "values must survive bitwise"
        assert back.units == {"v": "m/s"}
        assert back.name == "r"

    @pytest.mark.black_box
    def test_non_finite_values(self, tmp_path):
        record = SeriesRecord(name="nf", columns={"v": [float("nan"), float("inf"), -float("inf")]})
        got = read_series(export_series(record, tmp_path / "nf.csv")).columns["v"]
        assert np.isnan(got[0]) and got[1] == np.inf and got[2] == -np.inf

    @pytest.mark.black_box
    def test_header_only_reads_empty(self, tmp_path):
        path = export_series(SeriesRecord(name="e", columns={"t": []}, units={"t": "time"}), tmp_path / "e.csv")
        back = read_series(path)
        assert back.columns == {"t": []} and back.units == {"t": "time"}

    @pytest.mark.black_box
    def test_missing_file(self, tmp_path):
        with pytest.raises(BLError) as err:
            read_series(tmp_path / "absent.csv")
        assert err.value.code == Code.E0605

    @pytest.mark.white_box
    def test_frame_conversion(self):
        frame = pd.DataFrame({"t": [0.0, 1.0], "flag": [True, False]})
        record = SeriesRecord.from_frame("f", frame, {"t": "time"})
        assert record.columns == {"t": [0.0, 1.0], "flag": [1.0, 0.0]}
        assert record.headers() == ["t (time)", "flag"]
