"""CSV export of named time series.

Headers read ``name (unit)``, or just ``name`` when no unit is set, and
must be plain ASCII. Floats are written with 17 significant digits and
read back with pandas' round-trip parser, so values survive bitwise.
Fits attached to a record go to a YAML sidecar ``<stem>.fits.yaml``.
"""

import csv
import re
from pathlib import Path
from typing import Dict, List, Optional, Union
import numpy as np
import pandas as pd
import yaml
from pydantic import BaseModel, Field
from benney_luke.common.error import BLError, Code
from benney_luke.common.logging_config import internal_logger
from benney_luke.lab.fitting import DecayFit

FLOAT_FORMAT = "%.17g"
_HEADER = re.compile(r"^(?P<name>.*?) \((?P<unit>[^()]*)\)$")


class SeriesRecord(BaseModel):
    name: str
    columns: Dict[str, List[float]] = Field(default_factory=dict)
    units: Dict[str, str] = Field(default_factory=dict)
    fits: Dict[str, DecayFit] = Field(default_factory=dict)

    @classmethod
    def from_frame(cls, name: str, frame: pd.DataFrame, units: Optional[Dict[str, str]] = None) -> "SeriesRecord":
        columns = {str(col): frame[col].astype(float).tolist() for col in frame.columns}
        return cls(name=name, columns=columns, units=dict(units or {}))

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame({key: np.asarray(values, dtype=float) for key, values in self.columns.items()})

    def headers(self) -> List[str]:
        return [f"{key} ({self.units[key]})" if self.units.get(key) else key for key in self.columns]


def _check_record(record: SeriesRecord) -> None:
    if not record.columns:
        raise BLError(Code.E0606, message=f"series '{record.name}' has no columns")
    lengths = {key: len(values) for key, values in record.columns.items()}
    if len(set(lengths.values())) > 1:
        raise BLError(Code.E0606, message="columns have different lengths", details=lengths)
    for header in record.headers():
        if not header.isascii() or "\n" in header or "\r" in header:
            raise BLError(Code.E0606, message=f"header {header!r} is not single-line ASCII")


def fits_path(path: Union[str, Path]) -> Path:
    path = Path(path)
    return path.with_name(f"{path.stem}.fits.yaml")


def export_series(record: SeriesRecord, path: Union[str, Path], format: str = "csv") -> Path:  # pylint: disable=redefined-builtin
    """Write ``record`` to ``path``; an empty record gives a header-only file."""
    if format != "csv":
        raise BLError(Code.E0606, message=f"unsupported series format '{format}'")
    _check_record(record)
    path = Path(path)
    frame = record.to_frame()
    frame.columns = record.headers()
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        frame.to_csv(path, index=False, float_format=FLOAT_FORMAT, na_rep="nan",
                     quoting=csv.QUOTE_MINIMAL, lineterminator="\n", encoding="ascii")
        if record.fits:
            with open(fits_path(path), "w", encoding="utf-8") as f:
                yaml.safe_dump({key: fit.to_report() for key, fit in record.fits.items()}, f, sort_keys=False)
    except OSError as e:
        raise BLError(Code.E0605, message=f"Cannot write {path}: {e}", cause=e) from e
    internal_logger.debug(f"Wrote series '{record.name}' ({len(frame)} rows) to {path}")
    return path


def read_series(path: Union[str, Path]) -> SeriesRecord:
    path = Path(path)
    try:
        frame = pd.read_csv(path, float_precision="round_trip")
        fits = {}
        sidecar = fits_path(path)
        if sidecar.exists():
            with open(sidecar, "r", encoding="utf-8") as f:
                fits = {key: DecayFit(**value) for key, value in (yaml.safe_load(f) or {}).items()}
    except (OSError, pd.errors.ParserError, pd.errors.EmptyDataError) as e:
        raise BLError(Code.E0605, message=f"Cannot read {path}: {e}", cause=e) from e

    columns, units = {}, {}
    for header in frame.columns:
        match = _HEADER.match(str(header))
        key = match.group("name") if match else str(header)
        if match:
            units[key] = match.group("unit")
        columns[key] = frame[header].astype(float).tolist()
    return SeriesRecord(name=path.stem, columns=columns, units=units, fits=fits)
