"""BLK1 snapshot files.

Layout: magic ``BLK1``, u32 Nx, u32 Ny, f64 Lx, f64 Ly (little endian),
then one (Field2D) or two (FieldPair) row-major float64 payloads of
Nx*Ny values with x varying fastest. A pair stores the physical phi1,
background included.
"""

from pathlib import Path
from typing import Optional, Union
import numpy as np
from benney_luke.common.error import BLError, Code
from benney_luke.spectral.fields import Background, Field2D, FieldPair
from benney_luke.spectral.grid import Grid2D

MAGIC = b"BLK1"
HEADER = np.dtype([("magic", "S4"), ("nx", "<u4"), ("ny", "<u4"), ("lx", "<f8"), ("ly", "<f8")])


def _header(grid: Grid2D) -> bytes:
    header = np.zeros(1, dtype=HEADER)
    header[0] = (MAGIC, grid.nx, grid.ny, grid.lx, grid.ly)
    return header.tobytes()


def write_snapshot(path: Union[str, Path], data: Union[Field2D, FieldPair]) -> Path:
    target = Path(path)
    if isinstance(data, FieldPair):
        payloads = [data.physical_phi1(), data.phi2.values]
    else:
        payloads = [data.values]
    try:
        target.parent.mkdir(parents=True, exist_ok=True)
        with open(target, "wb") as f:
            f.write(_header(data.grid))
            for payload in payloads:
                f.write(np.ascontiguousarray(payload, dtype="<f8").tobytes())
    except OSError as e:
        raise BLError(Code.E0605, message=f"Cannot write snapshot {target}: {e}", cause=e) from e
    return target


def read_snapshot(path: Union[str, Path], background: Optional[Background] = None) -> Union[Field2D, FieldPair]:
    """
    Read a snapshot. Two payloads give a FieldPair; when ``background`` is
    given it is subtracted from the stored phi1 and attached to the pair.
    """
    source = Path(path)
    try:
        raw = source.read_bytes()
    except OSError as e:
        raise BLError(Code.E0605, message=f"Cannot read snapshot {source}: {e}", cause=e) from e
    if len(raw) < HEADER.itemsize:
        raise BLError(Code.E0603, message=f"{source} is shorter than a BLK1 header")
    header = np.frombuffer(raw[:HEADER.itemsize], dtype=HEADER)[0]
    if bytes(header["magic"]) != MAGIC:
        raise BLError(Code.E0603, message=f"{source} does not start with {MAGIC!r}")
    grid = Grid2D(lx=float(header["lx"]), ly=float(header["ly"]), nx=int(header["nx"]), ny=int(header["ny"]))
    body = raw[HEADER.itemsize:]
    payload_bytes = grid.nx * grid.ny * 8
    count, rest = divmod(len(body), payload_bytes)
    if rest or count not in (1, 2):
        raise BLError(Code.E0604, details={"bytes": len(body), "payload_bytes": payload_bytes})
    arrays = np.frombuffer(body, dtype="<f8").reshape(count, grid.ny, grid.nx).astype(np.float64)
    if count == 1:
        return Field2D(grid=grid, values=arrays[0])
    phi1 = arrays[0]
    if background is not None:
        phi1 = phi1 - np.asarray(background.sample(grid.x, 0)).reshape(1, -1)
    return FieldPair.from_arrays(grid, phi1, arrays[1], background)
