"""Grid-function and table serialization (CSV and raw little-endian float64)."""
from __future__ import annotations

import csv
import struct
from pathlib import Path

import numpy as np

_MAGIC = b"WLGF"
_HEADER = struct.Struct("<4sII")


def fmt(v) -> str:
    """Full-precision text for a number (17 significant digits for floats)."""
    if isinstance(v, (bool, np.bool_)):
        return str(int(v))
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return "%.17g" % float(v)
    return str(v)


def write_csv(path, header, rows) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as fh:
        out = csv.writer(fh, lineterminator="\r\n")
        out.writerow(header)
        for row in rows:
            out.writerow([fmt(v) for v in row])


def save_grid_csv(path, f: np.ndarray) -> None:
    d = f.ndim
    header = [f"i{j}" for j in range(d)] + ["value"]
    rows = (list(idx) + [f[idx]] for idx in np.ndindex(*f.shape))
    write_csv(path, header, rows)


def load_grid_csv(path) -> np.ndarray:
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        d = len(header) - 1
        recs = [(tuple(int(v) for v in r[:d]), float(r[d])) for r in reader if r]
    N = round(len(recs) ** (1.0 / d))
    if N**d != len(recs):
        raise ValueError(f"{len(recs)} rows is not N^{d}")
    f = np.empty((N,) * d)
    for idx, v in recs:
        f[idx] = v
    return f


def save_grid_raw(path, f: np.ndarray) -> None:
    f = np.ascontiguousarray(f, dtype="<f8")
    with open(path, "wb") as fh:
        fh.write(_HEADER.pack(_MAGIC, f.ndim, f.shape[0]))
        fh.write(f.tobytes(order="C"))


def load_grid_raw(path) -> np.ndarray:
    data = Path(path).read_bytes()
    magic, d, N = _HEADER.unpack_from(data)
    if magic != _MAGIC:
        raise ValueError(f"{path}: not a grid-function file")
    body = np.frombuffer(data, dtype="<f8", offset=_HEADER.size)
    if body.size != N**d:
        raise ValueError(f"{path}: expected {N**d} values, found {body.size}")
    return body.reshape((N,) * d).astype(float)
