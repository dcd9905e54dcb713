"""File formats: transmission maps, mode lists, mismatch curves, field grids, reports.

Every writer goes through a temporary file in the target directory followed by
``os.replace``, so readers never see a half-written file.
"""

from __future__ import annotations

import csv
import json
import os
import struct
import tempfile
from contextlib import contextmanager
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .coupled_modes import TransmissionMap

MAP_CSV_HEADER = ("b_tesla", "f_hz", "s21_db")
MODES_CSV_HEADER = ("family", "ell", "q", "freq_hz", "q_rad")
DELTA_F_CSV_HEADER = ("epsilon", "delta_f_hz")
TRACE_CSV_HEADER = ("f_hz", "s21_db")
FIELD_CSV_HEADER = ("r_m", "theta_rad", "phi_rad", "re", "im")

MAP_MAGIC = b"MAGPMAP\x00"
MAP_VERSION = 1
_FLAG_COMPLEX = 1
# magic, version, flags, n_b, n_f, meta length
_HEADER = struct.Struct("<8sIIQQI")


class FormatError(ValueError):
    """A file does not follow the expected layout."""


def _fmt(x: float) -> str:
    # repr is the shortest string that round-trips a double
    return repr(float(x))


@contextmanager
def atomic_write(path, mode: str = "w"):
    """Open a temporary sibling of ``path`` and move it into place on success."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(prefix=f".{path.name}.", suffix=".tmp", dir=path.parent)
    try:
        kwargs = {"newline": ""} if "b" not in mode else {}
        with os.fdopen(fd, mode, **kwargs) as fh:
            yield fh
            fh.flush()
            os.fsync(fh.fileno())
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _check_header(row, expected, path) -> None:
    if tuple(c.strip() for c in row) != expected:
        raise FormatError(f"{path}: expected header {','.join(expected)}, got {','.join(row)}")


# ---------------------------------------------------------------- maps

def write_map_csv(path, tmap: TransmissionMap) -> None:
    """One row per grid point, field-major, magnitude in dB."""
    db = tmap.db()
    with atomic_write(path) as fh:
        fh.write(",".join(MAP_CSV_HEADER) + "\n")
        f_txt = [_fmt(f) for f in tmap.f_axis]
        for i, b in enumerate(tmap.b_axis):
            bt = _fmt(b)
            fh.write("".join(f"{bt},{ft},{_fmt(v)}\n" for ft, v in zip(f_txt, db[i])))


def read_map_csv(path) -> TransmissionMap:
    path = Path(path)
    with open(path, newline="") as fh:
        header = fh.readline().strip().split(",")
        _check_header(header, MAP_CSV_HEADER, path)
        try:
            data = np.loadtxt(fh, delimiter=",", dtype=float, ndmin=2)
        except ValueError as exc:
            raise FormatError(f"{path}: {exc}") from None
    if data.size == 0:
        raise FormatError(f"{path}: no data rows")
    if data.shape[1] != 3:
        raise FormatError(f"{path}: expected 3 columns, got {data.shape[1]}")
    b_col, f_col = data[:, 0], data[:, 1]
    starts = np.concatenate([[0], np.nonzero(np.diff(b_col) != 0)[0] + 1])
    n_b = starts.size
    if data.shape[0] % n_b:
        raise FormatError(f"{path}: rows do not form a complete grid")
    n_f = data.shape[0] // n_b
    if np.any(np.diff(starts) != n_f):
        raise FormatError(f"{path}: rows do not form a complete grid")
    grid_f = f_col.reshape(n_b, n_f)
    if np.any(grid_f != grid_f[0]):
        raise FormatError(f"{path}: frequency axis differs between field columns")
    b_axis = b_col[starts]
    values = data[:, 2].reshape(n_b, n_f)
    try:
        return TransmissionMap(b_axis, grid_f[0].copy(), values, {"source": str(path)})
    except ValueError as exc:
        raise FormatError(f"{path}: {exc}") from None


def write_map_bin(path, tmap: TransmissionMap) -> None:
    """Compact little-endian layout; see the README for the byte map."""
    cplx = tmap.is_complex
    meta = json.dumps(tmap.meta, sort_keys=True).encode()
    values = np.ascontiguousarray(tmap.values, dtype="<c16" if cplx else "<f8")
    with atomic_write(path, "wb") as fh:
        fh.write(_HEADER.pack(MAP_MAGIC, MAP_VERSION, _FLAG_COMPLEX if cplx else 0,
                              tmap.b_axis.size, tmap.f_axis.size, len(meta)))
        fh.write(meta)
        fh.write(np.ascontiguousarray(tmap.b_axis, dtype="<f8").tobytes())
        fh.write(np.ascontiguousarray(tmap.f_axis, dtype="<f8").tobytes())
        fh.write(values.tobytes())


def read_map_bin(path) -> TransmissionMap:
    path = Path(path)
    raw = path.read_bytes()
    if len(raw) < _HEADER.size:
        raise FormatError(f"{path}: truncated header")
    magic, version, flags, n_b, n_f, n_meta = _HEADER.unpack_from(raw)
    if magic != MAP_MAGIC:
        raise FormatError(f"{path}: not a transmission map file")
    if version != MAP_VERSION:
        raise FormatError(f"{path}: unsupported version {version}")
    cplx = bool(flags & _FLAG_COMPLEX)
    item = 16 if cplx else 8
    expected = _HEADER.size + n_meta + 8 * (n_b + n_f) + item * n_b * n_f
    if len(raw) != expected:
        raise FormatError(f"{path}: size {len(raw)} does not match header ({expected})")
    pos = _HEADER.size
    meta = json.loads(raw[pos:pos + n_meta].decode()) if n_meta else {}
    pos += n_meta
    b_axis = np.frombuffer(raw, "<f8", n_b, pos).astype(float)
    pos += 8 * n_b
    f_axis = np.frombuffer(raw, "<f8", n_f, pos).astype(float)
    pos += 8 * n_f
    values = np.frombuffer(raw, "<c16" if cplx else "<f8", n_b * n_f, pos).reshape(n_b, n_f)
    return TransmissionMap(b_axis, f_axis, values.astype(complex if cplx else float), meta)


def write_map(path, tmap: TransmissionMap) -> None:
    """Binary when the suffix is ``.bin``, CSV otherwise."""
    (write_map_bin if Path(path).suffix == ".bin" else write_map_csv)(path, tmap)


def read_map(path) -> TransmissionMap:
    path = Path(path)
    with open(path, "rb") as fh:
        head = fh.read(len(MAP_MAGIC))
    return read_map_bin(path) if head == MAP_MAGIC else read_map_csv(path)


# ---------------------------------------------------------------- small tables

def write_table_csv(path, header, rows) -> None:
    with atomic_write(path) as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([_fmt(v) if isinstance(v, (float, np.floating)) else v for v in row])


def _read_rows(path, header) -> list[list[str]]:
    path = Path(path)
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows:
        raise FormatError(f"{path}: empty file")
    _check_header(rows[0], header, path)
    body = [r for r in rows[1:] if r]
    for k, r in enumerate(body, start=2):
        if len(r) != len(header):
            raise FormatError(f"{path}:{k}: expected {len(header)} fields, got {len(r)}")
    return body


@dataclass(frozen=True)
class ModeRow:
    family: str
    ell: int
    q: int
    freq_hz: float
    q_rad: float


def write_modes_csv(path, modes) -> None:
    write_table_csv(path, MODES_CSV_HEADER,
                ((m.id.family, m.id.ell, m.id.q, float(m.freq), float(m.q_rad)) for m in modes))


def read_modes_csv(path) -> list[ModeRow]:
    try:
        return [ModeRow(r[0], int(r[1]), int(r[2]), float(r[3]), float(r[4]))
                for r in _read_rows(path, MODES_CSV_HEADER)]
    except ValueError as exc:
        if isinstance(exc, FormatError):
            raise
        raise FormatError(f"{path}: {exc}") from None


def write_delta_f_csv(path, curve) -> None:
    write_table_csv(path, DELTA_F_CSV_HEADER, ((float(e), float(d)) for e, d in curve))


def read_delta_f_csv(path) -> list[tuple[float, float]]:
    try:
        return [(float(e), float(d)) for e, d in _read_rows(path, DELTA_F_CSV_HEADER)]
    except ValueError as exc:
        if isinstance(exc, FormatError):
            raise
        raise FormatError(f"{path}: {exc}") from None


def write_trace_csv(path, freq, db) -> None:
    write_table_csv(path, TRACE_CSV_HEADER, ((float(f), float(y)) for f, y in zip(freq, db)))


def read_trace_csv(path) -> tuple[np.ndarray, np.ndarray]:
    try:
        rows = _read_rows(path, TRACE_CSV_HEADER)
        data = np.array([[float(a), float(b)] for a, b in rows], dtype=float).reshape(-1, 2)
    except ValueError as exc:
        if isinstance(exc, FormatError):
            raise
        raise FormatError(f"{path}: {exc}") from None
    return data[:, 0], data[:, 1]


FIELD_COMPONENTS = ("E_r", "E_theta", "E_phi", "H_r", "H_theta", "H_phi")


def write_field_grid(prefix, r, theta, phi, e_field, h_field) -> list[Path]:
    """One CSV per spherical component, named ``<prefix>_<component>.csv``.

    ``r``, ``theta``, ``phi`` are broadcast-compatible coordinate arrays and
    ``e_field``/``h_field`` have a leading axis of length 3.
    """
    r, theta, phi = np.broadcast_arrays(*(np.asarray(a, dtype=float) for a in (r, theta, phi)))
    coords = [a.ravel() for a in (r, theta, phi)]
    comps = list(np.asarray(e_field)) + list(np.asarray(h_field))
    paths = []
    for name, comp in zip(FIELD_COMPONENTS, comps):
        c = np.broadcast_to(comp, r.shape).ravel()
        p = Path(f"{prefix}_{name}.csv")
        write_table_csv(p, FIELD_CSV_HEADER,
                    ((a, b, d, float(v.real), float(v.imag)) for a, b, d, v in zip(*coords, c)))
        paths.append(p)
    return paths


def read_field_grid(path) -> tuple[np.ndarray, np.ndarray]:
    """``(coords (n, 3), values (n,) complex)`` from one component file."""
    rows = np.array([[float(x) for x in r] for r in _read_rows(path, FIELD_CSV_HEADER)]).reshape(-1, 5)
    return rows[:, :3], rows[:, 3] + 1j * rows[:, 4]


# ---------------------------------------------------------------- reports

def _plain(obj):
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _plain(obj.tolist())
    if isinstance(obj, (np.floating, float)):
        v = float(obj)
        return v if np.isfinite(v) else None
    if isinstance(obj, np.integer):
        return int(obj)
    return obj


def dumps_report(report: dict) -> str:
    return json.dumps(_plain(report), indent=2, sort_keys=True, allow_nan=False) + "\n"


def write_report(path, report: dict) -> None:
    text = dumps_report(report)
    with atomic_write(path) as fh:
        fh.write(text)


def read_report(path) -> dict:
    path = Path(path)
    try:
        return json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise FormatError(f"{path}:{exc.lineno}: {exc.msg}") from None

