"""Binary field snapshots and append-only experiment records.

Snapshot format (little-endian):
    magic   4 bytes  b"YMK1"
    n       u32      sites per axis
    group   u32      1 = su2, 2 = so3, 3 = u1
    code    u32      degree/bidegree: k in 0..4 for real k-forms
                     (connections use 1), 16 + 4p + q for (p,q)-forms
    count   u32      number of float64 values that follow
    data    f64[]    components in lexicographic (site, multi-index,
                     generator) order; complex fields store the real
                     generators first, then the imaginary ones, per
                     (site, multi-index) cell

Experiment records are JSON objects, one per line, append-only.  The
run id is a digest of the command and its full echoed configuration, so
repeated runs with identical config produce byte-identical payloads
(the timestamp field is the only run-varying part).
"""
from __future__ import annotations

import hashlib
import json
import struct
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from .algebra import GROUPS_BY_TAG, GroupKind
from .errors import UsageError
from .gauge import Connection
from .lattice import NCOMP, PQ_COMPONENTS, LatticeForm, PQForm, Torus4

MAGIC = b"YMK1"

_HEADER = struct.Struct("<4sIIII")


def _pq_code(p: int, q: int) -> int:
    return 16 + 4 * p + q


def _site_major(values: np.ndarray) -> np.ndarray:
    """(ncomp, n,n,n,n, dim) -> flat (site, multi-index, generator) order."""
    return np.moveaxis(values, 0, 4).ravel()


def _site_major_inverse(flat: np.ndarray, ncomp: int, n: int, dim: int) -> np.ndarray:
    arr = flat.reshape(n, n, n, n, ncomp, dim)
    return np.moveaxis(arr, 4, 0)


def write_snapshot(path, obj) -> None:
    """Write a LatticeForm, PQForm, or Connection; round trip is bit exact."""
    if isinstance(obj, Connection):
        obj = obj.one_form()
    if isinstance(obj, LatticeForm):
        code = obj.degree
        data = _site_major(obj.values).astype("<f8")
    elif isinstance(obj, PQForm):
        code = _pq_code(obj.p, obj.q)
        stacked = np.concatenate([obj.values.real, obj.values.imag], axis=-1)
        data = _site_major(stacked).astype("<f8")
    else:
        raise UsageError(f"cannot snapshot {type(obj).__name__}")
    header = _HEADER.pack(MAGIC, obj.grid.n, obj.group.tag, code, data.size)
    with open(path, "wb") as fh:
        fh.write(header)
        fh.write(data.tobytes())


def read_snapshot(path):
    """Read a snapshot back into a LatticeForm, PQForm, or Connection."""
    raw = Path(path).read_bytes()
    magic, n, gtag, code, count = _HEADER.unpack_from(raw, 0)
    if magic != MAGIC:
        raise UsageError(f"bad snapshot magic {magic!r}")
    try:
        g: GroupKind = GROUPS_BY_TAG[gtag]
    except KeyError:
        raise UsageError(f"unknown group tag {gtag}")
    data = np.frombuffer(raw, dtype="<f8", offset=_HEADER.size, count=count)
    grid = Torus4(n)
    if code < 16:
        ncomp = NCOMP[code]
        values = _site_major_inverse(data.copy(), ncomp, n, g.dim)
        return LatticeForm(grid, g, code, values)
    p, q = divmod(code - 16, 4)
    ncomp = len(PQ_COMPONENTS[(p, q)])
    stacked = _site_major_inverse(data.copy(), ncomp, n, 2 * g.dim)
    values = stacked[..., : g.dim] + 1j * stacked[..., g.dim:]
    return PQForm(grid, g, p, q, values)


def read_connection(path) -> Connection:
    form = read_snapshot(path)
    if not isinstance(form, LatticeForm) or form.degree != 1:
        raise UsageError("snapshot does not hold a connection 1-form")
    return Connection(form.grid, form.group, form.values)


# ---------------------------------------------------------------------------
# experiment records

def jsonable(obj):
    """Recursively convert numpy scalars/arrays to plain JSON values."""
    if isinstance(obj, dict):
        return {k: jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [jsonable(v) for v in obj]
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    if isinstance(obj, np.ndarray):
        return [jsonable(v) for v in obj.tolist()]
    if isinstance(obj, float) and (np.isnan(obj) or np.isinf(obj)):
        return repr(obj)
    return obj


def run_id(command: str, config: dict) -> str:
    blob = json.dumps({"command": command, "config": jsonable(config)}, sort_keys=True)
    return hashlib.sha256(blob.encode()).hexdigest()[:16]


def make_record(command: str, config: dict, payload: dict, status: str = "ok") -> dict:
    return {
        "run_id": run_id(command, config),
        "timestamp_utc": datetime.now(timezone.utc).isoformat(),
        "command": command,
        "config": jsonable(config),
        "payload": jsonable(payload),
        "status": status,
    }


def append_record(path, record: dict) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "a", encoding="utf-8") as fh:
        fh.write(json.dumps(record, sort_keys=True) + "\n")


def payload_bytes(record: dict) -> bytes:
    """Canonical bytes of the run-invariant part of a record."""
    core = {k: record[k] for k in ("run_id", "command", "config", "payload", "status")}
    return json.dumps(core, sort_keys=True).encode()
