import json

import numpy as np
import pytest

from ymkahler.algebra import SU2, U1
from ymkahler.errors import UsageError
from ymkahler.gauge import random_connection
from ymkahler.io import (
    append_record,
    jsonable,
    make_record,
    payload_bytes,
    read_connection,
    read_snapshot,
    run_id,
    write_snapshot,
)
from ymkahler.lattice import LatticeForm, PQForm, Torus4

GRID = Torus4(4)


def test_connection_snapshot_bit_exact(tmp_path):
    A = random_connection(GRID, SU2, 7, 0.3)
    path = tmp_path / "a.ymk"
    write_snapshot(path, A)
    back = read_connection(path)
    assert np.array_equal(back.a, A.a)
    assert back.group is SU2 and back.grid.n == 4


@pytest.mark.parametrize("degree", [0, 1, 2, 3, 4])
def test_form_snapshot_roundtrip(tmp_path, degree):
    from ymkahler.lattice import NCOMP
    rng = np.random.default_rng(degree)
    form = LatticeForm(GRID, U1, degree, rng.standard_normal((NCOMP[degree], *GRID.shape, 1)))
    path = tmp_path / "f.ymk"
    write_snapshot(path, form)
    back = read_snapshot(path)
    assert isinstance(back, LatticeForm)
    assert back.degree == degree
    assert np.array_equal(back.values, form.values)


@pytest.mark.parametrize("pq", [(0, 1), (0, 2), (1, 1), (2, 0)])
def test_pq_snapshot_roundtrip(tmp_path, pq):
    from ymkahler.lattice import PQ_COMPONENTS
    rng = np.random.default_rng(10)
    ncomp = len(PQ_COMPONENTS[pq])
    vals = rng.standard_normal((ncomp, *GRID.shape, 3)) + 1j * rng.standard_normal(
        (ncomp, *GRID.shape, 3))
    form = PQForm(GRID, SU2, pq[0], pq[1], vals)
    path = tmp_path / "pq.ymk"
    write_snapshot(path, form)
    back = read_snapshot(path)
    assert isinstance(back, PQForm)
    assert (back.p, back.q) == pq
    assert np.array_equal(back.values, form.values)


def test_snapshot_header_layout(tmp_path):
    A = random_connection(GRID, SU2, 7, 0.3)
    path = tmp_path / "a.ymk"
    write_snapshot(path, A)
    raw = path.read_bytes()
    assert raw[:4] == b"YMK1"
    n, gtag, code, count = np.frombuffer(raw[4:20], dtype="<u4")
    assert (n, gtag, code) == (4, 1, 1)
    assert count == 4 * 4 ** 4 * 3
    assert len(raw) == 20 + 8 * count


def test_snapshot_bad_magic(tmp_path):
    path = tmp_path / "bad.ymk"
    path.write_bytes(b"NOPE" + b"\x00" * 32)
    with pytest.raises(UsageError):
        read_snapshot(path)


def test_record_payload_deterministic(tmp_path):
    cfg = {"grid.n": 4, "seed": 7, "amplitude": 0.1}
    payload = {"value": np.float64(1.25), "trace": [np.float64(1.0), np.float64(0.5)]}
    r1 = make_record("spectrum", cfg, payload)
    r2 = make_record("spectrum", cfg, payload)
    assert payload_bytes(r1) == payload_bytes(r2)
    assert r1["run_id"] == r2["run_id"] == run_id("spectrum", cfg)
    # a different config gives a different id
    assert run_id("spectrum", {**cfg, "seed": 8}) != r1["run_id"]


def test_records_append_jsonl(tmp_path):
    path = tmp_path / "out" / "records.jsonl"
    for k in range(3):
        append_record(path, make_record("flow", {"seed": k}, {"steps": k}))
    lines = path.read_text().strip().splitlines()
    assert len(lines) == 3
    rows = [json.loads(line) for line in lines]
    assert [r["payload"]["steps"] for r in rows] == [0, 1, 2]
    assert all("timestamp_utc" in r and "config" in r for r in rows)


def test_jsonable_handles_numpy_and_nan():
    out = jsonable({"a": np.int64(3), "b": np.array([1.0, 2.0]), "c": float("nan")})
    assert out == {"a": 3, "b": [1.0, 2.0], "c": "nan"}
