import numpy as np
import pytest

from ymkahler.algebra import SU2, U1
from ymkahler.errors import NearReducible
from ymkahler.gauge import Connection, covariant_laplace0, dbar_laplace02, random_connection
from ymkahler.lattice import Torus4
from ymkahler.spectral import (
    SpectralConfig,
    continuity_sweep,
    dense_lambda,
    dense_mu_unconstrained,
    dense_solve_laplace,
    lambda_A,
    mu_A,
    mu_unconstrained,
    solve_laplace,
)

CFG = SpectralConfig(restarts=3)


# --- solve_laplace -----------------------------------------------------------

def test_solve_zero_rhs():
    A = random_connection(Torus4(4), SU2, 7, 0.3)
    s = solve_laplace(A, np.zeros((4, 4, 4, 4, 3)), CFG, lam=0.05)
    assert np.max(np.abs(s)) == 0.0


def test_solve_consistency_with_known_field():
    grid = Torus4(4)
    A = random_connection(grid, SU2, 7, 0.3)
    rng = np.random.default_rng(1)
    w = rng.standard_normal((*grid.shape, 3))
    f = covariant_laplace0(A, w)
    lam = lambda_A(A, CFG).value
    s = solve_laplace(A, f, CFG, lam=lam)
    # solution is unique up to solver tolerance (lambda > 0)
    assert np.max(np.abs(s - w)) <= 1e-6 * np.max(np.abs(w))


def test_solve_matches_dense_oracle():
    grid = Torus4(3)
    A = random_connection(grid, SU2, 7, 0.3)
    rng = np.random.default_rng(2)
    f = covariant_laplace0(A, rng.standard_normal((*grid.shape, 3)))
    lam = lambda_A(A, CFG).value
    s = solve_laplace(A, f, CFG, lam=lam)
    s_dense = dense_solve_laplace(A, f)
    assert np.max(np.abs(s - s_dense)) <= 1e-8 * max(np.max(np.abs(s_dense)), 1.0)


def test_solve_near_reducible_raises():
    A = random_connection(Torus4(4), U1, 3, 0.2)
    with pytest.raises(NearReducible):
        solve_laplace(A, np.ones((4, 4, 4, 4, 1)), CFG)


# --- lambda ------------------------------------------------------------------

def test_lambda_zero_connection_su2():
    res = lambda_A(Connection.zero(Torus4(4), SU2), CFG)
    assert abs(res.value) <= 1e-10


def test_lambda_u1_always_zero():
    res = lambda_A(random_connection(Torus4(4), U1, 5, 0.4), CFG)
    assert abs(res.value) <= 1e-10


def test_lambda_matches_dense_oracle():
    grid = Torus4(3)
    for seed in (7, 1, 2):
        A = random_connection(grid, SU2, seed, 0.3)
        it = lambda_A(A, CFG)
        dense = dense_lambda(A)
        assert abs(it.value - dense) <= 1e-8 * abs(dense)
        assert it.residual <= CFG.tol * max(1.0, it.value)


def test_lambda_rayleigh_certificate():
    grid = Torus4(4)
    A = random_connection(grid, SU2, 9, 0.3)
    res = lambda_A(A, CFG)
    v = res.witness
    vw = grid.volume_weight
    rq = (vw * np.sum(covariant_laplace0(A, v) * v)) / (vw * np.sum(v * v))
    assert abs(rq - res.value) <= CFG.tol * max(1.0, res.value) * 10
    rng = np.random.default_rng(10)
    for _ in range(100):
        p = rng.standard_normal(v.shape)
        rq_probe = np.sum(covariant_laplace0(A, p) * p) / np.sum(p * p)
        assert res.value <= rq_probe + 1e-10


def test_rayleigh_quotient_scale_invariance():
    """Rescaling the coefficient metric rescales numerator and denominator
    alike: the reported eigenvalues are ratio-invariant."""
    grid = Torus4(4)
    A = random_connection(grid, SU2, 11, 0.3)
    res = lambda_A(A, CFG)
    v = res.witness
    for c in (1e-3, 1.0, 1e6):
        num = np.sum(covariant_laplace0(A, v) * v) * c
        den = np.sum(v * v) * c
        assert abs(num / den - res.value) <= 1e-8 * max(1.0, res.value)


# --- mu ----------------------------------------------------------------------

def test_mu_zero_connection():
    res = mu_A(Connection.zero(Torus4(3), SU2), CFG)
    assert abs(res.unconstrained.value) <= 1e-10
    assert abs(res.constrained.value) <= 1e-10


def test_mu_constrained_dominates_unconstrained():
    A = random_connection(Torus4(3), SU2, 7, 0.3)
    res = mu_A(A, CFG)
    assert res.constrained.value >= res.unconstrained.value - 1e-10


def test_mu_unconstrained_matches_dense():
    grid = Torus4(3)
    for seed in (7, 1):
        A = random_connection(grid, SU2, seed, 0.3)
        it = mu_unconstrained(A, CFG)
        dense = dense_mu_unconstrained(A)
        assert abs(it.value - dense) <= 1e-8 * abs(dense)


def test_mu_restart_stability():
    A = random_connection(Torus4(3), SU2, 7, 0.3)
    r1 = mu_A(A, SpectralConfig(restarts=3, seed=0))
    r2 = mu_A(A, SpectralConfig(restarts=3, seed=99))
    assert abs(r1.constrained.value - r2.constrained.value) <= 1e-6


def test_mu_witness_is_rank_one():
    from ymkahler.diagnostics import rank_one_check
    from ymkahler.lattice import PQForm
    A = random_connection(Torus4(3), SU2, 7, 0.3)
    res = mu_A(A, CFG)
    phi = PQForm(A.grid, A.group, 0, 2, res.constrained.witness[None])
    rep = rank_one_check(phi)
    assert rep["commutator_linf"] <= 1e-12
    assert rep["rank_profile"] == 1.0


def test_mu_u1_constraint_trivial():
    A = random_connection(Torus4(3), U1, 5, 0.3)
    res = mu_A(A, CFG)
    assert res.constrained.value == res.unconstrained.value


# --- continuity --------------------------------------------------------------

def test_continuity_sweep_zero_row_and_trend():
    grid = Torus4(3)
    cfg = SpectralConfig(restarts=2)
    base = random_connection(grid, SU2, 7, 0.35)
    direction = random_connection(grid, SU2, 101, 1.0).a
    amps = [0.0, 0.02, 0.05, 0.1]
    rows = continuity_sweep(base, direction, amps, cfg)
    assert [r["t"] for r in rows] == amps
    lam0 = lambda_A(base, cfg).value
    assert abs(rows[0]["lambda"] - lam0) <= 1e-7 * max(lam0, 1e-6)
    # eigenvalue deltas shrink towards t = 0
    dl = [abs(r["lambda"] - rows[0]["lambda"]) for r in rows[1:]]
    dm = [abs(r["mu"] - rows[0]["mu"]) for r in rows[1:]]
    assert dl[0] <= dl[-1] + 1e-9
    assert dm[0] <= dm[-1] + 1e-6


def test_continuity_rejects_unsorted():
    from ymkahler.errors import UsageError
    grid = Torus4(3)
    base = random_connection(grid, SU2, 7, 0.3)
    with pytest.raises(UsageError):
        continuity_sweep(base, base.a, [0.2, 0.1], CFG)
