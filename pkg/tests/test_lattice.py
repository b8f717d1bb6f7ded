import numpy as np
import pytest

from ymkahler.algebra import SU2, U1
from ymkahler.errors import UnresolvableCutoff, UsageError
from ymkahler.lattice import (
    CutoffProfile,
    LatticeForm,
    PQForm,
    Torus4,
    cutoff_beta,
    exterior_d,
    exterior_d_star,
    hodge_star,
    hodge_star_inverse,
    l2_inner,
    l2_norm,
    lambda_omega,
    lomega,
    lp_norm,
    mollified_profile,
    omega_form,
    pq2_to_real,
    pq_conj_star,
    pq_decompose,
    radial_cutoff_norms,
    sd_asd_project,
    to_pq2,
)


def _rand_form(grid, g, degree, seed=0):
    from ymkahler.lattice import NCOMP
    rng = np.random.default_rng(seed)
    return LatticeForm(grid, g, degree, rng.standard_normal((NCOMP[degree], *grid.shape, g.dim)))


GRID = Torus4(4)


# --- Hodge star -----------------------------------------------------------

def test_star_e01_is_e23():
    u = LatticeForm.zero(GRID, SU2, 2)
    u.values[0, ..., 0] = 1.0  # e^{01} x e_1
    s = hodge_star(u)
    expected = LatticeForm.zero(GRID, SU2, 2)
    expected.values[5, ..., 0] = 1.0
    assert np.array_equal(s.values, expected.values)


def test_star_involution_on_2forms():
    u = _rand_form(GRID, SU2, 2, seed=1)
    assert np.array_equal(hodge_star(hodge_star(u)).values, u.values)


def test_star_of_one_is_volume():
    u = LatticeForm.zero(GRID, U1, 0)
    u.values[0] = 1.0
    s = hodge_star(u)
    assert s.degree == 4
    assert np.all(s.values == 1.0)


def test_star_inverse_on_odd_degree():
    u = _rand_form(GRID, SU2, 1, seed=2)
    v = hodge_star(u)
    assert np.allclose(hodge_star_inverse(v).values, u.values)


# --- SD/ASD ---------------------------------------------------------------

def test_omega_is_self_dual():
    w = omega_form(GRID, SU2)
    plus, minus = sd_asd_project(w)
    assert np.allclose(plus.values, w.values)
    assert np.max(np.abs(minus.values)) == 0.0


def test_antiselfdual_example():
    F = LatticeForm.zero(GRID, SU2, 2)
    F.values[0, ..., 0] = 1.0
    F.values[5, ..., 0] = -1.0  # e01 - e23
    plus, minus = sd_asd_project(F)
    assert np.max(np.abs(plus.values)) == 0.0
    assert np.allclose(minus.values, F.values)


def test_sd_asd_reassembly_and_orthogonality():
    F = _rand_form(GRID, SU2, 2, seed=3)
    plus, minus = sd_asd_project(F)
    assert np.max(np.abs((plus + minus - F).values)) <= 1e-14
    total = l2_norm(F) ** 2
    assert abs(total - l2_norm(plus) ** 2 - l2_norm(minus) ** 2) <= 1e-12 * total
    # eigenforms of the star, and idempotency
    assert np.max(np.abs((hodge_star(plus) - plus).values)) <= 1e-14
    assert np.max(np.abs((hodge_star(minus) + minus).values)) <= 1e-14
    plus2, _ = sd_asd_project(plus)
    assert np.max(np.abs((plus2 - plus).values)) == 0.0


# --- Kahler operators -----------------------------------------------------

def test_lambda_of_omega_tensor_is_twice():
    a = np.array([0.7, -0.2, 1.1])
    w = omega_form(GRID, SU2, a)
    tr = lambda_omega(w)
    assert np.allclose(tr.values[0], 2.0 * a)


def test_lambda_kills_asd():
    F = LatticeForm.zero(GRID, SU2, 2)
    F.values[0, ..., 1] = 1.0
    F.values[5, ..., 1] = -1.0
    assert np.max(np.abs(lambda_omega(F).values)) == 0.0


def test_lomega_lambda_adjoint():
    alpha = _rand_form(GRID, SU2, 2, seed=4)
    beta = _rand_form(GRID, SU2, 0, seed=5)
    lhs = l2_inner(lambda_omega(alpha), beta)
    rhs = l2_inner(alpha, lomega(beta))
    assert abs(lhs - rhs) <= 1e-12 * (abs(lhs) + 1.0)


def test_lambda_via_star_conjugation():
    alpha = _rand_form(GRID, SU2, 2, seed=6)
    direct = lambda_omega(alpha)
    via = hodge_star_inverse(lomega(hodge_star(alpha)))
    assert np.allclose(via.values, direct.values, atol=1e-13)


def test_omega_wedge_omega_is_twice_volume():
    w = omega_form(GRID, U1)
    top = lomega(w)
    assert np.allclose(top.values, 2.0)


def test_degree_guards():
    with pytest.raises(UsageError):
        lomega(_rand_form(GRID, SU2, 3, seed=7))
    with pytest.raises(UsageError):
        lambda_omega(_rand_form(GRID, SU2, 1, seed=8))


# --- (p,q) decomposition ---------------------------------------------------

def test_pq_of_omega_tensor():
    a = np.array([1.0, 2.0, -0.5])
    w = omega_form(GRID, SU2, a)
    f20, f110, trace, f02 = pq_decompose(w)
    assert np.max(np.abs(f20.values)) == 0.0
    assert np.max(np.abs(f02.values)) == 0.0
    assert np.max(np.abs(f110.values)) == 0.0
    assert np.allclose(trace.values[0], 2.0 * a)


def test_pq_reassembly_random():
    F = _rand_form(GRID, SU2, 2, seed=9)
    f20, f11, f02 = to_pq2(F)
    back = pq2_to_real(f20, f11, f02)
    scale = np.max(np.abs(F.values))
    assert np.max(np.abs(back.values - F.values)) <= 1e-12 * scale
    # Parseval across the splitting
    total = l2_norm(F) ** 2
    parts = l2_norm(f20) ** 2 + l2_norm(f11) ** 2 + l2_norm(f02) ** 2
    assert abs(total - parts) <= 1e-12 * total


def test_pq_decompose_trace_and_primitivity():
    F = _rand_form(GRID, SU2, 2, seed=10)
    f20, f110, trace, f02 = pq_decompose(F)
    assert np.allclose(trace.values, lambda_omega(F).values)
    # primitive part carries no omega-trace: rebuild as a real form and trace it
    zero20 = PQForm.zero(GRID, SU2, 2, 0)
    zero02 = PQForm.zero(GRID, SU2, 0, 2)
    real110 = pq2_to_real(zero20, f110, zero02)
    assert l2_norm(lambda_omega(real110)) <= 1e-12 * max(l2_norm(F), 1.0)


def test_reality_conjugate_relation():
    F = _rand_form(GRID, SU2, 2, seed=11)
    f20, _, f02 = to_pq2(F)
    minus_star = pq_conj_star(f02)
    assert np.allclose(minus_star.values, -f20.values)
    assert np.allclose(pq_conj_star(f20).values, -f02.values)


def test_fplus_two_ways():
    from ymkahler.lattice import pq02_to_real
    F = _rand_form(GRID, SU2, 2, seed=12)
    plus, _ = sd_asd_project(F)
    _, _, trace, f02 = pq_decompose(F)
    half_tr = omega_form(GRID, SU2, np.zeros(3))
    half_tr.values[0] = 0.5 * trace.values[0]
    half_tr.values[5] = 0.5 * trace.values[0]
    plus_pq = pq02_to_real(f02) + half_tr
    assert np.max(np.abs((plus_pq - plus).values)) <= 1e-12


# --- d and d* --------------------------------------------------------------

def test_d_constant_is_zero():
    u = LatticeForm.zero(GRID, SU2, 0)
    u.values[0, ..., 1] = 3.0
    assert np.max(np.abs(exterior_d(u).values)) == 0.0


def test_dd_zero():
    u0 = _rand_form(GRID, SU2, 0, seed=13)
    dd = exterior_d(exterior_d(u0))
    assert np.max(np.abs(dd.values)) <= 1e-12 * GRID.n
    u1 = _rand_form(GRID, SU2, 1, seed=14)
    dd1 = exterior_d(exterior_d(u1))
    assert np.max(np.abs(dd1.values)) <= 1e-11 * GRID.n


@pytest.mark.parametrize("deg", [0, 1, 2, 3])
def test_d_adjointness(deg):
    u = _rand_form(GRID, SU2, deg, seed=20 + deg)
    v = _rand_form(GRID, SU2, deg + 1, seed=30 + deg)
    lhs = l2_inner(exterior_d(u), v)
    rhs = l2_inner(u, exterior_d_star(v))
    assert abs(lhs - rhs) <= 1e-12 * (abs(lhs) + abs(rhs) + 1.0)


# --- norms ------------------------------------------------------------------

def test_lp_norm_zero_and_constant():
    z = LatticeForm.zero(GRID, SU2, 1)
    assert lp_norm(z, 2) == 0.0
    u = LatticeForm.zero(GRID, U1, 0)
    u.values[0] = 2.5
    for p in (1.0, 2.0, 4.0):
        assert abs(lp_norm(u, p) - 2.5) <= 1e-12  # unit volume
    assert lp_norm(u, np.inf) == 2.5


def test_l2_norm_matches_inner():
    u = _rand_form(GRID, SU2, 2, seed=15)
    assert abs(lp_norm(u, 2) ** 2 - l2_inner(u, u)) <= 1e-10


def test_lp_norm_rejects_small_p():
    with pytest.raises(UsageError):
        lp_norm(_rand_form(GRID, SU2, 0, seed=16), 0.5)


# --- cutoff -----------------------------------------------------------------

def test_cutoff_plateau_and_support():
    p = CutoffProfile(ratio=4.0, radius=0.25)
    r, b = mollified_profile(p)
    assert np.all(b[r <= p.radius / p.ratio] >= 1 - 1e-12)
    assert np.all(b[r >= p.radius] <= 1e-12)
    assert b.min() >= -1e-12 and b.max() <= 1 + 1e-12


def test_cutoff_beta_values_on_lattice():
    grid = Torus4(16)
    p = CutoffProfile(ratio=2.0, radius=0.25)
    form, rep = cutoff_beta(grid, p, center=(0.5, 0.5, 0.5, 0.5))
    b = form.values[0, ..., 0]
    assert abs(b[8, 8, 8, 8] - 1.0) <= 1e-12     # center
    assert abs(b[0, 0, 0, 0]) <= 1e-12            # distance 1 > R
    assert rep["grad_l4_lattice"] > 0 and rep["hess_l2_lattice"] > 0


def test_cutoff_unresolvable_raises():
    with pytest.raises(UnresolvableCutoff):
        cutoff_beta(Torus4(8), CutoffProfile(ratio=16.0, radius=0.25))


def test_cutoff_profile_validation():
    with pytest.raises(UsageError):
        CutoffProfile(ratio=1.5, radius=0.25)
    with pytest.raises(UsageError):
        CutoffProfile(ratio=4.0, radius=0.3)


def test_cutoff_lattice_refines_towards_radial():
    """Lattice finite-difference norms approach the radial-quadrature norms
    under refinement (derived refinement study)."""
    p = CutoffProfile(ratio=2.0, radius=0.25)
    g4r, h2r = radial_cutoff_norms(p)
    _, rep16 = cutoff_beta(Torus4(16), p, center=(0.5,) * 4)
    _, rep32 = cutoff_beta(Torus4(32), p, center=(0.5,) * 4)
    err16 = abs(rep16["hess_l2_lattice"] - h2r) + abs(rep16["grad_l4_lattice"] - g4r)
    err32 = abs(rep32["hess_l2_lattice"] - h2r) + abs(rep32["grad_l4_lattice"] - g4r)
    assert err32 <= 0.7 * err16


def test_cutoff_radial_norms_against_independent_quadrature():
    """Production radial norms vs a from-scratch r-space Riemann sum."""
    for N in (4.0, 16.0):
        p = CutoffProfile(ratio=N, radius=0.25)
        g4, h2 = radial_cutoff_norms(p)
        r, b = mollified_profile(p, num=30000)
        d1 = np.gradient(b, r, edge_order=2)
        d2 = np.gradient(d1, r, edge_order=2)
        mask = r > 1e-9
        sphere = 2 * np.pi ** 2
        g4_ind = (sphere * np.trapezoid((d1[mask] ** 4) * r[mask] ** 3, r[mask])) ** 0.25
        h2_ind = np.sqrt(sphere * np.trapezoid(
            (d2[mask] ** 2 + 3 * (d1[mask] / r[mask]) ** 2) * r[mask] ** 3, r[mask]))
        assert abs(g4 - g4_ind) <= 0.03 * g4
        assert abs(h2 - h2_ind) <= 0.03 * h2


def test_cutoff_norm_sums_decrease_with_ratio():
    sums = []
    for N in (4.0, 16.0, 64.0):
        g4, h2 = radial_cutoff_norms(CutoffProfile(ratio=N, radius=0.25))
        sums.append(g4 + h2)
    assert sums[0] > sums[1] > sums[2]
