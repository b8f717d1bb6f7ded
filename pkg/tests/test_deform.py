import numpy as np
import pytest

from ymkahler.algebra import SU2, U1
from ymkahler.errors import NearReducible, NoContraction, UsageError
from ymkahler.deform import (
    DeformConfig,
    FlowConfig,
    bmap,
    deform_direction,
    deform_to_trace_free,
    harmonicity_report,
    smap,
    sobolev2_norm,
    trace_curvature,
    ym_gradient_flow,
)
from ymkahler.gauge import Connection, nabla, random_connection
from ymkahler.lattice import Torus4
from ymkahler.spectral import SpectralConfig, lambda_A, solve_laplace

SCFG = SpectralConfig(restarts=2, lambda_floor=3e-5)


def _cfg(mode, tol=1e-8, **kw):
    return DeformConfig(mode=mode, tol=tol, lambda_floor=3e-5, spectral=SCFG, **kw)


def _norm(grid, x):
    return float(np.sqrt(grid.volume_weight * np.sum(x ** 2)))


# --- bmap ---------------------------------------------------------------------

def test_bmap_abelian_zero():
    grid = Torus4(4)
    A = random_connection(grid, U1, 3, 0.4)
    rng = np.random.default_rng(0)
    u = rng.standard_normal((*grid.shape, 1))
    assert np.max(np.abs(bmap(u, u, A))) == 0.0


def test_bmap_symmetric_and_bilinear():
    grid = Torus4(4)
    A = random_connection(grid, SU2, 5, 0.4)
    rng = np.random.default_rng(1)
    u, v, w = (rng.standard_normal((*grid.shape, 3)) for _ in range(3))
    buv = bmap(u, v, A)
    assert np.max(np.abs(buv - bmap(v, u, A))) <= 1e-12 * np.max(np.abs(buv))
    lin = bmap(2 * u + 3 * w, v, A) - 2 * bmap(u, v, A) - 3 * bmap(w, v, A)
    assert np.max(np.abs(lin)) <= 1e-12 * np.max(np.abs(buv))


def test_bmap_pointwise_bound():
    grid = Torus4(4)
    A = random_connection(grid, SU2, 6, 0.4)
    rng = np.random.default_rng(2)
    u, v = (rng.standard_normal((*grid.shape, 3)) for _ in range(2))
    b = bmap(u, v, A)
    du, dv = nabla(A, u), nabla(A, v)
    bound = 0.5 * np.sqrt(np.sum(du ** 2, axis=(0, -1)) * np.sum(dv ** 2, axis=(0, -1)))
    assert np.all(np.sqrt(np.sum(b ** 2, axis=-1)) <= bound * (1 + 1e-12) + 1e-15)


# --- smap ---------------------------------------------------------------------

def test_smap_zero():
    grid = Torus4(4)
    A = random_connection(grid, SU2, 7, 0.3)
    z = np.zeros((*grid.shape, 3))
    assert np.max(np.abs(smap(z, z, A, SCFG, lam=0.05))) == 0.0


def test_smap_consistency_with_separate_solves():
    grid = Torus4(4)
    A = random_connection(grid, SU2, 7, 0.3)
    lam = lambda_A(A, SCFG).value
    rng = np.random.default_rng(3)
    f = rng.standard_normal((*grid.shape, 3))
    direct = smap(f, f, A, SCFG, lam=lam)
    u = solve_laplace(A, f, SCFG, lam=lam)
    v = solve_laplace(A, f, SCFG, lam=lam)
    again = bmap(u, v, A)
    assert np.max(np.abs(direct - again)) <= 1e-8 * max(np.max(np.abs(direct)), 1e-12)


def test_smap_polarization_identity():
    """S(f,f) - S(g,g) = S(f+g, f-g): the quadratic-difference shape behind
    the contraction estimate."""
    grid = Torus4(4)
    A = random_connection(grid, SU2, 7, 0.3)
    lam = lambda_A(A, SCFG).value
    rng = np.random.default_rng(4)
    f = rng.standard_normal((*grid.shape, 3))
    g = rng.standard_normal((*grid.shape, 3))
    lhs = smap(f, f, A, SCFG, lam=lam) - smap(g, g, A, SCFG, lam=lam)
    rhs = smap(f + g, f - g, A, SCFG, lam=lam)
    scale = max(np.max(np.abs(lhs)), 1e-12)
    assert np.max(np.abs(lhs - rhs)) <= 1e-6 * scale


# --- the deformation -----------------------------------------------------------

def test_deform_flat_connection_trivial():
    A = Connection.zero(Torus4(4), SU2)
    res = deform_to_trace_free(A, _cfg("residual"))
    assert res.final_residual <= 1e-8
    assert np.max(np.abs(res.s)) == 0.0
    assert res.iterations == 0


def test_deform_u1_near_reducible():
    A = random_connection(Torus4(6), U1, 3, 0.05)
    with pytest.raises(NearReducible):
        deform_to_trace_free(A, _cfg("residual"))


def test_deform_residual_mode_reaches_tolerance():
    grid = Torus4(8)
    A = random_connection(grid, SU2, 7, 0.05)
    res = deform_to_trace_free(A, _cfg("residual"))
    assert res.final_residual <= 1e-8
    assert _norm(grid, trace_curvature(res.a_inf)) <= 1e-8
    assert res.s_norm_ratio < 1e3


def test_deform_picard_geometric_decay():
    grid = Torus4(8)
    A = random_connection(grid, SU2, 7, 0.05)
    res = deform_to_trace_free(A, _cfg("picard", tol=1e-12))
    g = np.array(res.trace_norms)
    assert len(g) >= 4
    ratios = g[2:] / g[1:-1]
    assert np.all(ratios < 0.5)  # geometric decay well inside the basin
    # log-linear fit quality
    k = np.arange(1, len(g) + 1)
    logs = np.log(g)
    coef = np.polyfit(k, logs, 1)
    pred = np.polyval(coef, k)
    ss_res = np.sum((logs - pred) ** 2)
    ss_tot = np.sum((logs - np.mean(logs)) ** 2)
    assert 1 - ss_res / ss_tot >= 0.95


def test_deform_modes_agree_and_refine():
    """|s_picard - s_residual| halves with the mesh (C (h + tol) bound)."""
    diffs = {}
    for n in (8, 16):
        grid = Torus4(n)
        A = random_connection(grid, SU2, 7, 0.05)
        res_r = deform_to_trace_free(A, _cfg("residual"))
        res_p = deform_to_trace_free(A, _cfg("picard", tol=1e-12))
        diffs[n] = _norm(grid, res_r.s - res_p.s)
    assert diffs[16] <= 0.75 * diffs[8]


def test_deform_no_contraction_large_amplitude():
    A = random_connection(Torus4(6), SU2, 7, 1.2)
    with pytest.raises(NoContraction):
        deform_to_trace_free(A, _cfg("picard"))


def test_deform_config_validation():
    with pytest.raises(UsageError):
        DeformConfig(mode="newton")
    with pytest.raises(UsageError):
        DeformConfig(rho_max=1.5)


def test_sobolev_norm_positive():
    grid = Torus4(4)
    A = random_connection(grid, SU2, 7, 0.3)
    rng = np.random.default_rng(5)
    s = rng.standard_normal((*grid.shape, 3))
    assert sobolev2_norm(A, s) > _norm(grid, s)


# --- gradient flow ---------------------------------------------------------------

def test_flow_fixed_point_at_zero():
    A = Connection.zero(Torus4(4), SU2)
    res = ym_gradient_flow(A, FlowConfig(grad_tol=1e-10))
    assert res.steps == 0
    assert res.energy == 0.0


def test_flow_monotone_descent_and_termination():
    grid = Torus4(6)
    A = random_connection(grid, SU2, 7, 0.3)
    res = ym_gradient_flow(A, FlowConfig(grad_tol=1e-6))
    assert res.grad_norm <= 1e-6
    assert res.energy <= res.initial_energy
    energies = [e for _, e, _ in res.trace]
    assert all(b <= a * (1 + 1e-12) for a, b in zip(energies, energies[1:]))


def test_flow_plain_mode_descends():
    grid = Torus4(4)
    A = random_connection(grid, SU2, 9, 0.3)
    res = ym_gradient_flow(A, FlowConfig(grad_tol=1e-2, preconditioned=False,
                                         max_steps=500))
    assert res.energy < res.initial_energy
    energies = [e for _, e, _ in res.trace]
    assert all(b <= a * (1 + 1e-12) for a, b in zip(energies, energies[1:]))


# --- harmonicity report ------------------------------------------------------------

def test_harmonicity_report_flat():
    rep = harmonicity_report(Connection.zero(Torus4(4), SU2))
    for key in ("ym_residual", "dbar_star_f02", "identity_02", "identity_20",
                "trace_norm", "f_plus_norm", "f02_norm"):
        assert rep[key] == 0.0


def test_harmonicity_u1_identity_reduces_to_ym_residual():
    """Over u1 the (0,2)-identity residual is the d_A*F / Bianchi combination
    written in complex components; the two agree to discretization order."""
    from ymkahler.gauge import curvature, dA, dA_star
    from ymkahler.lattice import PQForm, l2_norm

    def mismatch(n):
        grid = Torus4(n)
        A = random_connection(grid, U1, 11, 0.3, smoothness=1)
        rep_form = _identity02_residual_form(A)
        pred = _identity02_predicted_form(A)
        return (l2_norm(rep_form - pred) / max(l2_norm(pred), 1e-300))

    assert np.log2(mismatch(8) / mismatch(16)) >= 0.8


def _identity02_residual_form(A):
    from ymkahler.gauge import curvature, delbar, delbar_star
    from ymkahler.lattice import PQForm, to_pq2, lambda_omega
    F = curvature(A)
    _, _, f02 = to_pq2(F)
    trace = lambda_omega(F)
    tr0 = PQForm(A.grid, A.group, 0, 0, trace.values.astype(complex))
    dbar_tr = delbar(tr0, A)
    return 2.0 * delbar_star(f02, A) - PQForm(A.grid, A.group, 0, 1, 1j * dbar_tr.values)


def _identity02_predicted_form(A):
    """The same combination assembled from d_A*F and the Bianchi 3-form."""
    from ymkahler.gauge import curvature, dA, dA_star
    from ymkahler.lattice import PQForm
    F = curvature(A)
    ds = dA_star(F, A).values      # components (d*F)_mu
    bi = dA(F, A).values           # components (dF)_{abc} in order 012,013,023,123
    p1 = 0.5 * (ds[0] + bi[3]) + 0.5j * (ds[1] - bi[2])
    p2 = 0.5 * (ds[2] + bi[1]) + 0.5j * (ds[3] - bi[0])
    return PQForm(A.grid, A.group, 0, 1, np.stack([p1, p2]))


def test_harmonicity_residuals_shrink_with_flow_tolerance():
    grid = Torus4(6)
    A = random_connection(grid, SU2, 7, 0.3)
    loose = ym_gradient_flow(A, FlowConfig(grad_tol=1e-3))
    tight = ym_gradient_flow(A, FlowConfig(grad_tol=1e-6))
    rl = harmonicity_report(loose.connection)
    rt = harmonicity_report(tight.connection)
    assert rt["dbar_star_f02"] <= rl["dbar_star_f02"]
    assert rt["trace_norm"] <= rl["trace_norm"]
