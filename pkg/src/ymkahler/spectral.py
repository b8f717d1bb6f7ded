"""Least-eigenvalue computations and linear solves with the covariant
rough Laplacian.

lambda_A: smallest eigenvalue of nabla* nabla (= d_A* d_A) on Lie-algebra
valued 0-forms, by shifted inverse-power iteration whose inner solves are
preconditioned CG.  The preconditioner inverts the flat (A = 0) operator
plus shift exactly in Fourier space, so the reducible/near-flat cases
stay cheap.

mu_A: smallest eigenvalue of delbar_A delbar_A* on (0,2)-forms, both
unconstrained (a certified lower bound for the constrained value) and
restricted to the rank-one cone phi = f (x) sigma with |sigma| = 1, which
realizes the commutation constraint [phi, *phi] = 0 exactly for su(2).
The constrained value is computed by alternating minimization: with sigma
frozen the problem is a linear eigenproblem in the complex scalar field
f; with f frozen, sigma moves by projected gradient descent on the unit
sphere.  Reported constrained values are upper bounds; restart diversity
is the evidence that they are tight.

Matrix-free applications are data-parallel; each solver instance owns its
iteration state, so independent solvers may run concurrently.
"""
from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from .errors import NearReducible, NonConvergence, SolverStagnation, UsageError
from .gauge import Connection, covariant_laplace0, dbar_laplace02, delbar, delbar_star
from .lattice import PQForm, Torus4, pq_weight

_W01 = pq_weight(0, 1)
_W02 = pq_weight(0, 2)

from .algebra import U1 as _SCALAR  # 1-dim coefficient carrier for scalar fields


@dataclass(frozen=True)
class SpectralConfig:
    tol: float = 1e-8
    max_iter: int = 400
    cg_tol: float = 1e-10
    cg_max_iter: int = 800
    restarts: int = 8
    lambda_floor: float = 1e-3
    seed: int = 0

    def __post_init__(self):
        for name in ("tol", "max_iter", "cg_tol", "cg_max_iter", "restarts", "lambda_floor"):
            if getattr(self, name) <= 0:
                raise UsageError(f"SpectralConfig.{name} must be positive")


@dataclass
class EigenResult:
    value: float
    witness: np.ndarray | None
    iterations: int
    residual: float


@dataclass
class MuResult:
    constrained: EigenResult
    unconstrained: EigenResult
    f: np.ndarray | None = None
    sigma: np.ndarray | None = None


def _norm(x: np.ndarray) -> float:
    return float(np.sqrt(np.vdot(x, x).real))


def _dot(x: np.ndarray, y: np.ndarray) -> float:
    return float(np.vdot(y, x).real)


# ---------------------------------------------------------------------------
# Fourier symbols of the flat operators (used as preconditioners)

def _fwd_symbols(grid: Torus4) -> np.ndarray:
    """Symbols of the four forward differences, shape (4, n, n, n, n)."""
    n, h = grid.n, grid.h
    k = np.fft.fftfreq(n, d=1.0 / n)  # integer frequencies
    kk = np.meshgrid(k, k, k, k, indexing="ij")
    return np.stack([(np.exp(2j * np.pi * kj / n) - 1.0) / h for kj in kk])


def laplace0_symbol(grid: Torus4) -> np.ndarray:
    """Symbol of the flat rough Laplacian on 0-forms (real, >= 0)."""
    s = _fwd_symbols(grid)
    return np.sum(np.abs(s) ** 2, axis=0)


def dbar02_symbol(grid: Torus4) -> np.ndarray:
    """Symbol of the flat delbar delbar* on (0,2)-forms (real, >= 0).

    Besides the constants, the one-sided difference pair makes the symbol
    vanish on the quarter-Nyquist combinations k = (q, -q, q, -q) with
    q = n/4 (the Cauchy-Schwarz equality case of the cross terms), so the
    discrete operator has rough near-null modes the continuum operator
    does not.  Eigenvalues against the dense oracle are unaffected; only
    continuum intuition about near-kernel witnesses needs care.
    """
    s = _fwd_symbols(grid)
    sym = 0.5 * (np.sum(np.abs(s) ** 2, axis=0)
                 - 2.0 * (s[1] * np.conj(s[0])).imag
                 - 2.0 * (s[3] * np.conj(s[2])).imag)
    return np.maximum(sym, 0.0)


def _fft_preconditioner(symbol: np.ndarray, sigma: float, complex_field: bool):
    denom = symbol + sigma

    def minv(r: np.ndarray) -> np.ndarray:
        rhat = np.fft.fftn(r, axes=(0, 1, 2, 3))
        rhat /= denom[..., None] if r.ndim == 5 else denom
        out = np.fft.ifftn(rhat, axes=(0, 1, 2, 3))
        return out if complex_field else out.real

    return minv


# ---------------------------------------------------------------------------
# preconditioned conjugate gradients

def pcg(apply_op, b: np.ndarray, x0: np.ndarray | None = None, minv=None,
        tol: float = 1e-10, maxiter: int = 800):
    """CG on a (Hermitian) positive definite operator.

    Returns (x, iterations, converged); the caller decides whether a
    non-converged result is an error.
    """
    bnorm = _norm(b)
    if bnorm == 0.0:
        return np.zeros_like(b), 0, True
    x = np.zeros_like(b) if x0 is None else x0.copy()
    r = b - apply_op(x) if x0 is not None else b.copy()
    z = minv(r) if minv is not None else r
    p = z.copy()
    rz = np.vdot(z, r).real
    for it in range(1, maxiter + 1):
        Ap = apply_op(p)
        pAp = np.vdot(p, Ap).real
        if pAp <= 0:
            return x, it, False  # lost positive-definiteness numerically
        alpha = rz / pAp
        x += alpha * p
        r -= alpha * Ap
        if _norm(r) <= tol * bnorm:
            return x, it, True
        z = minv(r) if minv is not None else r
        rz_new = np.vdot(z, r).real
        p = z + (rz_new / rz) * p
        rz = rz_new
    return x, maxiter, _norm(r) <= tol * bnorm


# ---------------------------------------------------------------------------
# inverse-power iteration

def _smallest_eigenpair(apply_op, symbol: np.ndarray, v0: np.ndarray,
                        cfg: SpectralConfig, complex_field: bool,
                        max_iter: int | None = None, strict: bool = True,
                        loose_inner: bool = False) -> EigenResult:
    """Smallest eigenpair of a PSD operator by shifted inverse iteration.

    The shift tracks 0.3 * (current Rayleigh quotient), floored so the
    Fourier preconditioner stays invertible on the zero mode.  With
    strict=False the budget is advisory and the best iterate seen is
    returned instead of raising.  loose_inner caps the inner solve
    accuracy, which is enough when only monotone descent is needed.
    """
    scale = float(np.max(symbol))
    sigma_floor = 1e-7 * scale
    budget = cfg.max_iter if max_iter is None else max_iter
    v = v0 / _norm(v0)
    Av = apply_op(v)
    theta = _dot(Av, v)
    res = _norm(Av - theta * v)
    best = (theta, v, res, 0)
    # short history for Rayleigh-Ritz refinement: clustered smallest
    # eigenvalues stall plain inverse iteration, but a 3-dim subspace
    # rotates within the cluster at no extra operator cost
    history: list[tuple[np.ndarray, np.ndarray]] = [(v, Av)]
    w = None
    for it in range(1, budget + 1):
        sigma = max(0.3 * theta, sigma_floor)
        minv = _fft_preconditioner(symbol, sigma, complex_field)
        shifted = lambda x: apply_op(x) + sigma * x
        # inexact solves feed angle noise ~ ||Op|| * itol into the residual;
        # tighten the inner tolerance as the eigenpair converges
        itol = min(cfg.cg_tol, max(0.005 * res / max(scale, 1.0), 1e-14))
        if loose_inner:
            itol = max(itol, 1e-4)
        w, _, _ = pcg(shifted, v, x0=w, minv=minv, tol=itol, maxiter=cfg.cg_max_iter)
        nw = _norm(w)
        if nw == 0.0:
            raise SolverStagnation("inverse iteration produced a zero vector")
        v = w / nw
        Av = apply_op(v)
        history.append((v, Av))
        history = history[-3:]
        v, Av = _ritz_smallest(history, apply_op)
        history[-1] = (v, Av)
        theta = _dot(Av, v)
        res = _norm(Av - theta * v)
        if theta <= best[0] or res < best[2]:
            best = (theta, v, res, it)
        if res <= cfg.tol * max(1.0, abs(theta)):
            return EigenResult(value=float(theta), witness=v, iterations=it, residual=float(res))
    if strict:
        raise SolverStagnation(
            f"inverse iteration did not reach tol={cfg.tol} in {budget} steps "
            f"(residual {res:.3e})")
    theta, v, res, it = best
    return EigenResult(value=float(theta), witness=v, iterations=it, residual=float(res))


def _ritz_smallest(history, apply_op) -> tuple[np.ndarray, np.ndarray]:
    """Smallest Ritz pair over the span of the stored history vectors.

    Operator images of the orthonormalized directions are recomputed
    fresh: combining stored images linearly amplifies rounding noise
    when the history is nearly parallel, which it is close to
    convergence.
    """
    basis: list[np.ndarray] = []
    for v, _ in reversed(history):  # newest iterate leads the basis
        u = v.copy()
        for b in basis:
            u = u - np.vdot(b, u) * b
        nu = _norm(u)
        if nu > 1e-7 * _norm(v):
            basis.append(u / nu)
    m = len(basis)
    if m == 1:
        return history[-1][0], history[-1][1]
    images = [history[-1][1]] + [apply_op(b) for b in basis[1:]]
    H = np.empty((m, m), dtype=complex)
    for i in range(m):
        for j in range(m):
            H[i, j] = np.vdot(basis[i], images[j])
    H = 0.5 * (H + H.conj().T)
    vals, vecs = np.linalg.eigh(H)
    coeffs = vecs[:, 0]
    v = sum(c * b for c, b in zip(coeffs, basis))
    av = sum(c * ab for c, ab in zip(coeffs, images))
    nv = _norm(v)
    return v / nv, av / nv


def lambda_A(A: Connection, cfg: SpectralConfig | None = None,
             v0: np.ndarray | None = None) -> EigenResult:
    """Least eigenvalue of d_A* d_A on Lie-algebra-valued 0-forms."""
    cfg = cfg or SpectralConfig()
    rng = np.random.default_rng(cfg.seed)
    if v0 is None:
        v0 = rng.standard_normal((*A.grid.shape, A.group.dim))
    symbol = laplace0_symbol(A.grid)
    return _smallest_eigenpair(lambda s: covariant_laplace0(A, s), symbol, v0, cfg,
                               complex_field=False)


def mu_unconstrained(A: Connection, cfg: SpectralConfig | None = None,
                     v0: np.ndarray | None = None) -> EigenResult:
    """Least eigenvalue of delbar_A delbar_A* on all of Omega^{0,2}."""
    cfg = cfg or SpectralConfig()
    rng = np.random.default_rng(cfg.seed + 1)
    if v0 is None:
        v0 = (rng.standard_normal((*A.grid.shape, A.group.dim))
              + 1j * rng.standard_normal((*A.grid.shape, A.group.dim)))
    symbol = dbar02_symbol(A.grid)
    return _smallest_eigenpair(lambda p: dbar_laplace02(A, p), symbol, v0, cfg,
                               complex_field=True)


# ---------------------------------------------------------------------------
# linear solve with the covariant Laplacian

def estimate_lambda(A: Connection, cfg: SpectralConfig) -> float:
    """Cheap lower-accuracy estimate of lambda(A) for floor checks."""
    if A.group.abelian:
        return 0.0
    loose = replace(cfg, tol=max(cfg.tol, 1e-4), max_iter=max(cfg.max_iter, 60))
    return lambda_A(A, loose).value


def solve_laplace(A: Connection, f: np.ndarray, cfg: SpectralConfig | None = None,
                  lam: float | None = None, x0: np.ndarray | None = None) -> np.ndarray:
    """Solve nabla* nabla s = f for 0-form values f.

    lam is the caller-supplied least eigenvalue (estimated if missing);
    below cfg.lambda_floor the system is declared NearReducible.
    """
    cfg = cfg or SpectralConfig()
    if lam is None:
        lam = estimate_lambda(A, cfg)
    if lam < cfg.lambda_floor:
        raise NearReducible(f"lambda(A) ~ {lam:.3e} below floor {cfg.lambda_floor:.3e}")
    symbol = laplace0_symbol(A.grid)
    minv = _fft_preconditioner(symbol, 0.5 * lam, complex_field=np.iscomplexobj(f))
    x, iters, ok = pcg(lambda s: covariant_laplace0(A, s), f, x0=x0, minv=minv,
                       tol=cfg.cg_tol, maxiter=cfg.cg_max_iter)
    if not ok:
        raise SolverStagnation(f"laplace solve stagnated after {iters} iterations")
    return x


# ---------------------------------------------------------------------------
# constrained mu: rank-one cone, alternating minimization

def _rank_one_project(phi: np.ndarray):
    """Best pointwise rank-one fit phi ~ f sigma: returns (f, sigma).

    The SVD direction carries an arbitrary per-site sign; signs are
    aligned along the flattened site order so that sigma is as smooth as
    the input allows (a sign-flipping section would wreck the
    conditioning of the f-block operator downstream).
    """
    m = np.stack([phi.real, phi.imag], axis=-1)  # (..., dim, 2)
    u, s, vt = np.linalg.svd(m)
    sigma = u[..., :, 0]
    f = (np.sum(phi.real * sigma, axis=-1) + 1j * np.sum(phi.imag * sigma, axis=-1))
    return _align_signs(f, sigma)


def _align_signs(f: np.ndarray, sigma: np.ndarray):
    """Flip (f, sigma) -> (-f, -sigma) sitewise for sweep-order continuity."""
    dim = sigma.shape[-1]
    flat_sigma = sigma.reshape(-1, dim).copy()
    flat_f = f.reshape(-1).copy()
    dots = np.einsum("ij,ij->i", flat_sigma[1:], flat_sigma[:-1])
    # cumulative parity of sign flips along the sweep
    flip = np.concatenate([[1.0], np.cumprod(np.where(dots < 0.0, -1.0, 1.0))])
    flat_sigma *= flip[:, None]
    flat_f *= flip
    return flat_f.reshape(f.shape), flat_sigma.reshape(sigma.shape)


def _normalize_sections(sigma: np.ndarray) -> np.ndarray:
    mag = np.sqrt(np.sum(sigma ** 2, axis=-1, keepdims=True))
    safe = np.where(mag > 1e-300, mag, 1.0)
    out = sigma / safe
    # arbitrary but deterministic direction where the section vanished
    unit = np.zeros(sigma.shape[-1])
    unit[0] = 1.0
    return np.where(mag > 1e-300, out, unit)


def _mu_apply_f(A: Connection, sigma: np.ndarray, f: np.ndarray) -> np.ndarray:
    """P_sigma f: the f-step operator, Hermitian PSD on complex scalar fields."""
    phi = f[..., None] * sigma
    eta = delbar_star(PQForm(A.grid, A.group, 0, 2, phi[None]), A)
    psi = delbar(eta, A).values[0]
    return np.sum(psi * sigma, axis=-1)


def _mu_rayleigh(A: Connection, f: np.ndarray, sigma: np.ndarray) -> float:
    phi = PQForm(A.grid, A.group, 0, 2, (f[..., None] * sigma)[None])
    eta = delbar_star(phi, A)
    num = _W01 * np.sum(np.abs(eta.values) ** 2)
    den = _W02 * np.sum(np.abs(f) ** 2)
    return float(num / den)


def _mu_sigma_grad(A: Connection, f: np.ndarray, sigma: np.ndarray) -> np.ndarray:
    """Tangent gradient of |delbar*(f sigma)|^2 in sigma (unit-sphere field)."""
    phi = f[..., None] * sigma
    eta = delbar_star(PQForm(A.grid, A.group, 0, 2, phi[None]), A)
    psi = delbar(eta, A).values[0]
    grad = 2.0 * _W02 * (f[..., None] * np.conj(psi)).real
    grad -= np.sum(grad * sigma, axis=-1, keepdims=True) * sigma
    return grad


class _SigmaNCG:
    """Polak-Ribiere conjugate gradient on the product of unit spheres.

    Retraction is pointwise renormalization; the line search expands on a
    first-try acceptance and halves otherwise.  Descent of the Rayleigh
    value is enforced, so the surrounding alternation stays monotone.
    """

    def __init__(self, step: float = 1e-3):
        self.t = step
        self.g_prev: np.ndarray | None = None
        self.d: np.ndarray | None = None

    def steps(self, A: Connection, f: np.ndarray, sigma: np.ndarray, value: float,
              count: int) -> tuple[np.ndarray, float]:
        for _ in range(count):
            g = _mu_sigma_grad(A, f, sigma)
            if _norm(g) == 0.0:
                break
            if self.g_prev is None:
                d = -g
            else:
                beta = max(0.0, float(np.sum(g * (g - self.g_prev)))
                           / max(float(np.sum(self.g_prev * self.g_prev)), 1e-300))
                d = -g + beta * self.d
                if float(np.sum(g * d)) > 0.0:
                    d = -g
            self.g_prev, self.d = g, d
            improved = False
            for trial in range(12):
                cand = _normalize_sections(sigma + self.t * d)
                cval = _mu_rayleigh(A, f, cand)
                if cval < value:
                    sigma, value = cand, cval
                    improved = True
                    if trial == 0:
                        self.t *= 1.8
                    break
                self.t *= 0.5
            if not improved:
                self.g_prev = None  # restart the CG memory
                break
        return sigma, value


def mu_A(A: Connection, cfg: SpectralConfig | None = None,
         init: tuple[np.ndarray, np.ndarray] | None = None) -> MuResult:
    """Least eigenvalue of delbar_A delbar_A* over the rank-one cone, plus
    the unconstrained value (a certified lower bound).

    The constrained search alternates an exact linear eigenproblem in the
    scalar part f with projected-gradient updates of the unit section
    sigma, taking the best over cfg.restarts starts.  For abelian groups
    the constraint is trivial and the unconstrained value is returned.
    """
    cfg = cfg or SpectralConfig()
    unc = mu_unconstrained(A, cfg)
    if A.group.abelian:
        constrained = EigenResult(unc.value, unc.witness, unc.iterations, unc.residual)
        return MuResult(constrained, unc)

    from .gauge import random_algebra_field

    symbol = dbar02_symbol(A.grid)
    starts: list[tuple[np.ndarray, np.ndarray]] = []
    if init is not None:
        starts.append(init)
    if unc.witness is not None:
        starts.append(_rank_one_project(unc.witness))
    k = 0
    while len(starts) < max(cfg.restarts, 1) + (init is not None):
        f0 = (random_algebra_field(A.grid, _SCALAR, cfg.seed + 100 + k, 1.0)[..., 0]
              + 1j * random_algebra_field(A.grid, _SCALAR, cfg.seed + 200 + k, 1.0)[..., 0]
              + (1.0 + 0.5j))
        s0 = _normalize_sections(
            random_algebra_field(A.grid, A.group, cfg.seed + 300 + k, 1.0)
            + 0.5 * np.eye(A.group.dim)[0])
        starts.append((f0, s0))
        k += 1

    best: tuple[float, np.ndarray, np.ndarray] | None = None
    settled = False
    n_starts = max(cfg.restarts, 1) + (init is not None)
    for start_idx, (f0, sigma0) in enumerate(starts[:n_starts]):
        if settled and cfg.restarts == 1:
            break  # the warm start carried its branch; skip the backstop
        f = f0.astype(complex)
        sigma = _normalize_sections(np.asarray(sigma0, dtype=float))
        value = _mu_rayleigh(A, f, sigma)
        ncg = _SigmaNCG()
        sigma_hist: list[np.ndarray] = []
        value_hist: list[float] = [value]
        stable = 0
        # later (diversity) starts get a probation budget; they only earn
        # the full budget by beating the incumbent
        first_full = init is not None and start_idx <= 1
        budget_outer = 160 if (start_idx == 0 or first_full) else 60
        outer = -1
        while (outer := outer + 1) < budget_outer:
            if (start_idx > 0 and outer == 59 and best is not None
                    and value < best[0]):
                budget_outer = 160
            budget = 10 if outer == 0 else 3
            eig = _smallest_eigenpair(lambda x: _mu_apply_f(A, sigma, x), symbol,
                                      f, cfg, complex_field=True, max_iter=budget,
                                      strict=False, loose_inner=True)
            if _mu_rayleigh(A, eig.witness, sigma) <= value:
                f = eig.witness
                value = _mu_rayleigh(A, f, sigma)
            sigma, new_value = ncg.steps(A, f, sigma, value, count=8)
            # secant extrapolation across the recent drift direction
            sigma_hist.append(sigma.copy())
            if len(sigma_hist) > 6:
                old = sigma_hist.pop(0)
                for gamma in (2.0, 6.0, 18.0):
                    cand = _normalize_sections(sigma + gamma * (sigma - old))
                    cval = _mu_rayleigh(A, f, cand)
                    if cval < new_value:
                        sigma, new_value = cand, cval
            delta = value - new_value
            value = new_value
            value_hist.append(value)
            if delta <= 1e-9 * max(abs(value), 1e-10):
                stable += 1
                if stable >= 3:
                    settled = True
                    break
            else:
                stable = 0
            # windowed drip detection: a linear tail makes progress at a
            # near-constant shallow rate; accept the value as an upper
            # bound once a whole 20-outer window moved by <= 1.5e-4 relative
            if (len(value_hist) >= 21
                    and value_hist[-21] - value <= 1.5e-4 * max(abs(value), 1e-10)):
                settled = True
                break
        if best is None or value < best[0]:
            best = (value, f, sigma)
    if not settled:
        raise NonConvergence("mu alternation did not settle within its budget")

    value, f, sigma = best
    # certificate pass: tighten the f-block eigenpair at the final sigma
    eig = _smallest_eigenpair(lambda x: _mu_apply_f(A, sigma, x), symbol, f, cfg,
                              complex_field=True, max_iter=150, strict=False)
    if _mu_rayleigh(A, eig.witness, sigma) <= value:
        f = eig.witness
        value = _mu_rayleigh(A, f, sigma)
    witness = (f[..., None] * sigma)
    constrained = EigenResult(value=float(value), witness=witness,
                              iterations=eig.iterations, residual=eig.residual)
    return MuResult(constrained, unc, f=f, sigma=sigma)


# ---------------------------------------------------------------------------
# eigenvalue continuity along a path of connections

def continuity_sweep(A0: Connection, direction: np.ndarray, amplitudes,
                     cfg: SpectralConfig | None = None) -> list[dict]:
    """Evaluate lambda and mu along A0 + t * direction.

    amplitudes must be sorted ascending; the sweep walks them bottom-up so
    every solve warm-starts from its neighbour on the same branch (only
    the base point runs cold).
    """
    cfg = cfg or SpectralConfig()
    amps = list(amplitudes)
    if any(b < a for a, b in zip(amps, amps[1:])):
        raise UsageError("amplitudes must be sorted ascending")
    dir_form = Connection(A0.grid, A0.group, direction)
    dir_l4 = _l4_of_connection(dir_form)
    rows = []
    lam_witness = None
    mu_init = None
    for t in amps:
        At = Connection(A0.grid, A0.group, A0.a + t * direction)
        lam = lambda_A(At, cfg, v0=lam_witness)
        lam_witness = lam.witness
        mu = mu_A(At, cfg, init=mu_init)
        if mu.f is not None:
            mu_init = (mu.f, mu.sigma)
        rows.append({
            "t": float(t),
            "a_l4": float(t * dir_l4),
            "lambda": lam.value,
            "lambda_residual": lam.residual,
            "mu": mu.constrained.value,
            "mu_unconstrained": mu.unconstrained.value,
        })
    return rows


def _l4_of_connection(A: Connection) -> float:
    mag = np.sqrt(np.sum(A.a ** 2, axis=(0, -1)))
    return float((A.grid.volume_weight * np.sum(mag ** 4)) ** 0.25)


# ---------------------------------------------------------------------------
# dense oracles (desk-size lattices only)

def dense_operator(apply_op, shape, dtype) -> np.ndarray:
    """Assemble the matrix of a linear operator by applying it to the basis."""
    dim = int(np.prod(shape))
    mat = np.empty((dim, dim), dtype=dtype)
    basis = np.zeros(shape, dtype=dtype)
    flat = basis.reshape(-1)
    for i in range(dim):
        flat[i] = 1.0
        mat[:, i] = apply_op(basis).reshape(-1)
        flat[i] = 0.0
    return mat


def _check_desk_size(grid: Torus4):
    if grid.n > 3:
        raise UsageError("dense oracles are retained for n <= 3 only")


def dense_lambda(A: Connection) -> float:
    """Smallest eigenvalue of d_A* d_A by full assembly and eigh."""
    _check_desk_size(A.grid)
    shape = (*A.grid.shape, A.group.dim)
    mat = dense_operator(lambda s: covariant_laplace0(A, s), shape, float)
    mat = 0.5 * (mat + mat.T)
    return float(np.linalg.eigvalsh(mat)[0])


def dense_mu_unconstrained(A: Connection) -> float:
    """Smallest eigenvalue of delbar delbar* on (0,2) by full assembly."""
    _check_desk_size(A.grid)
    shape = (*A.grid.shape, A.group.dim)
    mat = dense_operator(lambda p: dbar_laplace02(A, p), shape, complex)
    mat = 0.5 * (mat + mat.conj().T)
    return float(np.linalg.eigvalsh(mat)[0])


def dense_solve_laplace(A: Connection, f: np.ndarray) -> np.ndarray:
    """Direct dense solve of nabla* nabla s = f (oracle for solve_laplace)."""
    _check_desk_size(A.grid)
    shape = (*A.grid.shape, A.group.dim)
    mat = dense_operator(lambda s: covariant_laplace0(A, s), shape, float)
    sol = np.linalg.lstsq(mat, f.reshape(-1), rcond=None)[0]
    return sol.reshape(shape)
