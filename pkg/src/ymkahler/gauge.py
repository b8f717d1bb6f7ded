"""Connections, covariant operators, curvature decompositions, energies,
and gauge transformations.

A connection is a Lie-algebra-valued 1-form A_mu(x) on sites (not a
group-valued link field): the covariant operators below act on
algebra-valued forms and every derivative/adjoint pair is exact at
machine precision.  The price is that gauge covariance holds only to
discretization order, which is tested as a convergence property.

Covariant forward/backward differences use the bracket at the base site:
    Df_j u = dfwd_j u + [A_j, u],      Db_j u = dbwd_j u + [A_j, u],
with (Df_j)* = -Db_j by ad-invariance of the bracket.

Complex-coframe operators follow dz1 = e0 + i e1, dz2 = e2 + i e3:
    delbar_A s = 1/2 (D0 + i D1)s dzb1 + 1/2 (D2 + i D3)s dzb2,
and the (0,1) -> (0,2) map (delbar a)_0 = Dbar1 a_2 - Dbar2 a_1.  The
adjoints are written out against the Hermitian metric in which a (p,q)
blade has norm squared 2^(p+q).
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .algebra import GroupKind, bracket_arrays
from .errors import UsageError
from .lattice import (
    LatticeForm,
    PQForm,
    Torus4,
    _D_TABLE,
    NCOMP,
    dbwd,
    dfwd,
    lambda_omega,
    l2_norm,
    pq_decompose,
    sd_asd_project,
    to_pq2,
)

_I01, _I02, _I03, _I12, _I13, _I23 = range(6)


@dataclass
class Connection:
    """Lie-algebra-valued 1-form defining covariant differentiation."""

    grid: Torus4
    group: GroupKind
    a: np.ndarray  # shape (4, n, n, n, n, dim)

    def __post_init__(self):
        expected = (4, *self.grid.shape, self.group.dim)
        if self.a.shape != expected:
            raise UsageError(f"connection needs shape {expected}, got {self.a.shape}")

    @classmethod
    def zero(cls, grid: Torus4, g: GroupKind) -> "Connection":
        return cls(grid, g, np.zeros((4, *grid.shape, g.dim)))

    def one_form(self) -> LatticeForm:
        return LatticeForm(self.grid, self.group, 1, self.a)

    def copy(self) -> "Connection":
        return Connection(self.grid, self.group, self.a.copy())

    def __add__(self, other) -> "Connection":
        if isinstance(other, Connection):
            other = other.a
        return Connection(self.grid, self.group, self.a + other)


@dataclass
class CurvatureSplit:
    """Curvature with its four-part decomposition and SD/ASD split."""

    F: LatticeForm
    f20: PQForm
    f11_0: PQForm
    trace: LatticeForm
    f02: PQForm
    plus: LatticeForm
    minus: LatticeForm


_REFERENCE_N = 16  # normalization mesh for the L^inf rescale


def _mode_field(shape_coords, modes, coeffs, lead_shape):
    out = np.zeros((*lead_shape, *shape_coords[0].shape, coeffs[0][0].shape[-1]))
    expand = (slice(None),) * len(lead_shape) + (None,) * 4 + (slice(None),)
    for k, (cos_c, sin_c) in zip(modes, coeffs):
        phase = 2.0 * np.pi * (
            k[0] * shape_coords[0] + k[1] * shape_coords[1]
            + k[2] * shape_coords[2] + k[3] * shape_coords[3])
        out += np.cos(phase)[(None,) * len(lead_shape) + (..., None)] * cos_c[expand]
        out += np.sin(phase)[(None,) * len(lead_shape) + (..., None)] * sin_c[expand]
    return out


def random_connection(grid: Torus4, g: GroupKind, seed: int, amplitude: float,
                      smoothness: int = 2) -> Connection:
    """Deterministic band-limited random connection.

    Fourier coefficients are drawn from the seed for modes 1 <= |k|_inf <=
    smoothness, independent of the grid resolution, and the L^inf rescale
    is measured on a fixed reference mesh: different n therefore sample
    the same smooth field, so refinement pairs compare like with like.
    """
    if amplitude < 0:
        raise UsageError("amplitude must be >= 0")
    A = Connection.zero(grid, g)
    if amplitude == 0.0:
        return A
    rng = np.random.default_rng(seed)
    modes = _mode_list(smoothness)
    coeffs = [(rng.standard_normal((4, g.dim)), rng.standard_normal((4, g.dim)))
              for _ in modes]
    A.a[:] = _mode_field(grid.coordinates(), modes, coeffs, (4,))
    ref = _mode_field(Torus4(_REFERENCE_N).coordinates(), modes, coeffs, (4,)) \
        if grid.n != _REFERENCE_N else A.a
    peak = np.max(np.sqrt(np.sum(ref ** 2, axis=-1)))
    if peak > 0:
        A.a *= amplitude / peak
    return A


def random_algebra_field(grid: Torus4, g: GroupKind, seed: int, amplitude: float,
                         smoothness: int = 2) -> np.ndarray:
    """Band-limited random 0-form values, same conventions as
    random_connection (reference-mesh L^inf normalization)."""
    rng = np.random.default_rng(seed)
    modes = _mode_list(smoothness)
    coeffs = [(rng.standard_normal((1, g.dim)), rng.standard_normal((1, g.dim)))
              for _ in modes]
    out = _mode_field(grid.coordinates(), modes, coeffs, (1,))[0]
    ref = _mode_field(Torus4(_REFERENCE_N).coordinates(), modes, coeffs, (1,))[0] \
        if grid.n != _REFERENCE_N else out
    peak = np.max(np.sqrt(np.sum(ref ** 2, axis=-1)))
    if peak > 0:
        out *= amplitude / peak
    return out


def _mode_list(cutoff: int):
    """Half of the nonzero modes with |k|_inf <= cutoff (k and -k span the
    same cosine/sine pair, so keep one representative per pair)."""
    modes = []
    rng = range(-cutoff, cutoff + 1)
    for k in ((a, b, c, d) for a in rng for b in rng for c in rng for d in rng):
        if k == (0, 0, 0, 0):
            continue
        if k < tuple(-x for x in k):
            continue
        modes.append(k)
    return modes


# ---------------------------------------------------------------------------
# covariant real operators

def _cov_fwd(A: Connection, u: np.ndarray, j: int) -> np.ndarray:
    return dfwd(u, j, A.grid.h) + bracket_arrays(A.group, A.a[j], u)


def _cov_bwd(A: Connection, u: np.ndarray, j: int) -> np.ndarray:
    return dbwd(u, j, A.grid.h) + bracket_arrays(A.group, A.a[j], u)


def curvature(A: Connection) -> LatticeForm:
    """F_{mu nu} = d_mu A_nu - d_nu A_mu + [A_mu, A_nu] (forward differences)."""
    h = A.grid.h
    out = np.zeros((6, *A.grid.shape, A.group.dim))
    for idx, (mu, nu) in enumerate(((0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3))):
        out[idx] = (dfwd(A.a[nu], mu, h) - dfwd(A.a[mu], nu, h)
                    + bracket_arrays(A.group, A.a[mu], A.a[nu]))
    return LatticeForm(A.grid, A.group, 2, out)


def dA(u: LatticeForm, A: Connection) -> LatticeForm:
    """Covariant exterior derivative d + [A ^ .]."""
    if u.degree > 3:
        raise UsageError("dA of a 4-form")
    out = np.zeros((NCOMP[u.degree + 1], *u.grid.shape, u.group.dim), dtype=u.values.dtype)
    for j, jout, jin, s in _D_TABLE[u.degree]:
        out[jout] += s * _cov_fwd(A, u.values[jin], j)
    return LatticeForm(u.grid, u.group, u.degree + 1, out)


def dA_star(v: LatticeForm, A: Connection) -> LatticeForm:
    """Exact lattice adjoint of dA."""
    if v.degree < 1:
        raise UsageError("dA* of a 0-form")
    out = np.zeros((NCOMP[v.degree - 1], *v.grid.shape, v.group.dim), dtype=v.values.dtype)
    for j, jout, jin, s in _D_TABLE[v.degree - 1]:
        out[jin] -= s * _cov_bwd(A, v.values[jout], j)
    return LatticeForm(v.grid, v.group, v.degree - 1, out)


def nabla(A: Connection, u: np.ndarray) -> np.ndarray:
    """Full covariant derivative: stacks Df_j u over the four directions."""
    return np.stack([_cov_fwd(A, u, j) for j in range(4)])


def nabla_star(A: Connection, w: np.ndarray) -> np.ndarray:
    """Adjoint of nabla: -sum_j Db_j w_j."""
    out = -_cov_bwd(A, w[0], 0)
    for j in range(1, 4):
        out -= _cov_bwd(A, w[j], j)
    return out


def covariant_laplace0(A: Connection, s: np.ndarray) -> np.ndarray:
    """Rough Laplacian nabla* nabla on 0-form values (= d_A* d_A there)."""
    return nabla_star(A, nabla(A, s))


# ---------------------------------------------------------------------------
# complex-coframe operators

def _as_pq(u, A: Connection, p: int, q: int) -> PQForm:
    if isinstance(u, LatticeForm):
        if u.degree != p + q:
            raise UsageError("degree does not match bidegree")
        if (p, q) != (0, 0):
            raise UsageError("only 0-forms are complexified implicitly")
        return PQForm(u.grid, u.group, 0, 0, u.values.astype(complex))
    if (u.p, u.q) != (p, q):
        raise UsageError(f"expected a ({p},{q})-form, got ({u.p},{u.q})")
    return u


def _dbar_fwd(A: Connection, s: np.ndarray, pair: int) -> np.ndarray:
    """Dbar_pair = 1/2 (D_{2pair} + i D_{2pair+1}) with forward differences."""
    j = 2 * pair
    return 0.5 * (_cov_fwd(A, s, j) + 1j * _cov_fwd(A, s, j + 1))


def _dbar_bwd(A: Connection, s: np.ndarray, pair: int) -> np.ndarray:
    j = 2 * pair
    return 0.5 * (_cov_bwd(A, s, j) + 1j * _cov_bwd(A, s, j + 1))


def _dhol_fwd(A: Connection, s: np.ndarray, pair: int) -> np.ndarray:
    j = 2 * pair
    return 0.5 * (_cov_fwd(A, s, j) - 1j * _cov_fwd(A, s, j + 1))


def _dhol_bwd(A: Connection, s: np.ndarray, pair: int) -> np.ndarray:
    j = 2 * pair
    return 0.5 * (_cov_bwd(A, s, j) - 1j * _cov_bwd(A, s, j + 1))


def delbar(u, A: Connection) -> PQForm:
    """Antiholomorphic part of dA on (0,0) or (0,1) forms."""
    if isinstance(u, PQForm) and (u.p, u.q) == (0, 1):
        a1, a2 = u.values
        out = (_dbar_fwd(A, a2, 0) - _dbar_fwd(A, a1, 1))[None]
        return PQForm(u.grid, u.group, 0, 2, out)
    s = _as_pq(u, A, 0, 0)
    out = np.stack([_dbar_fwd(A, s.values[0], 0), _dbar_fwd(A, s.values[0], 1)])
    return PQForm(s.grid, s.group, 0, 1, out)


def delbar_star(u, A: Connection) -> PQForm:
    """Adjoint of delbar on (0,1) or (0,2) forms."""
    if isinstance(u, PQForm) and (u.p, u.q) == (0, 2):
        phi = u.values[0]
        j2 = _cov_bwd(A, phi, 2)
        j3 = _cov_bwd(A, phi, 3)
        j0 = _cov_bwd(A, phi, 0)
        j1 = _cov_bwd(A, phi, 1)
        out = np.stack([j2 - 1j * j3, -(j0 - 1j * j1)])
        return PQForm(u.grid, u.group, 0, 1, out)
    if isinstance(u, PQForm) and (u.p, u.q) == (0, 1):
        a1, a2 = u.values
        out = (-(_cov_bwd(A, a1, 0) - 1j * _cov_bwd(A, a1, 1))
               - (_cov_bwd(A, a2, 2) - 1j * _cov_bwd(A, a2, 3)))[None]
        return PQForm(u.grid, u.group, 0, 0, out)
    raise UsageError("delbar_star acts on (0,1) or (0,2) forms")


def del_hol(u, A: Connection) -> PQForm:
    """Holomorphic part of dA on (0,0) or (1,0) forms."""
    if isinstance(u, PQForm) and (u.p, u.q) == (1, 0):
        a1, a2 = u.values
        out = (_dhol_fwd(A, a2, 0) - _dhol_fwd(A, a1, 1))[None]
        return PQForm(u.grid, u.group, 2, 0, out)
    s = _as_pq(u, A, 0, 0)
    out = np.stack([_dhol_fwd(A, s.values[0], 0), _dhol_fwd(A, s.values[0], 1)])
    return PQForm(s.grid, s.group, 1, 0, out)


def del_hol_star(u, A: Connection) -> PQForm:
    """Adjoint of del_hol on (1,0) or (2,0) forms."""
    if isinstance(u, PQForm) and (u.p, u.q) == (2, 0):
        psi = u.values[0]
        out = np.stack([
            _cov_bwd(A, psi, 2) + 1j * _cov_bwd(A, psi, 3),
            -(_cov_bwd(A, psi, 0) + 1j * _cov_bwd(A, psi, 1)),
        ])
        return PQForm(u.grid, u.group, 1, 0, out)
    if isinstance(u, PQForm) and (u.p, u.q) == (1, 0):
        a1, a2 = u.values
        out = (-(_cov_bwd(A, a1, 0) + 1j * _cov_bwd(A, a1, 1))
               - (_cov_bwd(A, a2, 2) + 1j * _cov_bwd(A, a2, 3)))[None]
        return PQForm(u.grid, u.group, 0, 0, out)
    raise UsageError("del_hol_star acts on (1,0) or (2,0) forms")


def dbar_laplace02(A: Connection, phi: np.ndarray) -> np.ndarray:
    """delbar delbar* on (0,2)-coefficient fields (the full Dolbeault
    Laplacian there: delbar of a (0,2)-form vanishes in complex dim 2)."""
    f = PQForm(A.grid, A.group, 0, 2, phi[None])
    return delbar(delbar_star(f, A), A).values[0]


# ---------------------------------------------------------------------------
# energies

def curvature_split(A: Connection) -> CurvatureSplit:
    F = curvature(A)
    f20, f110, trace, f02 = pq_decompose(F)
    plus, minus = sd_asd_project(F)
    return CurvatureSplit(F, f20, f110, trace, f02, plus, minus)


def ym_energy(A: Connection) -> float:
    """Yang-Mills energy |F_A|^2 integrated over the torus."""
    return l2_norm(curvature(A)) ** 2


def topological_term(F: LatticeForm) -> float:
    """Integral of tr(F ^ F) with the pairing tr(a b) = -<a, b>, the
    normalization under which YM = 4 |F02|^2 + |trace|^2 + int tr(F ^ F)
    holds identically; it equals |F-|^2 - |F+|^2 up to rounding."""
    v = F.values
    dens = (np.sum(v[_I01] * v[_I23], axis=-1)
            - np.sum(v[_I02] * v[_I13], axis=-1)
            + np.sum(v[_I03] * v[_I12], axis=-1))
    return float(-2.0 * F.grid.volume_weight * np.sum(dens))


def energy_split(A: Connection) -> tuple[float, float, float]:
    """(|F02|^2, |Lambda_w F|^2, topological term); the Yang-Mills energy
    is 4*first + second + third to rounding."""
    F = curvature(A)
    _, _, f02 = to_pq2(F)
    trace = lambda_omega(F)
    return (l2_norm(f02) ** 2, l2_norm(trace) ** 2, topological_term(F))


# ---------------------------------------------------------------------------
# gauge transformations

@dataclass
class GaugeTransform:
    """Per-site group element: unit quaternion for su2/so3 (so3 acts through
    the double cover at this kernel level), phase angle for u1."""

    grid: Torus4
    group: GroupKind
    values: np.ndarray  # (n,n,n,n,4) quaternions or (n,n,n,n) angles

    @classmethod
    def identity(cls, grid: Torus4, g: GroupKind) -> "GaugeTransform":
        if g.abelian:
            return cls(grid, g, np.zeros(grid.shape))
        q = np.zeros((*grid.shape, 4))
        q[..., 0] = 1.0
        return cls(grid, g, q)

    @classmethod
    def random_smooth(cls, grid: Torus4, g: GroupKind, seed: int, amplitude: float,
                      smoothness: int = 2) -> "GaugeTransform":
        """exp of a band-limited random algebra field (resolution-independent)."""
        chi = random_algebra_field(grid, g, seed, amplitude, smoothness)
        if g.abelian:
            return cls(grid, g, chi[..., 0])
        mag = np.sqrt(np.sum(chi ** 2, axis=-1))
        axis = np.where(mag[..., None] > 1e-300, chi / np.maximum(mag, 1e-300)[..., None], 0.0)
        q = np.empty((*grid.shape, 4))
        q[..., 0] = np.cos(0.5 * mag)
        q[..., 1:] = np.sin(0.5 * mag)[..., None] * axis
        return cls(grid, g, q)

    def unitarity_defect(self) -> float:
        if self.group.abelian:
            return 0.0
        return float(np.max(np.abs(np.sum(self.values ** 2, axis=-1) - 1.0)))


def _quat_mul(p: np.ndarray, q: np.ndarray) -> np.ndarray:
    w1, v1 = p[..., 0], p[..., 1:]
    w2, v2 = q[..., 0], q[..., 1:]
    w = w1 * w2 - np.sum(v1 * v2, axis=-1)
    v = w1[..., None] * v2 + w2[..., None] * v1 + np.cross(v1, v2)
    return np.concatenate([w[..., None], v], axis=-1)


def _quat_conj(q: np.ndarray) -> np.ndarray:
    out = q.copy()
    out[..., 1:] *= -1.0
    return out


def _quat_rotate(q: np.ndarray, a: np.ndarray) -> np.ndarray:
    """Rotate coefficient 3-vectors a by the unit quaternions q (adjoint action)."""
    w = q[..., 0:1]
    v = q[..., 1:]
    cva = np.cross(v, a)
    return a + 2.0 * w * cva + 2.0 * np.cross(v, cva)


def apply_gauge(A: Connection, g: GaugeTransform) -> Connection:
    """A -> g A g^-1 - (dg) g^-1 on sites.

    Pointwise conjugation is exact; the derivative term uses the forward
    difference of g projected to the algebra, so gauge covariance of the
    curvature holds to discretization order only.
    """
    h = A.grid.h
    if A.group.abelian:
        theta = g.values[..., None]
        out = A.a.copy()
        for j in range(4):
            out[j] -= dfwd(theta, j, h)
        return Connection(A.grid, A.group, out)
    q = g.values
    out = np.empty_like(A.a)
    for j in range(4):
        rotated = _quat_rotate(q, A.a[j])
        u = _quat_mul(np.roll(q, -1, axis=j - 5), _quat_conj(q))
        # algebra basis is half the imaginary quaternion units: coefficients
        # of (dg) g^-1 are twice the vector part per unit spacing
        out[j] = rotated - 2.0 * u[..., 1:] / h
    return Connection(A.grid, A.group, out)
