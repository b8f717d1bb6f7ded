"""Flat Kahler 4-torus lattice: coframes, Hodge star, Kahler operators,
(p,q) and SD/ASD projections, finite-difference d/d*, norms, and the
logarithmic cutoff profile.

Conventions (fixed once, tested everywhere):
  * side length 1, n sites per axis, spacing h = 1/n, periodic in all
    four directions;
  * orthonormal coframe e^0..e^3, orientation e^{0123}, Kahler form
    w = e^{01} + e^{23}, complex coframe dz^1 = e^0 + i e^1,
    dz^2 = e^2 + i e^3;
  * d is built from forward differences, d* from backward differences,
    so that <du, v> = <u, d*v> holds at machine precision on the torus;
  * complexification is an isometric embedding: a (p,q) basis form
    dz^I wedge dzbar^J has Hermitian norm squared 2^(p+q).

Field arrays carry shape (ncomp, n, n, n, n, dim): site axes are always
axes -5..-2, the Lie coefficient axis is last.  Forms are immutable
inputs to operators; everything here is data-parallel over sites and all
reductions use numpy's deterministic summation order.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field, replace

import numpy as np

from .algebra import GroupKind, U1
from .errors import UsageError, UnresolvableCutoff

# ---------------------------------------------------------------------------
# multi-index tables

COMPONENTS = {k: tuple(itertools.combinations(range(4), k)) for k in range(5)}
COMP_INDEX = {k: {c: i for i, c in enumerate(COMPONENTS[k])} for k in range(5)}
NCOMP = {k: len(COMPONENTS[k]) for k in range(5)}


def _inversion_sign(seq) -> int:
    inv = 0
    for a in range(len(seq)):
        for b in range(a + 1, len(seq)):
            if seq[a] > seq[b]:
                inv += 1
    return -1 if inv % 2 else 1


def _merge(K, I):
    """Sign and sorted index of e^K wedge e^I, or (0, None) if they overlap."""
    if set(K) & set(I):
        return 0, None
    glued = tuple(K) + tuple(I)
    return _inversion_sign(glued), tuple(sorted(glued))


# d table: for degree k, entries (j, out_component, in_component, sign) with
# (du)_J = sum signs * D_j u_I ranging over j in J, I = J \ {j}.
_D_TABLE = {}
for _k in range(4):
    entries = []
    for J in COMPONENTS[_k + 1]:
        jidx = COMP_INDEX[_k + 1][J]
        for m, j in enumerate(J):
            I = tuple(x for x in J if x != j)
            entries.append((j, jidx, COMP_INDEX[_k][I], -1 if m % 2 else 1))
    _D_TABLE[_k] = tuple(entries)

# Hodge star: per component of degree k, (dual_component, sign).
_STAR = {}
for _k in range(5):
    entries = []
    for I in COMPONENTS[_k]:
        Ic = tuple(x for x in range(4) if x not in I)
        s, _ = _merge(I, Ic)
        entries.append((COMP_INDEX[4 - _k][Ic], s))
    _STAR[_k] = tuple(entries)

# wedge-by-omega table: for degree k (k <= 2), entries (out_component,
# in_component, sign) over the two omega blades e^{01} and e^{23}.
_OMEGA_BLADES = ((0, 1), (2, 3))
_WEDGE_OMEGA = {}
for _k in range(3):
    entries = []
    for K in _OMEGA_BLADES:
        for I in COMPONENTS[_k]:
            s, J = _merge(K, I)
            if s:
                entries.append((COMP_INDEX[_k + 2][J], COMP_INDEX[_k][I], s))
    _WEDGE_OMEGA[_k] = tuple(entries)

# 2-form component order: 01, 02, 03, 12, 13, 23
_I01, _I02, _I03, _I12, _I13, _I23 = range(6)

# (p,q) component orders, Hermitian weight of each basis form is 2^(p+q)
PQ_COMPONENTS = {
    (0, 0): ("1",),
    (1, 0): ("dz1", "dz2"),
    (0, 1): ("dzb1", "dzb2"),
    (2, 0): ("dz1^dz2",),
    (1, 1): ("dz1^dzb1", "dz1^dzb2", "dz2^dzb1", "dz2^dzb2"),
    (0, 2): ("dzb1^dzb2",),
}


def pq_weight(p: int, q: int) -> float:
    return float(2 ** (p + q))


# ---------------------------------------------------------------------------
# grid and form containers

@dataclass(frozen=True)
class Torus4:
    """Flat unit-side periodic 4-torus with n sites per axis.

    The metric is Euclidean in the orthonormal coframe; the Kahler form is
    w = e^{01} + e^{23}, volume form w^w/2 = e^{0123}, scalar curvature 0.
    """

    n: int

    def __post_init__(self):
        if self.n < 2:
            raise UsageError("grid needs at least 2 sites per axis")

    @property
    def h(self) -> float:
        return 1.0 / self.n

    @property
    def shape(self) -> tuple:
        return (self.n,) * 4

    @property
    def volume_weight(self) -> float:
        return self.h ** 4

    def coordinates(self) -> np.ndarray:
        """Site coordinates, shape (4, n, n, n, n)."""
        axes = np.indices(self.shape, dtype=float) * self.h
        return axes


@dataclass
class LatticeForm:
    """Lie-algebra-valued k-form sampled on the grid.

    values has shape (C(4,k), n, n, n, n, dim(G)).
    """

    grid: Torus4
    group: GroupKind
    degree: int
    values: np.ndarray

    def __post_init__(self):
        expected = (NCOMP[self.degree], *self.grid.shape, self.group.dim)
        if self.values.shape != expected:
            raise UsageError(f"degree-{self.degree} form needs shape {expected}, got {self.values.shape}")

    @classmethod
    def zero(cls, grid: Torus4, g: GroupKind, degree: int) -> "LatticeForm":
        return cls(grid, g, degree, np.zeros((NCOMP[degree], *grid.shape, g.dim)))

    def copy(self) -> "LatticeForm":
        return replace(self, values=self.values.copy())

    def __add__(self, other: "LatticeForm") -> "LatticeForm":
        self._check_like(other)
        return replace(self, values=self.values + other.values)

    def __sub__(self, other: "LatticeForm") -> "LatticeForm":
        self._check_like(other)
        return replace(self, values=self.values - other.values)

    def __mul__(self, c: float) -> "LatticeForm":
        return replace(self, values=self.values * c)

    __rmul__ = __mul__

    def _check_like(self, other):
        if self.degree != other.degree or self.group is not other.group or self.grid != other.grid:
            raise UsageError("forms are not compatible")


@dataclass
class PQForm:
    """g tensor C valued (p,q)-form; complex components per complex blade."""

    grid: Torus4
    group: GroupKind
    p: int
    q: int
    values: np.ndarray  # complex, shape (ncomp, n, n, n, n, dim)

    def __post_init__(self):
        if (self.p, self.q) not in PQ_COMPONENTS:
            raise UsageError(f"unsupported bidegree ({self.p},{self.q})")
        expected = (len(PQ_COMPONENTS[(self.p, self.q)]), *self.grid.shape, self.group.dim)
        if self.values.shape != expected:
            raise UsageError(f"({self.p},{self.q})-form needs shape {expected}, got {self.values.shape}")

    @property
    def weight(self) -> float:
        return pq_weight(self.p, self.q)

    @classmethod
    def zero(cls, grid: Torus4, g: GroupKind, p: int, q: int) -> "PQForm":
        ncomp = len(PQ_COMPONENTS[(p, q)])
        return cls(grid, g, p, q, np.zeros((ncomp, *grid.shape, g.dim), dtype=complex))

    def copy(self) -> "PQForm":
        return replace(self, values=self.values.copy())

    def __add__(self, other: "PQForm") -> "PQForm":
        if (self.p, self.q) != (other.p, other.q):
            raise UsageError("bidegrees differ")
        return replace(self, values=self.values + other.values)

    def __sub__(self, other: "PQForm") -> "PQForm":
        if (self.p, self.q) != (other.p, other.q):
            raise UsageError("bidegrees differ")
        return replace(self, values=self.values - other.values)

    def __mul__(self, c) -> "PQForm":
        return replace(self, values=self.values * c)

    __rmul__ = __mul__


# ---------------------------------------------------------------------------
# difference stencils (site axes are -5..-2 on every field array)

def dfwd(u: np.ndarray, j: int, h: float) -> np.ndarray:
    """Forward difference along direction j."""
    ax = j - 5
    return (np.roll(u, -1, axis=ax) - u) / h


def dbwd(u: np.ndarray, j: int, h: float) -> np.ndarray:
    """Backward difference along direction j (exact adjoint of -dfwd)."""
    ax = j - 5
    return (u - np.roll(u, 1, axis=ax)) / h


# ---------------------------------------------------------------------------
# pointwise algebraic operators

def hodge_star(u: LatticeForm) -> LatticeForm:
    """Pointwise Hodge star in the orthonormal coframe; ** = +1 on 2-forms."""
    k = u.degree
    out = np.empty((NCOMP[4 - k], *u.grid.shape, u.group.dim), dtype=u.values.dtype)
    for i, (dual, s) in enumerate(_STAR[k]):
        out[dual] = s * u.values[i]
    return LatticeForm(u.grid, u.group, 4 - k, out)


def hodge_star_inverse(v: LatticeForm) -> LatticeForm:
    """Inverse of hodge_star as a map from degree k to 4-k forms."""
    k = 4 - v.degree
    sign = (-1) ** (k * (4 - k))
    return hodge_star(v) * float(sign)


def lomega(u: LatticeForm) -> LatticeForm:
    """Exterior multiplication by the Kahler form, degree k -> k+2."""
    if u.degree > 2:
        raise UsageError("lomega needs degree <= 2")
    out = np.zeros((NCOMP[u.degree + 2], *u.grid.shape, u.group.dim), dtype=u.values.dtype)
    for jout, jin, s in _WEDGE_OMEGA[u.degree]:
        out[jout] += s * u.values[jin]
    return LatticeForm(u.grid, u.group, u.degree + 2, out)


def lambda_omega(v: LatticeForm) -> LatticeForm:
    """Pointwise adjoint of lomega, degree k -> k-2 (the omega-trace)."""
    if v.degree < 2:
        raise UsageError("lambda_omega needs degree >= 2")
    out = np.zeros((NCOMP[v.degree - 2], *v.grid.shape, v.group.dim), dtype=v.values.dtype)
    for jout, jin, s in _WEDGE_OMEGA[v.degree - 2]:
        out[jin] += s * v.values[jout]
    return LatticeForm(v.grid, v.group, v.degree - 2, out)


def omega_form(grid: Torus4, g: GroupKind, a: np.ndarray | None = None) -> LatticeForm:
    """The 2-form w tensor a for a constant algebra value a (default e_1)."""
    if a is None:
        a = np.zeros(g.dim)
        a[0] = 1.0
    w = LatticeForm.zero(grid, g, 2)
    w.values[_I01] = a
    w.values[_I23] = a
    return w


def sd_asd_project(F: LatticeForm) -> tuple[LatticeForm, LatticeForm]:
    """Split a 2-form into self-dual and anti-self-dual parts (F = F+ + F-)."""
    if F.degree != 2:
        raise UsageError("sd_asd_project needs a 2-form")
    v = F.values
    b1 = 0.5 * (v[_I01] + v[_I23])
    b2 = 0.5 * (v[_I02] - v[_I13])
    b3 = 0.5 * (v[_I03] + v[_I12])
    c1 = 0.5 * (v[_I01] - v[_I23])
    c2 = 0.5 * (v[_I02] + v[_I13])
    c3 = 0.5 * (v[_I03] - v[_I12])
    plus = np.stack([b1, b2, b3, b3, -b2, b1])
    minus = np.stack([c1, c2, c3, -c3, c2, -c1])
    return (LatticeForm(F.grid, F.group, 2, plus), LatticeForm(F.grid, F.group, 2, minus))


def sd_components(F: LatticeForm) -> np.ndarray:
    """Components (B1, B2, B3) of the self-dual part on the basis
    (e01+e23, e02+e31, e03+e12); shape (3, n, n, n, n, dim)."""
    v = F.values
    return np.stack([
        0.5 * (v[_I01] + v[_I23]),
        0.5 * (v[_I02] - v[_I13]),
        0.5 * (v[_I03] + v[_I12]),
    ])


def form_from_sd_components(grid: Torus4, g: GroupKind, b: np.ndarray) -> LatticeForm:
    """Self-dual 2-form with components b = (B1, B2, B3)."""
    plus = np.stack([b[0], b[1], b[2], b[2], -b[1], b[0]])
    return LatticeForm(grid, g, 2, plus)


# ---------------------------------------------------------------------------
# (p,q) projections of real forms

def complexify0(u: LatticeForm) -> PQForm:
    if u.degree != 0:
        raise UsageError("complexify0 needs a 0-form")
    return PQForm(u.grid, u.group, 0, 0, u.values.astype(complex))


def to_pq1(u: LatticeForm) -> tuple[PQForm, PQForm]:
    """Real 1-form -> ((1,0), (0,1)) parts; u = del-part + delbar-part."""
    if u.degree != 1:
        raise UsageError("to_pq1 needs a 1-form")
    v = u.values
    hol = np.stack([0.5 * (v[0] - 1j * v[1]), 0.5 * (v[2] - 1j * v[3])])
    ahol = np.stack([0.5 * (v[0] + 1j * v[1]), 0.5 * (v[2] + 1j * v[3])])
    return (PQForm(u.grid, u.group, 1, 0, hol), PQForm(u.grid, u.group, 0, 1, ahol))


def pq1_to_real(hol: PQForm, ahol: PQForm) -> LatticeForm:
    a1, a2 = hol.values
    b1, b2 = ahol.values
    comps = np.stack([(a1 + b1).real, (1j * (a1 - b1)).real, (a2 + b2).real, (1j * (a2 - b2)).real])
    return LatticeForm(hol.grid, hol.group, 1, comps)


def to_pq2(F: LatticeForm) -> tuple[PQForm, PQForm, PQForm]:
    """Real 2-form -> ((2,0), full (1,1), (0,2)) parts."""
    if F.degree != 2:
        raise UsageError("to_pq2 needs a 2-form")
    v = F.values
    b1 = 0.5 * (v[_I01] + v[_I23])
    b2 = 0.5 * (v[_I02] - v[_I13])
    b3 = 0.5 * (v[_I03] + v[_I12])
    c1 = 0.5 * (v[_I01] - v[_I23])
    c2 = 0.5 * (v[_I02] + v[_I13])
    c3 = 0.5 * (v[_I03] - v[_I12])
    f20 = (0.5 * (b2 - 1j * b3))[None]
    f02 = (0.5 * (b2 + 1j * b3))[None]
    f11 = np.stack([
        0.5j * (b1 + c1),          # dz1 ^ dzb1
        0.5 * (c2 + 1j * c3),      # dz1 ^ dzb2
        0.5 * (-c2 + 1j * c3),     # dz2 ^ dzb1
        0.5j * (b1 - c1),          # dz2 ^ dzb2
    ])
    mk = lambda p, q, vals: PQForm(F.grid, F.group, p, q, vals)
    return mk(2, 0, f20), mk(1, 1, f11), mk(0, 2, f02)


def pq2_to_real(f20: PQForm, f11: PQForm, f02: PQForm) -> LatticeForm:
    """Reassemble a real 2-form from its (p,q) parts."""
    psi = f20.values[0]
    phi = f02.values[0]
    h11, h12, h21, h22 = f11.values
    b2 = psi.real + phi.real
    b3 = phi.imag - psi.imag
    b1 = h11.imag + h22.imag
    c1 = h11.imag - h22.imag
    c2 = h12.real - h21.real
    c3 = h12.imag + h21.imag
    comps = np.stack([b1 + c1, b2 + c2, b3 + c3, b3 - c3, -b2 + c2, b1 - c1])
    return LatticeForm(f20.grid, f20.group, 2, comps)


def pq_decompose(F: LatticeForm) -> tuple[PQForm, PQForm, LatticeForm, PQForm]:
    """Decompose a real 2-form as F20 + F11_0 + (trace/2) w + F02.

    Returns (F20, primitive F11_0, trace 0-form Lambda_w F, F02).
    """
    f20, f11, f02 = to_pq2(F)
    trace = lambda_omega(F)
    v = F.values
    c1 = 0.5 * (v[_I01] - v[_I23])
    c2 = 0.5 * (v[_I02] + v[_I13])
    c3 = 0.5 * (v[_I03] - v[_I12])
    f110 = np.stack([0.5j * c1, 0.5 * (c2 + 1j * c3), 0.5 * (-c2 + 1j * c3), -0.5j * c1])
    return f20, PQForm(F.grid, F.group, 1, 1, f110), trace, f02


def pq_conj_star(phi: PQForm) -> PQForm:
    """Conjugate-adjoint on the (2,0)/(0,2) line: (c dzb1^dzb2)* = -cbar dz1^dz2
    and symmetrically; the real 2-form F satisfies F20 = -(F02)*."""
    if (phi.p, phi.q) == (0, 2):
        return PQForm(phi.grid, phi.group, 2, 0, -np.conj(phi.values))
    if (phi.p, phi.q) == (2, 0):
        return PQForm(phi.grid, phi.group, 0, 2, -np.conj(phi.values))
    raise UsageError("pq_conj_star defined on (2,0)/(0,2) forms")


def pq02_to_real(phi: PQForm) -> LatticeForm:
    """Real 2-form phi + conj(phi) represented by a (0,2)-form coefficient.

    For phi = (B2 + i B3)/2 dzb1^dzb2 this is B2 (e02+e31) + B3 (e03+e12),
    the trace-free self-dual form with those components.
    """
    if (phi.p, phi.q) != (0, 2):
        raise UsageError("pq02_to_real needs a (0,2)-form")
    c = phi.values[0]
    b2 = 2.0 * c.real
    b3 = 2.0 * c.imag
    zero = np.zeros_like(b2)
    comps = np.stack([zero, b2, b3, b3, -b2, zero])
    return LatticeForm(phi.grid, phi.group, 2, comps)


# ---------------------------------------------------------------------------
# plain exterior calculus (covariant versions live in gauge.py)

def exterior_d(u: LatticeForm) -> LatticeForm:
    """Forward-difference exterior derivative."""
    if u.degree > 3:
        raise UsageError("d of a 4-form")
    h = u.grid.h
    out = np.zeros((NCOMP[u.degree + 1], *u.grid.shape, u.group.dim), dtype=u.values.dtype)
    for j, jout, jin, s in _D_TABLE[u.degree]:
        out[jout] += s * dfwd(u.values[jin], j, h)
    return LatticeForm(u.grid, u.group, u.degree + 1, out)


def exterior_d_star(v: LatticeForm) -> LatticeForm:
    """Exact lattice adjoint of exterior_d (backward differences)."""
    if v.degree < 1:
        raise UsageError("d* of a 0-form")
    h = v.grid.h
    out = np.zeros((NCOMP[v.degree - 1], *v.grid.shape, v.group.dim), dtype=v.values.dtype)
    for j, jout, jin, s in _D_TABLE[v.degree - 1]:
        out[jin] -= s * dbwd(v.values[jout], j, h)
    return LatticeForm(v.grid, v.group, v.degree - 1, out)


# ---------------------------------------------------------------------------
# norms and inner products

def pointwise_norm(u) -> np.ndarray:
    """Per-site norm |u(x)| over components and Lie coefficients."""
    if isinstance(u, PQForm):
        mag2 = u.weight * np.sum(np.abs(u.values) ** 2, axis=(0, -1))
    else:
        mag2 = np.sum(u.values ** 2, axis=(0, -1))
    return np.sqrt(mag2)


def lp_norm(u, p: float) -> float:
    """L^p norm with the cell-volume weight; p = inf gives the max norm."""
    if p < 1:
        raise UsageError("p must be >= 1")
    mag = pointwise_norm(u)
    if np.isinf(p):
        return float(np.max(mag))
    vw = u.grid.volume_weight
    return float((vw * np.sum(mag ** p)) ** (1.0 / p))


def l2_norm(u) -> float:
    return lp_norm(u, 2.0)


def l2_inner(u, v) -> float:
    """Real L^2 pairing; for PQ forms this is the real part of the Hermitian one."""
    if isinstance(u, PQForm):
        return complex(hermitian_l2_inner(u, v)).real
    if u.degree != v.degree:
        raise UsageError("inner product needs equal degrees")
    return float(u.grid.volume_weight * np.sum(u.values * v.values))


def hermitian_l2_inner(u: PQForm, v: PQForm) -> complex:
    if (u.p, u.q) != (v.p, v.q):
        raise UsageError("inner product needs equal bidegrees")
    return complex(u.weight * u.grid.volume_weight * np.sum(u.values * np.conj(v.values)))


# ---------------------------------------------------------------------------
# logarithmic cutoff

@dataclass(frozen=True)
class CutoffProfile:
    """Radial profile equal to 1 inside radius/ratio, 0 outside radius,
    logarithmic in between, mollified at the corners.

    Mollification happens in log-radius with a C^2 bump whose half-width
    is `width` * log(ratio) (default width 0.4): the profile is then the
    same fixed shape stretched over a log-interval of length log(ratio),
    which is what makes the derivative norms scale like powers of
    1/log(ratio) uniformly at both corners.  An r-proportional width
    concentrates Hessian mass at the outer corner and destroys that
    scaling.
    """

    ratio: float          # N >= 2
    radius: float         # R, outer radius
    width: float = 0.05   # mollification half-width as a fraction of log(ratio)

    def __post_init__(self):
        if self.ratio < 2:
            raise UsageError("cutoff ratio must be >= 2")
        if not (0 < self.radius <= 0.25):
            raise UsageError("cutoff radius must lie in (0, 0.25] of the side")
        if not (0 < self.width < 0.5):
            raise UsageError("cutoff width fraction must lie in (0, 0.5)")


def _log_mollified(profile: CutoffProfile, num: int):
    """Mollified profile on a log-radius grid: returns (u, beta(u)).

    The ramp is a cosine smoothstep in log-radius: of all profiles that
    are exactly 1 below log(R/N) and 0 above log R with vanishing slope
    at the corners, it minimizes int b''^2 / int b'^2 (the first
    Dirichlet eigenvalue pi^2 on the ramp), which is what controls how
    uniformly the Hessian norm follows the 1/sqrt(log N) law.  The ramp
    is shrunk by the mollification half-width w on both sides and then
    convolved with a compactly supported C^2 bump, so the plateau and
    support contracts hold exactly and the result is C^2.
    """
    L = np.log(profile.ratio)
    w = profile.width * L
    u_top = np.log(profile.radius)
    lo, hi = u_top - L - 0.25 * L, u_top + 0.25 * L
    u = np.linspace(lo, hi, num)
    du = u[1] - u[0]
    x = np.clip((u_top - w - u) / (L - 2 * w), 0.0, 1.0)
    raw = 0.5 * (1.0 - np.cos(np.pi * x))
    half = max(int(np.ceil(w / du)), 2)
    t = np.arange(-half, half + 1) * du / w
    kern = np.clip(1 - t ** 2, 0, None) ** 3
    kern /= kern.sum()
    raw_ext = np.concatenate([np.ones(half), raw, np.zeros(half)])
    beta = np.convolve(raw_ext, kern, mode="same")[half:half + num]
    return u, beta


def mollified_profile(profile: CutoffProfile, num: int = 6000):
    """Mollified radial profile on an r-grid: returns (r, beta), with the
    flat plateau down to r = 0 prepended."""
    u, beta_u = _log_mollified(profile, num)
    r = np.exp(u)
    r_full = np.concatenate([[0.0], r])
    beta_full = np.concatenate([[1.0], beta_u])
    return r_full, beta_full


def radial_cutoff_norms(profile: CutoffProfile, num: int = 20000) -> tuple[float, float]:
    """(|grad beta|_L4, |hess beta|_L2) of the radial profile by 1-D quadrature.

    For a radial function on R^4 the Hessian magnitude is
    sqrt(beta''^2 + 3 (beta'/r)^2), the sphere factor 2 pi^2 r^3; in the
    log-radius variable u the two integrals collapse to
        int |beta_u'|^4 du   and   int ((beta_u'' - beta_u')^2 + 3 beta_u'^2) du.
    """
    u, beta = _log_mollified(profile, num)
    du = u[1] - u[0]
    d1 = np.gradient(beta, du)
    d2 = np.gradient(d1, du)
    sphere = 2.0 * np.pi ** 2
    grad4 = sphere * np.trapezoid(d1 ** 4, dx=du)
    hess2 = sphere * np.trapezoid((d2 - d1) ** 2 + 3.0 * d1 ** 2, dx=du)
    return float(grad4 ** 0.25), float(np.sqrt(hess2))


def cutoff_beta(grid: Torus4, profile: CutoffProfile, center=(0.0, 0.0, 0.0, 0.0)):
    """Sample the mollified cutoff on the lattice and report derivative norms.

    Returns (beta as a scalar 0-form, report dict).  The report carries both
    the lattice finite-difference norms and the radial-quadrature norms of
    the same profile.  Raises UnresolvableCutoff when the inner plateau
    radius/ratio falls below two lattice spacings.
    """
    h = grid.h
    if profile.radius / profile.ratio < 2.0 * h:
        raise UnresolvableCutoff(
            f"inner plateau R/N = {profile.radius / profile.ratio:.4g} below 2h = {2 * h:.4g}")
    r1d, beta1d = mollified_profile(profile)
    coords = grid.coordinates()
    c = np.asarray(center, dtype=float).reshape(4, 1, 1, 1, 1)
    delta = np.mod(coords - c + 0.5, 1.0) - 0.5
    rad = np.sqrt(np.sum(delta ** 2, axis=0))
    beta = np.interp(rad, r1d, beta1d, right=0.0)

    field_vals = beta[None, ..., None]
    form = LatticeForm(grid, U1, 0, field_vals)

    grad = np.stack([dfwd(field_vals, j, h) for j in range(4)])
    grad_mag = np.sqrt(np.sum(grad ** 2, axis=(0, 1, -1)))
    grad_l4 = float((grid.volume_weight * np.sum(grad_mag ** 4)) ** 0.25)
    hess_sq = 0.0
    for i in range(4):
        for j in range(4):
            hess_sq = hess_sq + dbwd(dfwd(field_vals, j, h), i, h) ** 2
    hess_l2 = float(np.sqrt(grid.volume_weight * np.sum(hess_sq)))

    ograd, ohess = radial_cutoff_norms(profile)
    report = {
        "ratio": profile.ratio,
        "radius": profile.radius,
        "width": profile.width,
        "grad_l4_lattice": grad_l4,
        "hess_l2_lattice": hess_l2,
        "grad_l4_radial": ograd,
        "hess_l2_radial": ohess,
    }
    return form, report
