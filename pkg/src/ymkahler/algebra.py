"""Finite-dimensional Lie-algebra kernel: su(2), so(3), u(1).

Elements are coefficient vectors in a fixed orthonormal basis {e_1..e_d}.
For su(2) and so(3) the bracket in this basis is the vector cross product
(structure constants eps_ijk with eps_123 = 1), which makes the Euclidean
coefficient inner product exactly ad-invariant.  u(1) is one-dimensional
and abelian.  su(2) and so(3) share structure constants at this level;
they differ only in bundle topology, which plays no role on the trivial
bundle over the torus.

All operations are pure functions of their inputs and re-entrant.  The
array kernels (`bracket_arrays`, `inner_arrays`) act on the trailing axis
of numpy arrays of any leading shape and are what the field modules use
in hot loops; `LieElement`/`CLieElement` are thin scalar wrappers.

Normalization note: the basis is orthonormal for the chosen ad-invariant
inner product.  Any global rescaling of this metric rescales all norms
consistently, so Rayleigh-quotient eigenvalues are unchanged.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import UsageError


@dataclass(frozen=True)
class GroupKind:
    name: str
    dim: int
    abelian: bool
    tag: int  # snapshot header tag


SU2 = GroupKind("su2", 3, False, 1)
SO3 = GroupKind("so3", 3, False, 2)
U1 = GroupKind("u1", 1, True, 3)

GROUPS = {g.name: g for g in (SU2, SO3, U1)}
GROUPS_BY_TAG = {g.tag: g for g in (SU2, SO3, U1)}


def group(name: str) -> GroupKind:
    try:
        return GROUPS[name]
    except KeyError:
        raise UsageError(f"unknown group {name!r}; expected one of {sorted(GROUPS)}")


def bracket_arrays(g: GroupKind, a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """[a, b] on the trailing coefficient axis. Zero for abelian groups.

    Written out componentwise: np.cross upcasts mixed real/complex inputs
    through temporaries and dominates hot loops otherwise.
    """
    if g.abelian:
        return np.zeros(np.broadcast_shapes(a.shape, b.shape), dtype=np.result_type(a, b))
    a1, a2, a3 = a[..., 0], a[..., 1], a[..., 2]
    b1, b2, b3 = b[..., 0], b[..., 1], b[..., 2]
    out = np.empty(np.broadcast_shapes(a.shape, b.shape), dtype=np.result_type(a, b))
    out[..., 0] = a2 * b3 - a3 * b2
    out[..., 1] = a3 * b1 - a1 * b3
    out[..., 2] = a1 * b2 - a2 * b1
    return out


def inner_arrays(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Pointwise <a, b>, summing the trailing coefficient axis."""
    return np.sum(a * b, axis=-1)


def hermitian_inner_arrays(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Pointwise Hermitian <a, b> = sum_k a_k conj(b_k) on the trailing axis."""
    return np.sum(a * np.conj(b), axis=-1)


def _check_same_group(x, y):
    if x.group is not y.group:
        raise UsageError(f"mismatched groups: {x.group.name} vs {y.group.name}")


@dataclass(frozen=True)
class LieElement:
    """A single Lie-algebra value: real coefficients in the fixed basis."""

    group: GroupKind
    coeffs: tuple

    def __post_init__(self):
        if len(self.coeffs) != self.group.dim:
            raise UsageError(f"{self.group.name} element needs {self.group.dim} coefficients")

    @classmethod
    def from_array(cls, g: GroupKind, arr) -> "LieElement":
        return cls(g, tuple(float(c) for c in np.asarray(arr, dtype=float)))

    @classmethod
    def basis(cls, g: GroupKind, i: int) -> "LieElement":
        c = np.zeros(g.dim)
        c[i] = 1.0
        return cls.from_array(g, c)

    @classmethod
    def zero(cls, g: GroupKind) -> "LieElement":
        return cls.from_array(g, np.zeros(g.dim))

    @property
    def array(self) -> np.ndarray:
        return np.asarray(self.coeffs, dtype=float)

    def bracket(self, other: "LieElement") -> "LieElement":
        _check_same_group(self, other)
        return LieElement.from_array(self.group, bracket_arrays(self.group, self.array, other.array))

    def inner(self, other: "LieElement") -> float:
        _check_same_group(self, other)
        return float(inner_arrays(self.array, other.array))

    def norm(self) -> float:
        return float(np.sqrt(self.inner(self)))


def bracket(a: LieElement, b: LieElement) -> LieElement:
    return a.bracket(b)


def inner(a: LieElement, b: LieElement) -> float:
    return a.inner(b)


@dataclass(frozen=True)
class CLieElement:
    """Complexified Lie-algebra value s = re + i im, with |s|^2 = |re|^2 + |im|^2."""

    re: LieElement
    im: LieElement

    def __post_init__(self):
        _check_same_group(self.re, self.im)

    @property
    def group(self) -> GroupKind:
        return self.re.group

    @classmethod
    def from_real(cls, a: LieElement) -> "CLieElement":
        return cls(a, LieElement.zero(a.group))

    @property
    def array(self) -> np.ndarray:
        return self.re.array + 1j * self.im.array


def cbracket(a: CLieElement, b: CLieElement) -> CLieElement:
    """Complex-bilinear bracket on the complexified algebra."""
    _check_same_group(a, b)
    g = a.group
    z = bracket_arrays(g, a.array, b.array)  # complex cross product, bilinear
    return CLieElement(LieElement.from_array(g, z.real), LieElement.from_array(g, z.imag))


def cinner(a: CLieElement, b: CLieElement) -> complex:
    """Hermitian inner product; cinner(s, s).real == |s1|^2 + |s2|^2."""
    _check_same_group(a, b)
    return complex(hermitian_inner_arrays(a.array, b.array))
