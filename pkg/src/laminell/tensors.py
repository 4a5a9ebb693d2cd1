"""Fourth-order elasticity tensors in the orthonormal Mandel convention.

Symmetric 3x3 matrices are encoded as 6-vectors in the order
11, 22, 33, 23, 13, 12 with the three shear entries scaled by sqrt(2), so
that the Frobenius inner product of two symmetric matrices equals the
Euclidean product of their encodings. A tensor with minor and major
symmetry is then a symmetric 6x6 matrix ``c`` and its smallest eigenvalue
is the very-strong-ellipticity constant.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

SQRT2 = math.sqrt(2.0)

#: (i, j) index pair behind each Mandel slot.
MANDEL_PAIRS = ((0, 0), (1, 1), (2, 2), (1, 2), (0, 2), (0, 1))
_MANDEL_SCALE = np.array([1.0, 1.0, 1.0, SQRT2, SQRT2, SQRT2])
_SLOT = np.empty((3, 3), dtype=int)
for _a, (_i, _j) in enumerate(MANDEL_PAIRS):
    _SLOT[_i, _j] = _SLOT[_j, _i] = _a

SYMMETRY_RTOL = 1e-14


class InvalidInputError(ValueError):
    """Raised for malformed or out-of-domain input values."""


class DegenerateLayerError(ArithmeticError):
    """Raised when a layer's acoustic matrix is singular along the lamination axis."""

    def __init__(self, index: int, message: str | None = None):
        self.index = index
        super().__init__(message or f"layer {index} has a singular acoustic matrix")


def sym(M: np.ndarray) -> np.ndarray:
    M = np.asarray(M, dtype=float)
    return 0.5 * (M + M.T)


def to_mandel(M: np.ndarray) -> np.ndarray:
    """Encode the symmetric part of a 3x3 matrix as a Mandel 6-vector."""
    S = sym(M)
    return np.array([S[i, j] for i, j in MANDEL_PAIRS]) * _MANDEL_SCALE


def from_mandel(v: Sequence[float]) -> np.ndarray:
    """Decode a Mandel 6-vector into a symmetric 3x3 matrix."""
    v = np.asarray(v, dtype=float) / _MANDEL_SCALE
    S = np.empty((3, 3))
    for a, (i, j) in enumerate(MANDEL_PAIRS):
        S[i, j] = S[j, i] = v[a]
    return S


def mandel_to_full(c: np.ndarray) -> np.ndarray:
    """Expand a 6x6 Mandel matrix into the 3x3x3x3 component array L_ijkl."""
    c = np.asarray(c, dtype=float)
    w = c / np.outer(_MANDEL_SCALE, _MANDEL_SCALE)
    return w[_SLOT[:, :, None, None], _SLOT[None, None, :, :]]


def full_to_mandel(L: np.ndarray) -> np.ndarray:
    """Compress L_ijkl to Mandel form, symmetrizing over the minor indices."""
    L = np.asarray(L, dtype=float)
    L = 0.25 * (L + L.transpose(1, 0, 2, 3) + L.transpose(0, 1, 3, 2) + L.transpose(1, 0, 3, 2))
    c = np.empty((6, 6))
    for a, (i, j) in enumerate(MANDEL_PAIRS):
        for b, (k, l) in enumerate(MANDEL_PAIRS):
            c[a, b] = L[i, j, k, l] * _MANDEL_SCALE[a] * _MANDEL_SCALE[b]
    return c


@dataclass(frozen=True)
class IsotropicPhase:
    """Lame moduli of a homogeneous isotropic phase.

    With ``strongly_elliptic=True`` the constructor enforces ``mu > 0`` and
    ``lambda + 2 mu > 0``; otherwise any finite pair is accepted.
    """

    lam: float
    mu: float
    strongly_elliptic: bool = False

    def __post_init__(self):
        if not (math.isfinite(self.lam) and math.isfinite(self.mu)):
            raise InvalidInputError(f"non-finite Lame moduli ({self.lam}, {self.mu})")
        if self.strongly_elliptic and not (self.mu > 0 and self.lam + 2 * self.mu > 0):
            raise InvalidInputError(
                f"phase (lambda={self.lam}, mu={self.mu}) is not strongly elliptic")


@dataclass(frozen=True, eq=False)
class ElasticTensor:
    """Elasticity tensor with minor and major symmetry, stored as a 6x6 Mandel matrix."""

    c: np.ndarray

    def __post_init__(self):
        c = np.array(self.c, dtype=float)
        if c.shape != (6, 6):
            raise InvalidInputError(f"Mandel matrix must be 6x6, got {c.shape}")
        if not np.all(np.isfinite(c)):
            raise InvalidInputError("Mandel matrix has non-finite entries")
        scale = max(np.abs(c).max(), 1.0)
        if np.abs(c - c.T).max() > 10 * SYMMETRY_RTOL * scale:
            raise InvalidInputError("Mandel matrix is not symmetric (major symmetry violated)")
        c = 0.5 * (c + c.T)
        c.setflags(write=False)
        object.__setattr__(self, "c", c)

    @classmethod
    def from_full(cls, L: np.ndarray) -> "ElasticTensor":
        c = full_to_mandel(L)
        return cls(0.5 * (c + c.T))

    @property
    def full(self) -> np.ndarray:
        return mandel_to_full(self.c)

    def __add__(self, other: "ElasticTensor") -> "ElasticTensor":
        return ElasticTensor(self.c + other.c)

    def __mul__(self, s: float) -> "ElasticTensor":
        return ElasticTensor(s * self.c)

    __rmul__ = __mul__

    def apply(self, M: np.ndarray) -> np.ndarray:
        """Return the symmetric matrix L M (depends only on the symmetric part of M)."""
        return from_mandel(self.c @ to_mandel(M))

    def allclose(self, other: "ElasticTensor", atol: float = 0.0, rtol: float = 1e-12) -> bool:
        return bool(np.allclose(self.c, other.c, atol=atol, rtol=rtol))


#: The symmetric identity, I_s M = M^s.
IDENTITY_SYM = ElasticTensor(np.eye(6))


def iso_tensor(phase: IsotropicPhase) -> ElasticTensor:
    """Isotropic tensor L M = lambda tr(M) I + 2 mu M^s."""
    lam, mu = float(phase.lam), float(phase.mu)
    if not (math.isfinite(lam) and math.isfinite(mu)):
        raise InvalidInputError("non-finite Lame moduli")
    c = 2.0 * mu * np.eye(6)
    c[:3, :3] += lam
    return ElasticTensor(c)


def quadratic_form(L: ElasticTensor, M: np.ndarray) -> float:
    """Energy density L M : M."""
    m = to_mandel(M)
    return float(m @ L.c @ m)


def bilinear_form(L: ElasticTensor, M: np.ndarray, N: np.ndarray) -> float:
    """L M : N."""
    return float(to_mandel(M) @ L.c @ to_mandel(N))


def cofactor(M: np.ndarray) -> np.ndarray:
    """Cofactor matrix, ``Cof(M)_ij = (-1)**(i+j) det(minor_ij)``."""
    M = np.asarray(M, dtype=float)
    C = np.empty((3, 3))
    for i in range(3):
        r = [k for k in range(3) if k != i]
        for j in range(3):
            s = [k for k in range(3) if k != j]
            C[i, j] = (-1) ** (i + j) * (M[r[0], s[0]] * M[r[1], s[1]] - M[r[0], s[1]] * M[r[1], s[0]])
    return C


def adjugate(M: np.ndarray) -> np.ndarray:
    return cofactor(M).T


def minor(M: np.ndarray, i: int, j: int) -> np.ndarray:
    """Matrix obtained by deleting row ``i`` and column ``j`` (0-based)."""
    M = np.asarray(M, dtype=float)
    return np.delete(np.delete(M, i, axis=0), j, axis=1)


def acoustic_matrix(L: ElasticTensor, n: Sequence[float] | int) -> np.ndarray:
    """Acoustic matrix ``A_ik = L_ijkl n_j n_l``.

    ``n`` is either a unit 3-vector or an axis number 1, 2 or 3.
    """
    n = axis_vector(n) if isinstance(n, (int, np.integer)) else np.asarray(n, dtype=float)
    if abs(np.linalg.norm(n) - 1.0) > 1e-12:
        raise InvalidInputError("direction must be a unit vector")
    A = np.einsum("ijkl,j,l->ik", L.full, n, n)
    return 0.5 * (A + A.T)


def axis_vector(axis: int) -> np.ndarray:
    if axis not in (1, 2, 3):
        raise InvalidInputError(f"axis must be 1, 2 or 3, got {axis}")
    e = np.zeros(3)
    e[axis - 1] = 1.0
    return e


def perturb(L: ElasticTensor, delta: float) -> ElasticTensor:
    """L + delta * I_s."""
    if not (delta >= 0 and math.isfinite(delta)):
        raise InvalidInputError(f"perturbation must be a finite non-negative number, got {delta}")
    if delta == 0:
        return L
    return ElasticTensor(L.c + delta * np.eye(6))


def permute_axes(L: ElasticTensor, perm: Sequence[int]) -> ElasticTensor:
    """Relabel coordinates: the new axis ``i`` is the old axis ``perm[i]`` (0-based)."""
    P = np.eye(3)[list(perm)]
    return rotate(L, P)


def rotate(L: ElasticTensor, R: np.ndarray) -> ElasticTensor:
    """Push L forward by the orthogonal map R: L'_ijkl = R_ia R_jb R_kc R_ld L_abcd."""
    R = np.asarray(R, dtype=float)
    Lf = np.einsum("ia,jb,kc,ld,abcd->ijkl", R, R, R, R, L.full)
    return ElasticTensor.from_full(Lf)


def swap_matrix(axis: int) -> np.ndarray:
    """Permutation matrix exchanging coordinate 1 with ``axis`` (identity for axis 1)."""
    perm = [0, 1, 2]
    perm[0], perm[axis - 1] = perm[axis - 1], perm[0]
    return np.eye(3)[perm]


@dataclass(frozen=True)
class LaminateProfile:
    """One-directional periodic layering of homogeneous tensors.

    Layers occupy consecutive intervals of the unit period along ``axis``
    in the order given.
    """

    axis: int
    layers: tuple

    def __post_init__(self):
        if self.axis not in (1, 2, 3):
            raise InvalidInputError(f"axis must be 1, 2 or 3, got {self.axis}")
        layers = tuple((t, float(f)) for t, f in self.layers)
        if not layers:
            raise InvalidInputError("a profile needs at least one layer")
        for k, (t, f) in enumerate(layers):
            if not isinstance(t, ElasticTensor):
                raise InvalidInputError(f"layer {k} is not an ElasticTensor")
            if not (0.0 < f <= 1.0):
                raise InvalidInputError(f"layer {k} has fraction {f} outside (0, 1]")
        total = sum(f for _, f in layers)
        if abs(total - 1.0) > 1e-12:
            raise InvalidInputError(f"layer fractions sum to {total!r}, not 1")
        object.__setattr__(self, "layers", layers)

    @property
    def tensors(self) -> list[ElasticTensor]:
        return [t for t, _ in self.layers]

    @property
    def fractions(self) -> np.ndarray:
        return np.array([f for _, f in self.layers])

    def perturbed(self, delta: float) -> "LaminateProfile":
        return LaminateProfile(self.axis, tuple((perturb(t, delta), f) for t, f in self.layers))

    def average(self) -> ElasticTensor:
        """Arithmetic (Voigt) average of the layer tensors."""
        return ElasticTensor(sum(f * t.c for t, f in self.layers))


def two_phase_profile(first: ElasticTensor, second: ElasticTensor, theta: float,
                      axis: int = 1) -> LaminateProfile:
    """Profile with ``first`` on a fraction ``theta`` and ``second`` on the rest."""
    if not (0.0 < theta < 1.0):
        raise InvalidInputError(f"volume fraction {theta} must lie in (0, 1)")
    return LaminateProfile(axis, ((first, theta), (second, 1.0 - theta)))
