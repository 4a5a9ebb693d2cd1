"""Rank-one lamination formulas.

:func:`laminate_general` implements the three averaged relations of
one-directional (1*) convergence along a coordinate axis ``n``:

1. ``A[L*]^-1 = <A[L]^-1>`` with ``A[L]_ik = L_inkn``;
2. ``A[L*]^-1 L*_n... = <A[L]^-1 L_n...>`` for the mixed entries;
3. ``L* - L*_..n A[L*]^-1 L*_n.. = <L - L_..n A[L]^-1 L_n..>`` (Schur complement).

:func:`laminate_isotropic_pair` is the closed form for two isotropic
phases along e1 in terms of the moduli A, B, C, D, E.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .tensors import (DegenerateLayerError, ElasticTensor, InvalidInputError, IsotropicPhase,
                      LaminateProfile, iso_tensor, quadratic_form)

ACOUSTIC_RCOND = 1e-13


@dataclass(frozen=True)
class LaminateModuli:
    A: float
    B: float
    C: float
    D: float
    E: float

    def as_dict(self) -> dict:
        return {"A": self.A, "B": self.B, "C": self.C, "D": self.D, "E": self.E}


def laminate_moduli(a: IsotropicPhase, b: IsotropicPhase, theta1: float) -> LaminateModuli:
    if not (0.0 <= theta1 <= 1.0):
        raise InvalidInputError(f"theta1={theta1} outside [0, 1]")
    for name, p in (("a", a), ("b", b)):
        if not (p.mu > 0 and 2 * p.mu + p.lam > 0):
            raise InvalidInputError(
                f"phase {name} (lambda={p.lam}, mu={p.mu}) is not strongly elliptic")
    t, s = theta1, 1.0 - theta1
    pa, pb = 2 * a.mu + a.lam, 2 * b.mu + b.lam
    return LaminateModuli(
        A=t / pa + s / pb,
        B=t * a.lam / pa + s * b.lam / pb,
        C=t * a.mu + s * b.mu,
        D=t * a.mu * a.lam / pa + s * b.mu * b.lam / pb,
        E=t / a.mu + s / b.mu,
    )


def tensor_from_moduli(m: LaminateModuli) -> ElasticTensor:
    """Assemble the orthotropic laminate tensor (lamination axis e1) from A..E."""
    A, B, C, D, E = m.A, m.B, m.C, m.D, m.E
    L = np.zeros((3, 3, 3, 3))

    def put(i, j, k, l, v):
        for p, q in ((i, j), (j, i)):
            for r, s in ((k, l), (l, k)):
                L[p, q, r, s] = v
                L[r, s, p, q] = v

    put(0, 0, 0, 0, 1.0 / A)
    put(0, 0, 1, 1, B / A)
    put(0, 0, 2, 2, B / A)
    put(0, 1, 0, 1, 1.0 / E)
    put(0, 2, 0, 2, 1.0 / E)
    put(1, 1, 1, 1, B * B / A + 2 * (C + D))
    put(2, 2, 2, 2, B * B / A + 2 * (C + D))
    put(1, 1, 2, 2, B * B / A + 2 * D)
    put(1, 2, 1, 2, C)
    return ElasticTensor.from_full(L)


def laminate_isotropic_pair(a: IsotropicPhase, b: IsotropicPhase,
                            theta1: float) -> tuple[LaminateModuli, ElasticTensor]:
    """Effective tensor of ``a`` (fraction theta1) and ``b`` laminated along e1."""
    m = laminate_moduli(a, b, theta1)
    return m, tensor_from_moduli(m)


def _acoustic_inverse(Lf: np.ndarray, n: int, index: int) -> np.ndarray:
    K = Lf[:, n, :, n]
    K = 0.5 * (K + K.T)
    w = np.linalg.eigvalsh(K)
    if abs(w).min() <= ACOUSTIC_RCOND * max(abs(w).max(), 1.0):
        raise DegenerateLayerError(index)
    return np.linalg.inv(K)


def laminate_general(layers: Sequence[tuple[ElasticTensor, float]] | LaminateProfile,
                     axis: int | None = None) -> ElasticTensor:
    """Effective tensor of a layered medium along a coordinate axis (1, 2 or 3)."""
    if isinstance(layers, LaminateProfile):
        axis = layers.axis if axis is None else axis
        layers = layers.layers
    if axis not in (1, 2, 3):
        raise InvalidInputError(f"axis must be 1, 2 or 3, got {axis}")
    total = sum(f for _, f in layers)
    if abs(total - 1.0) > 1e-12:
        raise InvalidInputError(f"layer fractions sum to {total!r}, not 1")
    n = axis - 1
    Kinv_avg = np.zeros((3, 3))
    mixed_avg = np.zeros((3, 3, 3))       # <K^-1_im L_nmkl>
    schur_avg = np.zeros((3, 3, 3, 3))    # <L_ijkl - L_ijnm K^-1_mp L_npkl>
    for idx, (t, f) in enumerate(layers):
        Lf = t.full
        Kinv = _acoustic_inverse(Lf, n, idx)
        Ln = Lf[n]                           # L_nmkl, indices m,k,l
        Kinv_avg += f * Kinv
        mixed_avg += f * np.einsum("im,mkl->ikl", Kinv, Ln)
        schur_avg += f * (Lf - np.einsum("ijm,mp,pkl->ijkl", Lf[:, :, n, :], Kinv, Ln))
    K_star = np.linalg.inv(Kinv_avg)
    Ln_star = np.einsum("mi,ikl->mkl", K_star, mixed_avg)
    L_star = schur_avg + np.einsum("mij,mp,pkl->ijkl", Ln_star, Kinv_avg, Ln_star)
    return ElasticTensor.from_full(L_star)


def delta_sweep(profile: LaminateProfile, M: np.ndarray, deltas: Sequence[float]) -> list[float]:
    """Homogenized energies of the perturbed profiles ``L + delta I_s``.

    Returns one value per entry of ``deltas`` (which must be positive and
    strictly descending) followed by the unperturbed value.
    """
    deltas = [float(d) for d in deltas]
    if any(d <= 0 for d in deltas):
        raise InvalidInputError("perturbations must be positive")
    if any(d1 <= d2 for d1, d2 in zip(deltas, deltas[1:])):
        raise InvalidInputError("perturbations must be strictly descending")
    out = [quadratic_form(laminate_general(profile.perturbed(d)), M) for d in deltas]
    out.append(quadratic_form(laminate_general(profile), M))
    return out


def laminate_isotropic_profile(phases: Sequence[IsotropicPhase], fractions: Sequence[float],
                               axis: int = 1) -> LaminateProfile:
    return LaminateProfile(axis, tuple((iso_tensor(p), f) for p, f in zip(phases, fractions)))
