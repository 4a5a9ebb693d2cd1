"""Phase classification and sufficient conditions for periodic coercivity,
plus the rank-one loss test for laminates along e1.

For isotropic phases and a translation D = d I_3 the translated energy
splits into a 3x3 form ``P`` on the diagonal gradient entries and three
2x2 forms ``Q`` on the off-diagonal pairs. Phases where ``d = 4 mu`` (set I)
or ``2 mu + 3 lambda = -d`` (set J) make one of these degenerate.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import Sequence

import numpy as np

from .tensors import (DegenerateLayerError, ElasticTensor, InvalidInputError, IsotropicPhase,
                      LaminateProfile, bilinear_form, cofactor, minor, permute_axes,
                      quadratic_form)
from .translation import scalar_translation_interval

CLASSIFY_RTOL = 1e-12
PSD_TOL = 1e-12
LOSS_TOL = 1e-9
RANK_ONE_TOL = 1e-10


def _close(x: float, y: float, rtol: float = CLASSIFY_RTOL) -> bool:
    return abs(x - y) <= rtol * max(abs(x), abs(y), 1.0)


@dataclass
class PhaseClassification:
    d: float
    I: list
    J: list
    K: list

    def as_dict(self) -> dict:
        return {"d": self.d, "I": self.I, "J": self.J, "K": self.K}


def classify_phases(phases: Sequence[IsotropicPhase], d: float) -> PhaseClassification:
    """Split phase indices (0-based) by which boundary of the d-window they touch."""
    I, J, K = [], [], []
    for k, p in enumerate(phases):
        if _close(d, 4 * p.mu):
            I.append(k)
        elif _close(2 * p.mu + 3 * p.lam, -d):
            J.append(k)
        else:
            K.append(k)
    return PhaseClassification(d, I, J, K)


def P_matrix(phase: IsotropicPhase, d: float) -> np.ndarray:
    """Form on (d1 v1, d2 v2, d3 v3)."""
    lam, mu = phase.lam, phase.mu
    off = lam + d / 2
    P = np.full((3, 3), off)
    np.fill_diagonal(P, lam + 2 * mu)
    return P


def Q_matrix(phase: IsotropicPhase, d: float) -> np.ndarray:
    """Form on an off-diagonal pair (d_j v_i, d_i v_j)."""
    mu = phase.mu
    return np.array([[mu, mu - d / 2], [mu - d / 2, mu]])


class GeometryCase(str, Enum):
    CASE1 = "case1"
    CASE2 = "case2"
    NONE = "none"


class Verdict(str, Enum):
    GUARANTEED_POSITIVE = "guaranteed_positive"
    INCONCLUSIVE = "inconclusive"


@dataclass
class PerCoercivityVerdict:
    classification: PhaseClassification | None
    P_min_eig: list
    Q_min_eig: list
    geometry_case: GeometryCase
    verdict: Verdict
    reasons: list = field(default_factory=list)

    def as_dict(self) -> dict:
        return {
            "classification": self.classification.as_dict() if self.classification else None,
            "P_min_eig": self.P_min_eig,
            "Q_min_eig": self.Q_min_eig,
            "geometry_case": self.geometry_case.value,
            "verdict": self.verdict.value,
            "reasons": self.reasons,
        }


def lambda_per_sufficient(phases: Sequence[IsotropicPhase], d: float | None = None,
                          case1: Sequence[bool] | bool = False,
                          case2: Sequence[bool] | bool = False,
                          slabs: bool = False) -> PerCoercivityVerdict:
    """Sufficient test for positive periodic coercivity of a piecewise isotropic tensor.

    ``case1``/``case2`` are caller-declared geometric facts, per phase or for
    all phases: case 1 means the phase's boundary contains a rectangle on
    a pair of opposite cell faces, case 2 that it shares a boundary patch of
    positive area with a phase in K. ``slabs=True`` (laminates) implies case 1
    for every phase. ``d=None`` picks the lower end of the clamped window.
    The verdict is ``guaranteed_positive`` only when every hypothesis holds.
    """
    p = len(phases)
    flags1 = [True] * p if slabs else _per_phase(case1, p)
    flags2 = _per_phase(case2, p)
    clamped, signed = scalar_translation_interval(phases)
    reasons = []
    if d is None:
        if clamped.empty:
            return PerCoercivityVerdict(None, [], [], GeometryCase.NONE, Verdict.INCONCLUSIVE,
                                        ["no admissible translation constant d"])
        d = clamped.lo
    cls = classify_phases(phases, d)
    P_eigs = [float(np.linalg.eigvalsh(P_matrix(ph, d))[0]) for ph in phases]
    Q_eigs = [float(np.linalg.eigvalsh(Q_matrix(ph, d))[0]) for ph in phases]
    ok = True
    if not signed.contains(d, tol=CLASSIFY_RTOL * max(abs(d), 1.0)):
        ok = False
        reasons.append(f"d={d} outside [{signed.lo}, {signed.hi}]")
    if d < 0:
        ok = False
        reasons.append("d must be non-negative")
    scale = max(max(abs(ph.lam) + 2 * abs(ph.mu) for ph in phases), 1.0)
    if min(P_eigs + Q_eigs) < -PSD_TOL * scale:
        ok = False
        reasons.append("P or Q not positive semidefinite")
    case = GeometryCase.NONE
    if cls.J:
        if all(flags1[j] for j in cls.J):
            case = GeometryCase.CASE1
        elif all(flags2[j] for j in cls.J):
            case = GeometryCase.CASE2
        else:
            ok = False
            reasons.append("phases in J lack a declared geometric case")
    verdict = Verdict.GUARANTEED_POSITIVE if ok else Verdict.INCONCLUSIVE
    return PerCoercivityVerdict(cls, P_eigs, Q_eigs, case, verdict, reasons)


def _per_phase(flag, p: int) -> list:
    if isinstance(flag, bool):
        return [flag] * p
    flag = list(flag)
    if len(flag) != p:
        raise InvalidInputError(f"expected {p} geometry flags, got {len(flag)}")
    return [bool(x) for x in flag]


# --- rank-one loss test ---------------------------------------------------

E = np.eye(3)


def _e(i: int, j: int) -> np.ndarray:
    return np.outer(E[i], E[j])


def _acoustic_e1(L: ElasticTensor) -> np.ndarray:
    """Matrix of (xi, eta) -> L(xi x e1):(eta x e1)."""
    return np.array([[bilinear_form(L, _e(i, 0), _e(k, 0)) for k in range(3)] for i in range(3)])


def _brackets(L: ElasticTensor, d: float, M: np.ndarray) -> np.ndarray:
    """The three linear coefficients of the corrector derivative."""
    M = np.asarray(M, dtype=float)
    return np.array([
        bilinear_form(L, M, _e(0, 0)) + 0.5 * d * (M[1, 1] + M[2, 2]),
        bilinear_form(L, M, _e(1, 0)) - 0.5 * d * M[0, 1],
        bilinear_form(L, M, _e(2, 0)) - 0.5 * d * M[0, 2],
    ])


def _minors(A: np.ndarray) -> np.ndarray:
    """m[i, j] = det of A with row i and column j removed."""
    return np.array([[np.linalg.det(minor(A, i, j)) for j in range(3)] for i in range(3)])


def Q_of_M(L: ElasticTensor, d: float, M: np.ndarray) -> float:
    """Lower bound Q(M) for L M:M over rank-one M, written with the minors of
    the e1-acoustic matrix (equal to b^T A^-1 b)."""
    A = _acoustic_e1(L)
    det = np.linalg.det(A)
    if abs(det) <= 1e-14 * max(abs(A).max(), 1.0) ** 3:
        raise DegenerateLayerError(0, "acoustic matrix along e1 is singular")
    m = _minors(A) / det
    b = _brackets(L, d, M)
    return float(m[0, 0] * b[0] ** 2 + m[1, 1] * b[1] ** 2 + m[2, 2] * b[2] ** 2
                 - 2 * m[0, 1] * b[0] * b[1] + 2 * m[0, 2] * b[0] * b[2]
                 - 2 * m[1, 2] * b[1] * b[2])


def _integral_residuals(layers, d: float, M: np.ndarray) -> np.ndarray:
    """LHS - RHS of the three averaged corrector conditions (fraction-weighted sums)."""
    r = np.zeros(3)
    for L, f in layers:
        A = _acoustic_e1(L)
        det = np.linalg.det(A)
        m = _minors(A) / det
        b = _brackets(L, d, M)
        r[0] += f * (m[0, 2] * b[0] - (m[1, 2] * b[1] - m[2, 2] * b[2]))
        r[1] += f * (m[0, 1] * b[0] - (m[1, 1] * b[1] - m[1, 2] * b[2]))
        r[2] += f * (m[0, 0] * b[0] - (m[0, 1] * b[1] - m[0, 2] * b[2]))
    return r


class LossVerdict(str, Enum):
    LOSS_POSSIBLE = "loss_possible"
    NO_LOSS_AT_M = "no_loss_at_M"


@dataclass
class Rank1LossCertificate:
    M: np.ndarray
    d: float
    pointwise_residuals: list
    integral_residuals: list
    verdict: LossVerdict

    def as_dict(self) -> dict:
        return {"M": np.asarray(self.M).tolist(), "d": self.d,
                "pointwise_residuals": self.pointwise_residuals,
                "integral_residuals": self.integral_residuals,
                "verdict": self.verdict.value}


def rank1_loss_certificate(profile: LaminateProfile, d: float, M: np.ndarray,
                           tol: float = LOSS_TOL) -> Rank1LossCertificate:
    """Test whether the homogenized laminate can lose strong ellipticity at ``M``.

    Loss at a rank-one ``M`` requires ``L M:M = Q(M)`` in every layer and the
    three averaged corrector conditions; the verdict reports whether both
    hold to ``tol`` relative to the tensor scale. Profiles along e2 or e3
    are mapped to e1 by a coordinate swap first (``M`` is swapped too).
    """
    M = np.asarray(M, dtype=float)
    if np.linalg.norm(cofactor(M)) > RANK_ONE_TOL * max(np.linalg.norm(M) ** 2, 1e-300):
        raise InvalidInputError("M must be rank one")
    layers = profile.layers
    if profile.axis != 1:
        perm = [0, 1, 2]
        perm[0], perm[profile.axis - 1] = perm[profile.axis - 1], perm[0]
        layers = tuple((permute_axes(t, perm), f) for t, f in layers)
        P = np.eye(3)[perm]
        M = P @ M @ P.T
    for idx, (t, _) in enumerate(layers):
        if abs(np.linalg.det(_acoustic_e1(t))) <= 1e-14 * max(abs(t.c).max(), 1.0) ** 3:
            raise DegenerateLayerError(idx)
    mnorm = np.linalg.norm(M)
    scale = max(max(abs(t.c).max() for t, _ in layers), 1.0)
    pointwise = [quadratic_form(t, M) - Q_of_M(t, d, M) for t, _ in layers]
    integral = _integral_residuals(layers, d, M)
    ok = (max(abs(x) for x in pointwise) <= tol * scale * mnorm ** 2
          and float(np.abs(integral).max()) <= tol * mnorm)
    return Rank1LossCertificate(M, d, [float(x) for x in pointwise], [float(x) for x in integral],
                                LossVerdict.LOSS_POSSIBLE if ok else LossVerdict.NO_LOSS_AT_M)


def isotropic_reduced_gap(phase: IsotropicPhase, d: float, xi: np.ndarray, eta: np.ndarray) -> float:
    """Closed form of L M:M - Q(M) for isotropic L and M = xi x eta."""
    lam, mu = phase.lam, phase.mu
    p = lam + 2 * mu
    return ((p * p - (lam + d / 2) ** 2) / p * (xi[1] * eta[1] + xi[2] * eta[2]) ** 2
            + mu * (xi[1] * eta[2] - xi[2] * eta[1]) ** 2
            + d * (mu - d / 4) / mu * xi[0] ** 2 * (eta[1] ** 2 + eta[2] ** 2))


def isotropic_Q_of_M(phase: IsotropicPhase, d: float, xi: np.ndarray, eta: np.ndarray) -> float:
    """Q(M) for isotropic L written directly with the diagonal acoustic matrix
    diag(lambda + 2 mu, mu, mu)."""
    lam, mu = phase.lam, phase.mu
    p = lam + 2 * mu
    s = xi[1] * eta[1] + xi[2] * eta[2]
    return ((p * xi[0] * eta[0] + lam * s + 0.5 * d * s) ** 2 / p
            + (mu * (xi[0] * eta[1] + xi[1] * eta[0]) - 0.5 * d * xi[0] * eta[1]) ** 2 / mu
            + (mu * (xi[0] * eta[2] + xi[2] * eta[0]) - 0.5 * d * xi[0] * eta[2]) ** 2 / mu)

