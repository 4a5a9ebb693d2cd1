"""Translated quadratic form L M:M + D:Cof(M) and weak-coercivity certificates.

A 3x3 matrix M is flattened in the fixed order
(11, 22, 33, 12, 21, 13, 31, 23, 32). The translated form is then
``m^T Q m`` with ``Q`` an explicit symmetric 9x9 matrix. If ``Q`` is positive
semidefinite in every layer of a laminate for one constant D, the cofactor
term integrates to zero (null Lagrangian) and the laminate is weakly
coercive.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy.optimize import minimize_scalar

from .tensors import ElasticTensor, IsotropicPhase, LaminateProfile

#: Flattening order of a 3x3 matrix (0-based index pairs).
BASIS = ((0, 0), (1, 1), (2, 2), (0, 1), (1, 0), (0, 2), (2, 0), (1, 2), (2, 1))
BASIS_LABELS = ("11", "22", "33", "12", "21", "13", "31", "23", "32")
PSD_RTOL = 1e-10


def flatten(M: np.ndarray) -> np.ndarray:
    M = np.asarray(M, dtype=float)
    return np.array([M[i, j] for i, j in BASIS])


def unflatten(m: Sequence[float]) -> np.ndarray:
    M = np.empty((3, 3))
    for v, (i, j) in zip(m, BASIS):
        M[i, j] = v
    return M


def _levi_civita() -> np.ndarray:
    e = np.zeros((3, 3, 3))
    for (i, j, k), s in (((0, 1, 2), 1), ((1, 2, 0), 1), ((2, 0, 1), 1),
                         ((0, 2, 1), -1), ((2, 1, 0), -1), ((1, 0, 2), -1)):
        e[i, j, k] = s
    return e


_EPS = _levi_civita()
# Cof(M)_ij = 1/2 eps_ipq eps_jrs M_pr M_qs, so D:Cof(M) = M_pr K_prqs M_qs with
# K_prqs = 1/2 D_ij eps_ipq eps_jrs.
_COF_KERNEL = 0.5 * np.einsum("ipq,jrs->ijprqs", _EPS, _EPS)
_IDX = np.array([3 * i + j for i, j in BASIS])


def _to_basis(K: np.ndarray) -> np.ndarray:
    """Reorder a (3,3,3,3) bilinear kernel on 3x3 matrices into the 9x9 basis order."""
    K9 = K.reshape(9, 9)
    return K9[np.ix_(_IDX, _IDX)]


def cofactor_form_matrix(D: np.ndarray) -> np.ndarray:
    """9x9 symmetric matrix of the quadratic form M -> D:Cof(M)."""
    D = np.asarray(D, dtype=float)
    K = np.einsum("ij,ijprqs->prqs", D, _COF_KERNEL)
    return _to_basis(K)


def elastic_form_matrix(L: ElasticTensor) -> np.ndarray:
    """9x9 matrix of M -> L M:M on all (not only symmetric) 3x3 matrices."""
    return _to_basis(L.full)


def translated_form_matrix(L: ElasticTensor, D: np.ndarray) -> np.ndarray:
    Q = elastic_form_matrix(L) + cofactor_form_matrix(D)
    return 0.5 * (Q + Q.T)


def printed_isotropic_matrix(lam: float, mu: float, D: np.ndarray) -> np.ndarray:
    """The 9x9 matrix for an isotropic phase exactly as displayed in the source
    (kept for audit comparison only; row 2, column 7 carries +D13/2 there)."""
    D = np.asarray(D, dtype=float)
    d = lambda i, j: D[i - 1, j - 1] / 2  # noqa: E731
    p = lam + 2 * mu
    return np.array([
        [p, lam + d(3, 3), lam + d(2, 2), 0, 0, 0, 0, -d(3, 2), -d(2, 3)],
        [lam + d(3, 3), p, lam + d(1, 1), 0, 0, -d(3, 1), d(1, 3), 0, 0],
        [lam + d(2, 2), lam + d(1, 1), p, -d(2, 1), -d(1, 2), 0, 0, 0, 0],
        [0, 0, -d(2, 1), mu, mu - d(3, 3), 0, d(2, 3), d(3, 1), 0],
        [0, 0, -d(1, 2), mu - d(3, 3), mu, d(3, 2), 0, 0, d(1, 3)],
        [0, -d(3, 1), 0, 0, d(3, 2), mu, mu - d(2, 2), 0, d(2, 1)],
        [0, -d(1, 3), 0, d(2, 3), 0, mu - d(2, 2), mu, d(1, 2), 0],
        [-d(3, 2), 0, 0, d(3, 1), 0, 0, d(1, 2), mu, mu - d(1, 1)],
        [-d(2, 3), 0, 0, 0, d(1, 3), d(2, 1), 0, mu - d(1, 1), mu],
    ])


def audit_printed_matrix(lam: float, mu: float, D: np.ndarray, tol: float = 1e-12) -> list[dict]:
    """Entries where the displayed 9x9 matrix differs from the derived one."""
    from .tensors import iso_tensor

    derived = translated_form_matrix(iso_tensor(IsotropicPhase(lam, mu)), D)
    printed = printed_isotropic_matrix(lam, mu, D)
    out = []
    for r, c in zip(*np.nonzero(np.abs(derived - printed) > tol)):
        out.append({"row": BASIS_LABELS[r], "col": BASIS_LABELS[c],
                    "derived": float(derived[r, c]), "printed": float(printed[r, c])})
    return out


def min_eig(Q: np.ndarray) -> float:
    return float(np.linalg.eigvalsh(Q)[0])


def is_psd(Q: np.ndarray, rtol: float = PSD_RTOL) -> bool:
    w = np.linalg.eigvalsh(Q)
    return bool(w[0] >= -rtol * max(abs(w).max(), 0.0))


@dataclass
class ScalarInterval:
    lo: float
    hi: float

    @property
    def empty(self) -> bool:
        return self.lo > self.hi

    def contains(self, d: float, tol: float = 0.0) -> bool:
        return self.lo - tol <= d <= self.hi + tol

    def as_list(self) -> list[float]:
        return [self.lo, self.hi]


def scalar_translation_interval(phases: Sequence[IsotropicPhase]) -> tuple[ScalarInterval, ScalarInterval]:
    """Admissible d for D = d I_3 across isotropic phases.

    Returns ``(clamped, signed)``: the clamped interval uses
    ``max(0, -2mu-3lambda) <= d <= 4 mu`` per phase; the signed one drops the
    clamp at zero.
    """
    if not phases:
        raise ValueError("need at least one phase")
    signed_lo = max(-(2 * p.mu + 3 * p.lam) for p in phases)
    hi = 4.0 * min(p.mu for p in phases)
    return ScalarInterval(max(0.0, signed_lo), hi), ScalarInterval(signed_lo, hi)


@dataclass
class TranslationCertificate:
    D: np.ndarray
    per_phase_min_eig: list
    feasible: bool
    scalar_interval: list | None = None
    signed_interval: list | None = None
    method: str = "given"
    notes: list = field(default_factory=list)

    @property
    def objective(self) -> float:
        return min(self.per_phase_min_eig)

    def as_dict(self) -> dict:
        return {
            "D": np.asarray(self.D).tolist(),
            "per_phase_min_eig": [float(x) for x in self.per_phase_min_eig],
            "feasible": self.feasible,
            "scalar_interval": self.scalar_interval,
            "signed_interval": self.signed_interval,
            "method": self.method,
            "notes": list(self.notes),
        }


def certify_weak_coercivity(profile: LaminateProfile, D: np.ndarray,
                            rtol: float = PSD_RTOL) -> TranslationCertificate:
    """Check that L M:M + D:Cof(M) >= 0 in every layer of ``profile``."""
    D = np.asarray(D, dtype=float)
    eigs, ok = [], True
    for t in profile.tensors:
        Q = translated_form_matrix(t, D)
        w = np.linalg.eigvalsh(Q)
        eigs.append(float(w[0]))
        ok &= bool(w[0] >= -rtol * abs(w).max())
    return TranslationCertificate(D=D, per_phase_min_eig=eigs, feasible=ok)


def _objective(mats: list, D: np.ndarray) -> float:
    C = cofactor_form_matrix(D)
    return min(min_eig(Q + C) for Q in mats)


def _isotropic_guess(profile: LaminateProfile) -> list[float]:
    """Scalar interval endpoints from the isotropic part of each layer, if any."""
    phases = []
    for t in profile.tensors:
        c = t.c
        mu = 0.5 * c[3, 3]
        lam = c[0, 1]
        phases.append(IsotropicPhase(lam, mu))
    clamped, signed = scalar_translation_interval(phases)
    return [clamped.lo, clamped.hi, 0.5 * (clamped.lo + clamped.hi), 0.0, signed.lo]


def search_diagonal_D(profile: LaminateProfile, sweeps: int = 30, full_refine: bool = True,
                      refine_iters: int = 400) -> TranslationCertificate:
    """Best-effort search for a translation matrix D certifying weak coercivity.

    Maximizes the concave objective ``min over layers of lambda_min(Q(D))``
    over diagonal D by cyclic coordinate maximization from several scalar
    starts (d I_3). If the best diagonal D is infeasible, a full 9-parameter
    subgradient ascent follows from it.
    """
    mats = [elastic_form_matrix(t) for t in profile.tensors]
    scale = max(max(abs(np.linalg.eigvalsh(Q)).max() for Q in mats), 1e-300)
    bound = 8.0 * scale
    best_val, best_D = -math.inf, np.zeros((3, 3))
    for d0 in _isotropic_guess(profile):
        diag = np.full(3, d0)
        val = _objective(mats, np.diag(diag))
        for _ in range(sweeps):
            prev = val
            for k in range(3):
                def f(x, k=k):
                    trial = diag.copy()
                    trial[k] = x
                    return -_objective(mats, np.diag(trial))
                res = minimize_scalar(f, bounds=(-bound, bound), method="bounded",
                                      options={"xatol": 1e-13 * scale})
                if -res.fun >= val:
                    diag[k], val = res.x, -res.fun
            if val - prev <= 1e-14 * scale:
                break
        if val > best_val:
            best_val, best_D = val, np.diag(diag)
    method = "diagonal coordinate search"
    cert = certify_weak_coercivity(profile, best_D)
    if not cert.feasible and full_refine:
        D_full, val_full = _subgradient_refine(mats, best_D, refine_iters, scale)
        if val_full > best_val:
            cert = certify_weak_coercivity(profile, D_full)
            method = "full-matrix subgradient refinement"
    cert.method = method
    return cert


def _subgradient_refine(mats: list, D0: np.ndarray, iters: int, scale: float):
    """Projected subgradient ascent on lambda_min over all 3x3 D (box |D_ij| <= 8 scale)."""
    bound = 8.0 * scale
    basis = [cofactor_form_matrix(np.eye(3)[:, [i]] @ np.eye(3)[[j], :])
             for i in range(3) for j in range(3)]
    D = D0.copy()
    best_val, best_D = _objective(mats, D), D.copy()
    step0 = 0.1 * scale
    for k in range(1, iters + 1):
        C = cofactor_form_matrix(D)
        vals = []
        for Q in mats:
            w, V = np.linalg.eigh(Q + C)
            vals.append((w[0], V[:, 0]))
        lam, v = min(vals, key=lambda p: p[0])
        g = np.array([v @ B @ v for B in basis]).reshape(3, 3)
        gn = np.linalg.norm(g)
        if gn == 0:
            break
        D = np.clip(D + (step0 / math.sqrt(k)) * g / gn, -bound, bound)
        val = _objective(mats, D)
        if val > best_val:
            best_val, best_D = val, D.copy()
    return best_D, best_val
