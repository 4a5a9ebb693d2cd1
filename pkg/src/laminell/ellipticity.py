"""Strong and very strong ellipticity constants.

``alpha_se`` minimizes the biquadratic form L(a x b):(a x b) over unit
vectors a, b; ``alpha_vse`` minimizes L M:M over unit symmetric M. For a
single constant tensor the sign of ``alpha_se`` is also the sign of the
functional coercivity constant, which :func:`lambda_sign_constant` reports.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum

import numpy as np
from scipy.optimize import minimize

from .tensors import SQRT2, ElasticTensor, IsotropicPhase, LaminateProfile

ZERO_TOL = 1e-8
N_STARTS = 32
MAX_ITER = 500
SCREEN_ITER = 40
KEEP_BRANCHES = 3
STEP_TOL = 1e-12


def alpha_se_isotropic(phase: IsotropicPhase) -> float:
    return min(phase.mu, 2.0 * phase.mu + phase.lam)


def alpha_vse_isotropic(phase: IsotropicPhase) -> float:
    """min{mu, 2 mu + 3 lambda}: same sign as the unit-norm minimum, not the same value."""
    return min(phase.mu, 2.0 * phase.mu + 3.0 * phase.lam)


def alpha_vse_isotropic_unit(phase: IsotropicPhase) -> float:
    """Minimum of L M:M over unit symmetric M; the Mandel spectrum is {3 lambda + 2 mu, 2 mu}."""
    return min(2.0 * phase.mu, 2.0 * phase.mu + 3.0 * phase.lam)


def alpha_vse_numeric(L: ElasticTensor) -> float:
    return float(np.linalg.eigvalsh(L.c)[0])


def fibonacci_sphere(n: int) -> np.ndarray:
    """``n`` nearly uniform unit vectors (deterministic)."""
    k = np.arange(n) + 0.5
    z = 1.0 - 2.0 * k / n
    r = np.sqrt(1.0 - z * z)
    phi = math.pi * (1.0 + math.sqrt(5.0)) * k
    return np.column_stack([r * np.cos(phi), r * np.sin(phi), z])


@dataclass
class EllipticityReport:
    """Outcome of the numerical strong-ellipticity minimization.

    ``alpha_se`` uses unit ``a`` and ``b`` (so |a x b| = 1). The second
    minimum ``alpha_se_normalized`` divides by |(a x b)^s|^2 instead, i.e. it
    ranges over unit symmetrized rank-one matrices; it is the quantity that
    is always bounded below by ``alpha_vse``.
    """

    alpha_se: float
    alpha_vse: float
    argmin_a: np.ndarray
    argmin_b: np.ndarray
    iterations: int
    converged: bool
    alpha_se_normalized: float = math.nan
    normalization: str = "|a|=|b|=1; alpha_se_normalized uses |(a x b)^s|=1"
    starts: int = N_STARTS
    notes: list = field(default_factory=list)

    def as_dict(self) -> dict:
        return {
            "alpha_se": self.alpha_se,
            "alpha_vse": self.alpha_vse,
            "alpha_se_normalized": self.alpha_se_normalized,
            "argmin_a": [float(x) for x in self.argmin_a],
            "argmin_b": [float(x) for x in self.argmin_b],
            "iterations": self.iterations,
            "converged": self.converged,
            "normalization": self.normalization,
        }


def _smallest(A: np.ndarray, x: np.ndarray, normalized: bool):
    """Batched smallest eigenpair of ``A`` (n, 3, 3).

    With ``normalized`` the Rayleigh quotient is taken against the weight
    (I + x x^T)/2 for unit ``x``, whose inverse square root is
    sqrt(2)(I - x x^T) + x x^T.
    """
    if normalized:
        P = np.einsum("ni,nj->nij", x, x)
        S = SQRT2 * (np.eye(3) - P) + P
        A = S @ A @ S
    w, V = np.linalg.eigh(A)
    v = V[:, :, 0]
    if normalized:
        v = np.einsum("nij,nj->ni", S, v)
    return w[:, 0], v / np.linalg.norm(v, axis=1, keepdims=True)


def _alternate(Lf: np.ndarray, b: np.ndarray, normalized: bool, max_iter: int = MAX_ITER):
    """Alternating partial minimization from starting vectors ``b`` (n, 3).

    Each half-step is an exact minimization over one vector, so every branch
    is nonincreasing. Returns per-branch (value, a, b, iterations, converged).
    """
    n = len(b)
    value = np.full(n, math.inf)
    iters = np.full(n, max_iter)
    done = np.zeros(n, dtype=bool)
    a = b
    for it in range(1, max_iter + 1):
        _, a = _smallest(np.einsum("ijkl,nj,nl->nik", Lf, b, b), b, normalized)
        new, b = _smallest(np.einsum("ijkl,ni,nk->njl", Lf, a, a), a, normalized)
        step = np.abs(value - new) <= STEP_TOL * np.maximum(1.0, np.abs(new))
        iters[step & ~done] = it
        done |= step
        value = new
        if done.all():
            break
    return value, a, b, iters, done


def _polish(Lf: np.ndarray, a: np.ndarray, b: np.ndarray, normalized: bool):
    """Local refinement on the product of spheres (spherical coordinates, BFGS)."""
    def unit(t, p):
        return np.array([math.sin(t) * math.cos(p), math.sin(t) * math.sin(p), math.cos(t)])

    # charts centred away from the poles of the current point
    Ra = _frame(a)
    Rb = _frame(b)

    def f(x):
        u = Ra @ unit(x[0], x[1])
        v = Rb @ unit(x[2], x[3])
        val = np.einsum("ijkl,i,j,k,l->", Lf, u, v, u, v)
        if normalized:
            val /= 0.5 * (1.0 + float(u @ v) ** 2)
        return val

    x0 = np.array([math.pi / 2, 0.0, math.pi / 2, 0.0])
    res = minimize(f, x0, method="BFGS", options={"gtol": 1e-13})
    u = Ra @ unit(res.x[0], res.x[1])
    v = Rb @ unit(res.x[2], res.x[3])
    return float(res.fun), u, v


def _frame(x: np.ndarray) -> np.ndarray:
    """Orthogonal matrix mapping e1 to ``x``."""
    x = x / np.linalg.norm(x)
    Q, _ = np.linalg.qr(np.column_stack([x, np.eye(3)]))
    if Q[:, 0] @ x < 0:
        Q[:, 0] *= -1
    return Q


def _minimize_biquadratic(L: ElasticTensor, normalized: bool, starts: int = N_STARTS):
    """Screen every start with a short alternating run, continue the best few
    branches to convergence, then polish the winner."""
    Lf = L.full
    val, _, b, it, _ = _alternate(Lf, fibonacci_sphere(starts), normalized, SCREEN_ITER)
    keep = np.argsort(val)[:KEEP_BRANCHES]
    val, a, b, it2, ok = _alternate(Lf, b[keep], normalized)
    k = int(np.argmin(val))
    best = (float(val[k]), a[k], b[k])
    total_it = int(it.sum() + it2.sum())
    val, a, b = best
    pval, pa, pb = _polish(Lf, a, b, normalized)
    if pval < val:
        val, a, b = pval, pa, pb
    return val, a, b, total_it, bool(ok.all())


def alpha_se_numeric(L: ElasticTensor, starts: int = N_STARTS) -> EllipticityReport:
    """Numerical alpha_se of a constant tensor.

    Alternating smallest-eigenvalue iteration (fix b: minimize over a via the
    acoustic matrix A(b); then swap roles) from a Fibonacci-sphere grid of
    starting directions, followed by a local quasi-Newton polish of the best
    branch. ``converged`` is False when a continued branch hit the iteration cap.
    """
    val, a, b, iters, ok = _minimize_biquadratic(L, normalized=False, starts=starts)
    nval, *_ = _minimize_biquadratic(L, normalized=True, starts=starts)
    return EllipticityReport(
        alpha_se=val, alpha_vse=alpha_vse_numeric(L), argmin_a=a, argmin_b=b,
        iterations=iters, converged=ok, alpha_se_normalized=nval, starts=starts)


def alpha_se_profile(profile: LaminateProfile) -> float:
    """Minimum over layers of the numerical alpha_se."""
    return min(alpha_se_numeric(t).alpha_se for t in profile.tensors)


class Sign(str, Enum):
    POSITIVE = "positive"
    ZERO = "zero"
    NEGATIVE = "negative"


def lambda_sign_constant(L: ElasticTensor, tol: float = ZERO_TOL) -> Sign:
    """Sign of the coercivity constant of a constant tensor (same as sign of alpha_se)."""
    a = alpha_se_numeric(L).alpha_se
    if abs(a) <= tol:
        return Sign.ZERO
    return Sign.POSITIVE if a > 0 else Sign.NEGATIVE
