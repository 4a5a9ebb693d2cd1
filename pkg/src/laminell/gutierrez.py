"""Rank-two laminate that is meant to lose strong ellipticity.

Material ``a`` (strongly elliptic, not semi-very strongly elliptic) is
laminated with a very strongly elliptic material ``b`` along e1; the result
is laminated with a third isotropic material ``c`` (lambda_c = alpha_c mu_c)
along e2. The free parameters are tied together so that the e1 laminate has
vanishing ``B`` modulus and the entry L*_{3333} of the final tensor is
driven to zero.

All derived quantities are computed from the lamination formulas. The
closed-form expression ``I1_printed`` is kept only for audit comparisons.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from enum import Enum

import numpy as np
from scipy.optimize import bisect

from .cell_oracle import solve_cell_1d
from .ellipticity import alpha_se_numeric
from .lamination import LaminateModuli, laminate_general, laminate_isotropic_pair
from .tensors import ElasticTensor, InvalidInputError, IsotropicPhase, LaminateProfile, iso_tensor
from .translation import PSD_RTOL, certify_weak_coercivity, search_diagonal_D

B_TOL = 1e-12
ZERO_TOL = 1e-9
LOSS_LO, LOSS_HI = -1e-8, 1e-6
ANGLE_TOL = 1e-3
SCAN_STEP = 1e-3
BISECT_TOL = 1e-12
REGIME_RTOL = 1e-12

E3 = np.array([0.0, 0.0, 1.0])


class ConditionError(InvalidInputError):
    """A named admissibility condition on the construction parameters fails."""

    def __init__(self, condition: str, detail: str):
        self.condition = condition
        super().__init__(f"{condition} violated: {detail}")


class Refinement(str, Enum):
    PRINTED = "printed"
    R1 = "R1_mu_c_root"
    R2 = "R2_theta2_root"


class Verdict(str, Enum):
    LOSS = "loss_verified"
    LAMBDA_ZERO = "lambda_zero_verified"
    DISCREPANCY = "discrepancy-with-paper"
    # L*_{3333} vanishes but the rank-one minimum is strictly negative
    LH_VIOLATED = "legendre_hadamard_violated"


@dataclass(frozen=True)
class GutierrezParameters:
    lambda_a: float
    mu_a: float
    mu_b: float
    lambda_b: float
    theta1: float
    alpha_c: float
    mu_c: float
    theta2: float
    moduli: LaminateModuli
    I1_direct: float
    G1: float
    F1: float
    I1_printed: float
    flags: dict = field(default_factory=dict)
    refinement: Refinement = Refinement.PRINTED

    @property
    def lambda_c(self) -> float:
        return self.alpha_c * self.mu_c

    @property
    def phase_a(self) -> IsotropicPhase:
        return IsotropicPhase(self.lambda_a, self.mu_a)

    @property
    def phase_b(self) -> IsotropicPhase:
        return IsotropicPhase(self.lambda_b, self.mu_b)

    @property
    def phase_c(self) -> IsotropicPhase:
        return IsotropicPhase(self.lambda_c, self.mu_c)

    @property
    def L1_star(self) -> ElasticTensor:
        return laminate_isotropic_pair(self.phase_a, self.phase_b, self.theta1)[1]

    @property
    def L3333_direct(self) -> float:
        return self.I1_direct + self.G1 ** 2 / self.F1

    @property
    def certificate_window(self) -> tuple[float, float]:
        """Range of mu_c for which diag(4 mu_c, 0, 0) certifies both layers."""
        m = self.moduli
        return -(m.C + 2 * m.D), m.C

    def as_dict(self) -> dict:
        lo, hi = self.certificate_window
        return {
            "lambda_a": self.lambda_a, "mu_a": self.mu_a, "mu_b": self.mu_b,
            "lambda_b": self.lambda_b, "theta1": self.theta1, "alpha_c": self.alpha_c,
            "mu_c": self.mu_c, "lambda_c": self.lambda_c, "theta2": self.theta2,
            "moduli": self.moduli.as_dict(),
            "C_plus_D": self.moduli.C + self.moduli.D,
            "C_plus_2D": self.moduli.C + 2 * self.moduli.D,
            "I1_direct": self.I1_direct, "G1": self.G1, "F1": self.F1,
            "I1_printed": self.I1_printed, "L3333_direct": self.L3333_direct,
            "certificate_window": [lo, hi],
            "flags": dict(self.flags), "refinement": self.refinement.value,
        }


@dataclass
class NoRootReport:
    strategy: str
    interval: tuple
    min_value: float
    argmin_theta2: float
    samples: int
    reason: str

    def as_dict(self) -> dict:
        return {"strategy": self.strategy, "interval": list(self.interval),
                "min_value": self.min_value, "argmin_theta2": self.argmin_theta2,
                "samples": self.samples, "reason": self.reason}


# -- parameter windows ---------------------------------------------------------

def mu_b_window(lambda_a: float, mu_a: float) -> tuple[float, float]:
    """Half-open window [lo, hi) for mu_b."""
    s = 2 * mu_a + 3 * lambda_a
    return -0.25 * s, mu_a * s / (3 * lambda_a)


def lambda_b_bound(lambda_a: float, mu_a: float, mu_b: float) -> float:
    """lambda_b must exceed this value."""
    return 2 * mu_b ** 2 * lambda_a / (mu_a * (2 * mu_a + 3 * lambda_a) - 3 * mu_b * lambda_a)


def theta1_zero_B(lambda_a: float, mu_a: float, mu_b: float, lambda_b: float) -> float:
    """Volume fraction of material a that makes the B modulus vanish."""
    return -lambda_b * (2 * mu_a + lambda_a) / (2 * (mu_b * lambda_a - mu_a * lambda_b))


def alpha_c_bound(m: LaminateModuli) -> float:
    return -m.D / (m.C + m.D)


def printed_mu_c(m: LaminateModuli, alpha_c: float) -> float:
    return m.C * alpha_c * (m.C + 2 * m.D) / (m.D * (1 + alpha_c))


def printed_theta2(m: LaminateModuli, alpha_c: float) -> float:
    return alpha_c * (m.C + m.D) / (alpha_c * (m.C + m.D) - m.D * (2 + alpha_c))


def printed_I1(m: LaminateModuli, alpha_c: float, theta2: float) -> float:
    """Closed-form I1 as displayed alongside the construction (audit only; no mu_c factor)."""
    return (4 * (1 - theta2) * (1 + alpha_c) / (2 + alpha_c)
            + 2 * theta2 * m.C * (m.C + 2 * m.D) / (m.C + m.D))


def _check_material_a(lambda_a: float, mu_a: float) -> None:
    if not (math.isfinite(lambda_a) and math.isfinite(mu_a)):
        raise ConditionError("CondMaterialA", "Lame parameters must be finite")
    checks = (
        (mu_a > 0, f"mu_a = {mu_a!r} must be > 0"),
        (2 * mu_a + lambda_a > 0, f"2*mu_a + lambda_a = {2 * mu_a + lambda_a!r} must be > 0"),
        (2 * mu_a + 3 * lambda_a < 0, f"2*mu_a + 3*lambda_a = {2 * mu_a + 3 * lambda_a!r} must be < 0"),
        (4 * mu_a + 3 * lambda_a > 0, f"4*mu_a + 3*lambda_a = {4 * mu_a + 3 * lambda_a!r} must be > 0"),
    )
    for ok, msg in checks:
        if not ok:
            raise ConditionError("CondMaterialA", msg)


# -- direct lamination quantities ---------------------------------------------

def _direct(L1: ElasticTensor, alpha_c: float, mu_c: float, theta2: float) -> tuple[float, float, float]:
    """I1, G1, F1 of the e2 lamination of ``L1`` with iso(alpha_c mu_c, mu_c).

    With n = e2 the acoustic matrices are diagonal, so L*_{3333} decouples
    into the Schur average I1 plus G1^2 / F1, where F1 is the averaged inverse
    of the (2,2) acoustic entry and G1 the averaged ratio L_{2233} / L_{2222}.
    """
    Lf = L1.full
    p1, q1, r1 = Lf[1, 1, 1, 1], Lf[1, 1, 2, 2], Lf[2, 2, 2, 2]
    lam_c = alpha_c * mu_c
    pc = lam_c + 2 * mu_c
    t, s = theta2, 1.0 - theta2
    I1 = t * (r1 - q1 ** 2 / p1) + s * (pc - lam_c ** 2 / pc)
    G1 = t * q1 / p1 + s * lam_c / pc
    F1 = t / p1 + s / pc
    return float(I1), float(G1), float(F1)


def direct_I1_G1_F1(params: GutierrezParameters) -> tuple[float, float, float]:
    return _direct(params.L1_star, params.alpha_c, params.mu_c, params.theta2)


def _assemble(lambda_a, mu_a, mu_b, lambda_b, alpha_c, mu_c=None, theta2=None,
              refinement=Refinement.PRINTED, flags=None) -> GutierrezParameters:
    theta1 = theta1_zero_B(lambda_a, mu_a, mu_b, lambda_b)
    moduli, L1 = laminate_isotropic_pair(IsotropicPhase(lambda_a, mu_a),
                                         IsotropicPhase(lambda_b, mu_b), theta1)
    mu_c = printed_mu_c(moduli, alpha_c) if mu_c is None else mu_c
    theta2 = printed_theta2(moduli, alpha_c) if theta2 is None else theta2
    I1, G1, F1 = _direct(L1, alpha_c, mu_c, theta2)
    if flags is None:
        lo, hi = mu_b_window(lambda_a, mu_a)
        flags = {
            "CondMaterialA": True,
            "CondMuB": lo <= mu_b < hi,
            "CondLamdaB": lambda_b > lambda_b_bound(lambda_a, mu_a, mu_b),
            "CondTheta1": 0 < theta1 < 1,
            "CondAlphaC": alpha_c >= alpha_c_bound(moduli),
            "B_zero": abs(moduli.B) <= B_TOL,
            "C_plus_D_positive": moduli.C + moduli.D > 0,
            "C_plus_2D_negative": moduli.C + 2 * moduli.D < 0,
            "D_negative": moduli.D < 0,
        }
    flags = dict(flags)
    flags["theta2_in_unit_interval"] = 0 < theta2 < 1
    flags["mu_c_positive"] = bool(mu_c > 0)
    return GutierrezParameters(
        lambda_a=lambda_a, mu_a=mu_a, mu_b=mu_b, lambda_b=lambda_b, theta1=theta1,
        alpha_c=alpha_c, mu_c=mu_c, theta2=theta2, moduli=moduli,
        I1_direct=I1, G1=G1, F1=F1, I1_printed=printed_I1(moduli, alpha_c, theta2),
        flags=flags, refinement=refinement)


def select_parameters(lambda_a: float, mu_a: float, mu_b: float | None = None,
                      lambda_b: float | None = None, alpha_c: float | None = None) -> GutierrezParameters:
    """Admissible construction parameters for material ``a``.

    Unspecified parameters default to the midpoint of the mu_b window,
    1.2 times the lambda_b bound and the alpha_c bound plus 0.2.
    Raises :class:`ConditionError` naming the first violated condition.
    """
    _check_material_a(lambda_a, mu_a)
    lo, hi = mu_b_window(lambda_a, mu_a)
    if mu_b is None:
        mu_b = 0.5 * (lo + hi)
    elif not lo <= mu_b < hi:
        raise ConditionError("CondMuB", f"mu_b = {mu_b!r} outside [{lo!r}, {hi!r})")
    bound = lambda_b_bound(lambda_a, mu_a, mu_b)
    if lambda_b is None:
        lambda_b = 1.2 * bound
    elif not lambda_b > bound:
        raise ConditionError("CondLamdaB", f"lambda_b = {lambda_b!r} must exceed {bound!r}")
    theta1 = theta1_zero_B(lambda_a, mu_a, mu_b, lambda_b)
    if not 0 < theta1 < 1:
        raise ConditionError("CondTheta1", f"theta1 = {theta1!r} outside (0, 1)")
    moduli = laminate_isotropic_pair(IsotropicPhase(lambda_a, mu_a),
                                     IsotropicPhase(lambda_b, mu_b), theta1)[0]
    lb = alpha_c_bound(moduli)
    if alpha_c is None:
        alpha_c = lb + 0.2
    elif not alpha_c >= lb:
        raise ConditionError("CondAlphaC", f"alpha_c = {alpha_c!r} below {lb!r}")
    return _assemble(lambda_a, mu_a, mu_b, lambda_b, alpha_c)


def random_admissible(rng: np.random.Generator) -> GutierrezParameters:
    """Random parameters strictly inside every admissibility window."""
    mu_a = rng.uniform(0.5, 2.0)
    lambda_a = -mu_a * rng.uniform(2.0 / 3.0 + 1e-3, 4.0 / 3.0 - 1e-3)
    lo, hi = mu_b_window(lambda_a, mu_a)
    mu_b = lo + rng.uniform(0.0, 0.999) * (hi - lo)
    lambda_b = lambda_b_bound(lambda_a, mu_a, mu_b) * rng.uniform(1.05, 3.0)
    p = select_parameters(lambda_a, mu_a, mu_b, lambda_b)
    return with_alpha_c(p, alpha_c_bound(p.moduli) + rng.uniform(0.05, 2.0))


def with_alpha_c(params: GutierrezParameters, alpha_c: float) -> GutierrezParameters:
    return select_parameters(params.lambda_a, params.mu_a, params.mu_b, params.lambda_b, alpha_c)


def with_theta2(params: GutierrezParameters, theta2: float) -> GutierrezParameters:
    """Same parameters with a different second volume fraction (no window checks)."""
    I1, G1, F1 = _direct(params.L1_star, params.alpha_c, params.mu_c, theta2)
    flags = dict(params.flags, theta2_in_unit_interval=0 < theta2 < 1)
    return replace(params, theta2=theta2, I1_direct=I1, G1=G1, F1=F1,
                   I1_printed=printed_I1(params.moduli, params.alpha_c, theta2), flags=flags)


# -- refinement ----------------------------------------------------------------

def _refine_mu_c(params: GutierrezParameters) -> GutierrezParameters:
    # I1 is affine in mu_c: I1 = theta2 * X + (1 - theta2) * 4 mu_c (1 + a) / (2 + a)
    Lf = params.L1_star.full
    X = Lf[2, 2, 2, 2] - Lf[1, 1, 2, 2] ** 2 / Lf[1, 1, 1, 1]
    a, t = params.alpha_c, params.theta2
    mu_c = float(-t * X * (2 + a) / (4 * (1 - t) * (1 + a)))
    return _assemble(params.lambda_a, params.mu_a, params.mu_b, params.lambda_b, a,
                     mu_c=mu_c, theta2=t, refinement=Refinement.R1, flags=params.flags)


def _refine_theta2(params: GutierrezParameters) -> GutierrezParameters | NoRootReport:
    L1 = params.L1_star

    def entry(t: float) -> float:
        I1, G1, F1 = _direct(L1, params.alpha_c, params.mu_c, t)
        return I1 + G1 ** 2 / F1

    start = params.theta2
    n = max(1, int(math.floor((1.0 - start) / SCAN_STEP)))
    grid = start + SCAN_STEP * np.arange(n + 1)
    grid = grid[grid < 1.0]
    values = np.array([entry(t) for t in grid])
    for k in range(len(grid) - 1):
        if values[k] == 0.0:
            return replace(with_theta2(params, float(grid[k])), refinement=Refinement.R2)
        if values[k] * values[k + 1] < 0:
            root = bisect(entry, grid[k], grid[k + 1], xtol=BISECT_TOL)
            return replace(with_theta2(params, float(root)), refinement=Refinement.R2)
    k = int(np.argmin(values))
    return NoRootReport(
        strategy=Refinement.R2.value, interval=(float(start), 1.0), min_value=float(values[k]),
        argmin_theta2=float(grid[k]), samples=len(grid),
        reason="L*_3333(theta2) has no sign change on the scan grid")


def refine(params: GutierrezParameters, strategy: str = "R2") -> GutierrezParameters | NoRootReport:
    """Adjust one parameter so that L*_{3333} of the rank-two laminate vanishes.

    ``R1`` keeps theta2 (so G1 stays zero) and solves I1(mu_c) = 0 exactly.
    ``R2`` keeps mu_c and looks for a sign change of L*_{3333}(theta2) on
    (theta2, 1), returning a :class:`NoRootReport` if there is none.
    """
    key = strategy.upper()
    if key in ("R1", Refinement.R1.value.upper()):
        return _refine_mu_c(params)
    if key in ("R2", Refinement.R2.value.upper()):
        return _refine_theta2(params)
    raise InvalidInputError(f"unknown refinement strategy {strategy!r}")


def build_L2(params: GutierrezParameters) -> LaminateProfile:
    return LaminateProfile(2, ((params.L1_star, params.theta2),
                               (iso_tensor(params.phase_c), 1.0 - params.theta2)))


# -- verification ---------------------------------------------------------------

def _angle_to_e3(v: np.ndarray) -> float:
    c = min(1.0, abs(float(v @ E3)) / float(np.linalg.norm(v)))
    return math.acos(c)


@dataclass
class ConstructionReport:
    params: GutierrezParameters
    B_residual: float
    G1: float
    I1_direct: float
    I1_printed: float
    L3333_lamination: float
    L3333_cell: float
    L1133_lamination: float
    alpha_se: float
    argmin_a: np.ndarray
    argmin_b: np.ndarray
    argmin_angle: float
    mu_c_certificate: dict
    searched_certificate: dict
    verdict: Verdict
    findings: list = field(default_factory=list)

    @property
    def loss(self) -> bool:
        return self.verdict in (Verdict.LOSS, Verdict.LAMBDA_ZERO)

    def as_dict(self) -> dict:
        return {
            "params": self.params.as_dict(),
            "B_residual": self.B_residual, "G1": self.G1, "I1_direct": self.I1_direct,
            "I1_printed": self.I1_printed,
            "L3333_lamination": self.L3333_lamination, "L3333_cell": self.L3333_cell,
            "L1133_lamination": self.L1133_lamination,
            "alpha_se": self.alpha_se,
            "argmin_a": [float(x) for x in self.argmin_a],
            "argmin_b": [float(x) for x in self.argmin_b],
            "argmin_angle": self.argmin_angle,
            "mu_c_certificate": self.mu_c_certificate,
            "searched_certificate": self.searched_certificate,
            "verdict": self.verdict.value,
            "findings": list(self.findings),
        }


def verify_construction(params: GutierrezParameters, n_elems: int = 64, search: bool = True,
                        zero_tol: float = ZERO_TOL, loss_window: tuple = (LOSS_LO, LOSS_HI),
                        angle_tol: float = ANGLE_TOL, psd_rtol: float = PSD_RTOL) -> ConstructionReport:
    """Check the rank-two laminate for loss of strong ellipticity.

    L*_{3333} is computed by the lamination formulas and by the periodic
    cell oracle. The verdict is ``discrepancy-with-paper`` when the entry is
    positive, ``legendre_hadamard_violated`` when it vanishes but the
    rank-one minimum is below tolerance, otherwise ``loss_verified`` or, with
    a feasible translation certificate, ``lambda_zero_verified``.
    """
    profile = build_L2(params)
    L2 = laminate_general(profile)
    E33 = np.outer(E3, E3)
    cell = solve_cell_1d(profile, E33, n_elems=n_elems)
    ell = alpha_se_numeric(L2)
    angle = max(_angle_to_e3(ell.argmin_a), _angle_to_e3(ell.argmin_b))

    mu_c_cert = certify_weak_coercivity(profile, np.diag([4 * params.mu_c, 0.0, 0.0]), rtol=psd_rtol)
    mu_c_cert.method = "diag(4 mu_c, 0, 0)"
    lo, hi = params.certificate_window
    mu_c_cert.notes.append(f"mu_c window [{lo!r}, {hi!r}] contains mu_c: {lo <= params.mu_c <= hi}")
    searched = search_diagonal_D(profile) if search else None
    if searched is not None:
        method = searched.method
        searched = certify_weak_coercivity(profile, searched.D, rtol=psd_rtol)
        searched.method = method
    feasible = mu_c_cert.feasible or (searched is not None and searched.feasible)

    L3333 = float(L2.full[2, 2, 2, 2])
    findings = []
    if abs(params.I1_printed - params.I1_direct) > zero_tol:
        findings.append(
            f"closed-form I1 display gives {params.I1_printed!r}; lamination gives {params.I1_direct!r}")
    if L3333 > zero_tol:
        verdict = Verdict.DISCREPANCY
        findings.append(f"L*_3333 = {L3333!r} > 0 at these parameters")
    elif loss_window[0] <= ell.alpha_se <= loss_window[1] and angle <= angle_tol:
        verdict = Verdict.LAMBDA_ZERO if feasible else Verdict.LOSS
    else:
        verdict = Verdict.LH_VIOLATED
        findings.append(
            f"alpha_se = {ell.alpha_se!r} at argmin angle {angle!r} rad from (e3, e3); "
            f"L*_1133 = {float(L2.full[0, 0, 2, 2])!r} couples e1 and e3")
    if params.refinement is Refinement.R1:
        ref = printed_mu_c(params.moduli, params.alpha_c)
        findings.append(f"refined mu_c / closed-form mu_c = {params.mu_c / ref!r}")

    return ConstructionReport(
        params=params, B_residual=float(abs(params.moduli.B)), G1=params.G1,
        I1_direct=params.I1_direct, I1_printed=params.I1_printed,
        L3333_lamination=L3333, L3333_cell=float(cell.energy),
        L1133_lamination=float(L2.full[0, 0, 2, 2]),
        alpha_se=ell.alpha_se, argmin_a=ell.argmin_a, argmin_b=ell.argmin_b, argmin_angle=angle,
        mu_c_certificate=mu_c_cert.as_dict(),
        searched_certificate=searched.as_dict() if searched is not None else {},
        verdict=verdict, findings=findings)


# -- first-laminate regimes ---------------------------------------------------------

class Regime(str, Enum):
    POSITIVE = "alpha_se_positive"
    ZERO = "alpha_se_zero"
    NONNEG = "alpha_se_nonneg"
    NOT_LH = "not_legendre_hadamard"


def regime(lambda_a: float, mu_a: float, mu_b: float) -> Regime:
    """Sign class of alpha_se for the e1 laminate of materials a and b."""
    if mu_a <= 0:
        raise InvalidInputError(f"mu_a = {mu_a!r} must be > 0")
    s = mu_a + lambda_a
    scale = max(abs(mu_a), abs(lambda_a), abs(mu_b), 1e-300)
    if s >= 0:
        return Regime.POSITIVE
    if abs(mu_b + s) <= REGIME_RTOL * scale:
        return Regime.ZERO
    if s < -mu_b:
        return Regime.NOT_LH
    if mu_b > -0.25 * (2 * mu_a + 3 * lambda_a):
        return Regime.POSITIVE
    return Regime.NONNEG
