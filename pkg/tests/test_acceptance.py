"""Acceptance criteria 1-10, each at its stated tolerance.

One PASS/FAIL line per criterion is printed in the terminal summary.
"""

import numpy as np
import pytest

from laminell.cell_oracle import homogenize_numeric, quasi_affinity_check, random_trig_field, solve_cell_1d
from laminell.coercivity import P_matrix, Q_matrix
from laminell.ellipticity import alpha_se_isotropic, alpha_se_numeric, alpha_vse_isotropic, alpha_vse_numeric
from laminell.gutierrez import NoRootReport, Verdict, build_L2, refine, verify_construction
from laminell.lamination import delta_sweep, laminate_general, laminate_isotropic_pair
from laminell.tensors import IsotropicPhase, iso_tensor, two_phase_profile
from laminell.translation import scalar_translation_interval

from conftest import random_elliptic_phase

E = np.eye(3)


@pytest.fixture(scope="module")
def arng():
    return np.random.default_rng(1234)


def test_criterion_01(arng):
    """1  isotropic closed forms: alpha_se within 1e-8, alpha_vse = min{mu, 2mu+3lam} within 1e-10"""
    se_err, vse_err = 0.0, 0.0
    for _ in range(200):
        p = IsotropicPhase(arng.uniform(-2, 2), arng.uniform(0, 2))
        L = iso_tensor(p)
        se_err = max(se_err, abs(alpha_se_numeric(L).alpha_se - alpha_se_isotropic(p)))
        vse_err = max(vse_err, abs(alpha_vse_numeric(L) - alpha_vse_isotropic(p)))
    print(f"criterion 1: max alpha_se error {se_err:.3e}, max alpha_vse error {vse_err:.3e}")
    assert se_err <= 1e-8
    assert vse_err <= 1e-10


def test_criterion_02(arng):
    """2  single-phase degeneracy: identical layers give the layer (1e-14), FEM corrector zero"""
    for _ in range(20):
        p = random_elliptic_phase(arng)
        t = arng.uniform(0.05, 0.95)
        L = iso_tensor(p)
        _, Lp = laminate_isotropic_pair(p, p, t)
        prof = two_phase_profile(L, L, t, axis=int(arng.integers(1, 4)))
        assert np.abs(Lp.c - L.c).max() <= 1e-14
        assert np.abs(laminate_general(prof).c - L.c).max() <= 1e-14
        sol = solve_cell_1d(prof, arng.normal(size=(3, 3)), 64)
        assert np.abs(sol.corrector).max() <= 1e-12


def test_criterion_03(arng):
    """3  cross-oracle: general 1* formula vs pair formula (1e-12), FEM vs closed form (1e-10, n=64)"""
    formula_err, fem_err = 0.0, 0.0
    for _ in range(100):
        a, b = random_elliptic_phase(arng), random_elliptic_phase(arng)
        t = arng.uniform(0.02, 0.98)
        _, Lp = laminate_isotropic_pair(a, b, t)
        prof = two_phase_profile(iso_tensor(a), iso_tensor(b), t)
        formula_err = max(formula_err, np.abs(laminate_general(prof).c - Lp.c).max())
        fem_err = max(fem_err, np.abs(homogenize_numeric(prof, 64).c - Lp.c).max())
    print(f"criterion 3: formula {formula_err:.3e}, FEM {fem_err:.3e}")
    assert formula_err <= 1e-12
    assert fem_err <= 1e-10


def test_criterion_04(worked_params):
    """4  worked constants: theta1 = 0.3773585 gives |B| <= 1e-12, printed theta2 gives |G1| <= 1e-10"""
    p = worked_params
    assert abs(p.theta1 - 0.3773585) <= 5e-8
    assert abs(p.theta2 - 0.2666585) <= 5e-7
    assert abs(p.moduli.B) <= 1e-12
    assert abs(p.G1) <= 1e-10


def test_criterion_05():
    """5  rank-one zero: mu_b = -(mu_a + lam_a) gives alpha_se(L1*) = 0 within 1e-8"""
    _, L1 = laminate_isotropic_pair(IsotropicPhase(-1.0, 0.9), IsotropicPhase(1.0, 0.1), 0.5)
    rep = alpha_se_numeric(L1)
    print(f"criterion 5: alpha_se = {rep.alpha_se:.3e}")
    assert abs(rep.alpha_se) <= 1e-8


def test_criterion_06(arng):
    """6  no loss for first laminates: nonempty scalar interval and slabs give alpha_se(L1) > 1e-10"""
    count, worst = 0, np.inf
    while count < 100:
        a, b = random_elliptic_phase(arng, lo=0.02), random_elliptic_phase(arng, lo=0.02)
        clamped, _ = scalar_translation_interval([a, b])
        if clamped.empty:
            continue
        prof = two_phase_profile(iso_tensor(a), iso_tensor(b), arng.uniform(0.05, 0.95),
                                 axis=int(arng.integers(1, 4)))
        worst = min(worst, alpha_se_numeric(laminate_general(prof)).alpha_se)
        count += 1
    print(f"criterion 6: smallest alpha_se over 100 laminates {worst:.3e}")
    assert worst > 1e-10


@pytest.fixture(scope="module")
def strategy_reports(worked_params):
    out = {}
    for strategy in ("R1", "R2"):
        refined = refine(worked_params, strategy)
        out[strategy] = refined if isinstance(refined, NoRootReport) else verify_construction(refined)
    return out


def test_criterion_07(strategy_reports):
    """7  rank-two loss: some refinement gives L2*_3333 ~ 0 and alpha_se(L2*) in [-1e-8, 1e-6] at (e3, e3)"""
    achieved = []
    for strategy, rep in strategy_reports.items():
        if isinstance(rep, NoRootReport):
            print(f"criterion 7: {strategy} no root (min L2*_3333 = {rep.min_value:.6e})")
            continue
        cert = rep.mu_c_certificate["feasible"]
        print(f"criterion 7: {strategy} L2*_3333 = {rep.L3333_lamination:.3e}, alpha_se = {rep.alpha_se:.3e}, "
              f"angle = {rep.argmin_angle:.3e}, diag(4 mu_c, 0, 0) feasible = {cert}, verdict = {rep.verdict.value}")
        ok = (abs(rep.L3333_lamination) <= 1e-9 and -1e-8 <= rep.alpha_se <= 1e-6
              and rep.argmin_angle <= 1e-3)
        if ok:
            assert rep.verdict in (Verdict.LOSS, Verdict.LAMBDA_ZERO)
            assert (rep.verdict is Verdict.LAMBDA_ZERO) == bool(
                cert or rep.searched_certificate.get("feasible", False))
            achieved.append(strategy)
    assert achieved, "no refinement strategy produced a rank-two loss of strong ellipticity"


def test_criterion_08(worked_params):
    """8  printed-parameter audit: printed parameters give L2*_3333 = +0.0089931 +- 1e-5 (FEM too); R1 mu_c = printed/2"""
    rep = verify_construction(worked_params, search=False)
    assert abs(rep.L3333_lamination - 0.0089931) <= 1e-5
    assert abs(rep.L3333_cell - 0.0089931) <= 1e-5
    assert rep.L3333_lamination > 0 and rep.L3333_cell > 0
    assert rep.verdict is Verdict.DISCREPANCY and rep.findings
    r1 = refine(worked_params, "R1")
    assert abs(r1.mu_c / worked_params.mu_c - 0.5) <= 1e-10
    fem = solve_cell_1d(build_L2(r1), np.outer(E[2], E[2]), 64).energy
    assert abs(fem) <= 1e-9


def test_criterion_09(worked_profile, worked_pair):
    """9  delta sweep: monotone nonincreasing (1e-13 slack), energy(1e-6) within 1e-4 relative of 1/A"""
    m, _ = worked_pair
    deltas = [10.0 ** -k for k in range(1, 7)]
    e = delta_sweep(worked_profile, np.outer(E[0], E[0]), deltas)
    assert all(e[i + 1] <= e[i] + 1e-13 for i in range(len(e) - 1))
    assert abs(e[5] - 1 / m.A) <= 1e-4 * (1 / m.A)


def test_criterion_10(arng):
    """10 boundary spectra of P and Q (1e-12) and quasi-affinity residual <= 1e-11 on 50 fields"""
    for _ in range(20):
        mu = arng.uniform(0.1, 2)
        lam = arng.uniform(-2 * mu + 0.05, 2)
        d = 4 * mu
        assert abs(np.linalg.eigvalsh(Q_matrix(IsotropicPhase(lam, mu), d))[0]) <= 1e-12
        d = arng.uniform(0.1, 3.9) * mu
        lam = -(2 * mu + d) / 3
        w, V = np.linalg.eigh(P_matrix(IsotropicPhase(lam, mu), d))
        assert abs(w[0]) <= 1e-12
        assert np.linalg.norm(np.abs(V[:, 0]) - np.ones(3) / np.sqrt(3)) <= 1e-12
    worst = max(quasi_affinity_check(random_trig_field(arng, degree=3)) for _ in range(50))
    assert worst <= 1e-11

