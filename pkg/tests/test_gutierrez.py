import numpy as np
import pytest

from laminell.ellipticity import alpha_se_numeric
from laminell.gutierrez import (ConditionError, NoRootReport, Refinement, Regime, Verdict, alpha_c_bound,
                                build_L2, direct_I1_G1_F1, lambda_b_bound, mu_b_window, printed_mu_c,
                                random_admissible, refine, regime, select_parameters, verify_construction,
                                with_alpha_c, with_theta2)
from laminell.lamination import laminate_general, laminate_isotropic_pair
from laminell.tensors import InvalidInputError, quadratic_form

E = np.eye(3)


@pytest.fixture(scope="module")
def sweep():
    rng = np.random.default_rng(7)
    return [random_admissible(rng) for _ in range(100)]


@pytest.fixture(scope="module")
def r1(worked_params):
    return refine(worked_params, "R1")


@pytest.fixture(scope="module")
def printed_report(worked_params):
    return verify_construction(worked_params, search=False)


@pytest.fixture(scope="module")
def r1_report(r1):
    return verify_construction(r1)


def test_worked_selection(worked_params):
    p = worked_params
    assert p.theta1 == pytest.approx(0.3773585, abs=5e-8)
    assert abs(p.moduli.B) <= 1e-12
    assert p.moduli.C == pytest.approx(0.5388679, abs=5e-8)
    assert p.moduli.D == pytest.approx(-0.2735849, abs=5e-8)
    assert p.moduli.C + 2 * p.moduli.D == pytest.approx(-0.0083019, abs=5e-8)
    assert p.mu_c == pytest.approx(0.0089191, abs=1e-7)
    assert p.theta2 == pytest.approx(0.2666585, abs=5e-7)
    assert abs(p.G1) <= 1e-10
    assert p.I1_direct == pytest.approx(0.0089931, abs=1e-6)
    assert p.F1 == pytest.approx(26.19, abs=0.05)
    assert all(p.flags.values())
    assert p.refinement is Refinement.PRINTED


def test_windows():
    lo, hi = mu_b_window(-1.0, 0.9)
    assert (lo, hi) == pytest.approx((0.3, 0.36))
    assert lambda_b_bound(-1.0, 0.9, 0.32) < 2.0


def test_defaults_are_deterministic():
    p, q = select_parameters(-1.0, 0.9), select_parameters(-1.0, 0.9)
    assert p.as_dict() == q.as_dict()
    assert p.mu_b == pytest.approx(0.33)
    assert p.lambda_b == pytest.approx(1.2 * lambda_b_bound(-1.0, 0.9, 0.33))
    assert p.alpha_c == pytest.approx(alpha_c_bound(p.moduli) + 0.2)


@pytest.mark.parametrize("kwargs, condition", [
    (dict(lambda_a=-1.0, mu_a=0.7), "CondMaterialA"),
    (dict(lambda_a=-1.0, mu_a=0.9, mu_b=0.4), "CondMuB"),
    (dict(lambda_a=-1.0, mu_a=0.9, mu_b=0.32, lambda_b=1.0), "CondLamdaB"),
    (dict(lambda_a=-1.0, mu_a=0.9, mu_b=0.32, lambda_b=2.0, alpha_c=0.5), "CondAlphaC"),
])
def test_condition_errors(kwargs, condition):
    with pytest.raises(ConditionError, match=f"{condition} violated") as info:
        select_parameters(**kwargs)
    assert info.value.condition == condition
    assert isinstance(info.value, InvalidInputError)


def test_sweep_invariants(sweep):
    for p in sweep:
        assert abs(p.moduli.B) <= 1e-12
        assert abs(p.G1) <= 1e-10
        assert all(p.flags.values())
        _, L1 = laminate_isotropic_pair(p.phase_a, p.phase_b, p.theta1)
        assert alpha_se_numeric(L1).alpha_se > 1e-10


def test_decomposition_identity(sweep):
    rng = np.random.default_rng(11)
    for p in sweep:
        q = with_theta2(p, rng.uniform(0.01, 0.99))
        I1, G1, F1 = direct_I1_G1_F1(q)
        exact = laminate_general(build_L2(q)).full[2, 2, 2, 2]
        assert abs(I1 + G1 ** 2 / F1 - exact) <= 1e-11 * max(abs(exact), 1.0)


def test_alpha_c_boundary_hits_window_edge(sweep):
    for p in sweep[:20]:
        q = with_alpha_c(p, alpha_c_bound(p.moduli))
        assert q.mu_c == pytest.approx(-(p.moduli.C + 2 * p.moduli.D), abs=1e-10)


def test_R1_halves_printed(sweep, worked_params, r1):
    assert r1.mu_c / worked_params.mu_c == pytest.approx(0.5, abs=1e-10)
    assert r1.mu_c == pytest.approx(0.0044596, abs=1e-7)
    assert abs(r1.I1_direct) <= 1e-9
    assert r1.refinement is Refinement.R1
    for p in sweep:
        q = refine(p, "R1")
        assert abs(q.mu_c / printed_mu_c(p.moduli, p.alpha_c) - 0.5) <= 1e-10


def test_theta2_one_degenerate(worked_params):
    q = with_theta2(worked_params, 1.0)
    I1, G1, F1 = direct_I1_G1_F1(q)
    assert I1 + G1 ** 2 / F1 == pytest.approx(0.5305660, abs=5e-8)
    assert I1 + G1 ** 2 / F1 == pytest.approx(2 * (worked_params.moduli.C + worked_params.moduli.D), abs=1e-13)
    with pytest.raises(InvalidInputError):
        build_L2(q)


def test_build_L2(worked_params):
    prof = build_L2(worked_params)
    assert prof.axis == 2
    assert prof.fractions == pytest.approx([worked_params.theta2, 1 - worked_params.theta2])
    assert prof.tensors[1].c[0, 1] == pytest.approx(worked_params.alpha_c * worked_params.mu_c)


def test_R2_has_no_root(worked_params):
    rep = refine(worked_params, "R2")
    assert isinstance(rep, NoRootReport)
    assert rep.min_value > 0
    # dense independent scan of the full unit interval
    vals = [laminate_general(build_L2(with_theta2(worked_params, t))).full[2, 2, 2, 2]
            for t in np.linspace(0.001, 0.999, 200)]
    assert min(vals) > 1e-3


def test_R1_loses_rank_one_positivity_off_axis(r1):
    # L2* 3333 vanishes but L2* 1133 > 0, so a = e3 + s e1, b = e3 - s e1 gives -2 L1133 s^2 < 0
    L2 = laminate_general(build_L2(r1))
    assert abs(L2.full[2, 2, 2, 2]) <= 1e-9
    assert L2.full[0, 0, 2, 2] > 1e-3
    s = 1e-2
    a, b = E[2] + s * E[0], E[2] - s * E[0]
    assert quadratic_form(L2, np.outer(a, b)) < 0


def test_verify_printed_is_discrepancy(printed_report):
    rep = printed_report
    assert rep.verdict is Verdict.DISCREPANCY
    assert rep.L3333_lamination == pytest.approx(0.0089931, abs=1e-6)
    assert rep.L3333_cell == pytest.approx(rep.L3333_lamination, abs=1e-9)
    assert rep.mu_c_certificate["feasible"]
    assert rep.findings


def test_verify_R1_outcome(r1_report):
    rep = r1_report
    assert abs(rep.L3333_lamination) <= 1e-9
    assert abs(rep.L3333_cell) <= 1e-9
    assert not rep.mu_c_certificate["feasible"]
    assert rep.alpha_se < -1e-8
    assert rep.verdict is Verdict.LH_VIOLATED
    assert rep.as_dict()["verdict"] == "legendre_hadamard_violated"


@pytest.mark.parametrize("lam_a, mu_a, mu_b, expected", [
    (-1.0, 0.9, 0.1, Regime.ZERO),
    (-0.5, 0.9, 0.1, Regime.POSITIVE),
    (-1.0, 0.9, 0.05, Regime.NOT_LH),
    (-1.0, 0.9, 0.32, Regime.POSITIVE),
    (-1.0, 0.9, 0.2, Regime.NONNEG),
])
def test_regime(lam_a, mu_a, mu_b, expected):
    assert regime(lam_a, mu_a, mu_b) is expected
