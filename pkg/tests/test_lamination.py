import numpy as np
import pytest

from laminell.lamination import (delta_sweep, laminate_general, laminate_isotropic_pair,
                                 laminate_isotropic_profile, laminate_moduli)
from laminell.tensors import (DegenerateLayerError, ElasticTensor, InvalidInputError, IsotropicPhase,
                              LaminateProfile, acoustic_matrix, iso_tensor, permute_axes, quadratic_form,
                              two_phase_profile)

from conftest import PHASE_A, PHASE_B, THETA1, random_elliptic_phase, random_spd_mandel

E = np.eye(3)


def test_worked_moduli(worked_pair):
    m, L1 = worked_pair
    assert abs(m.B) <= 1e-12
    assert m.C == pytest.approx(0.5388679, abs=5e-8)
    assert m.D == pytest.approx(-0.2735849, abs=5e-8)
    assert 1 / m.A == pytest.approx(1.4133333, abs=5e-8)
    assert 1 / m.E == pytest.approx(0.4228254, abs=1e-7)
    assert L1.full[1, 1, 2, 2] == pytest.approx(-0.5471698, abs=5e-8)
    assert L1.full[2, 2, 2, 2] == pytest.approx(2 * (m.C + m.D), abs=1e-15)


def test_pair_entries_match_moduli(worked_pair):
    m, L1 = worked_pair
    F = L1.full
    assert F[0, 0, 0, 0] == pytest.approx(1 / m.A)
    assert F[0, 0, 1, 1] == pytest.approx(m.B / m.A, abs=1e-15)
    assert F[0, 1, 0, 1] == pytest.approx(1 / m.E)
    assert F[1, 2, 1, 2] == pytest.approx(m.C)


def test_identical_layers_return_layer(rng):
    for _ in range(10):
        p = random_elliptic_phase(rng)
        t = rng.uniform(0.05, 0.95)
        _, L = laminate_isotropic_pair(p, p, t)
        assert np.abs(L.c - iso_tensor(p).c).max() <= 1e-14
        Lg = laminate_general([(iso_tensor(p), t), (iso_tensor(p), 1 - t)], axis=int(rng.integers(1, 4)))
        assert np.abs(Lg.c - iso_tensor(p).c).max() <= 1e-14
        S = ElasticTensor(random_spd_mandel(rng))
        assert np.abs(laminate_general([(S, t), (S, 1 - t)], 1).c - S.c).max() <= 1e-14


def test_single_layer():
    L = iso_tensor(PHASE_B)
    assert np.abs(laminate_general([(L, 1.0)], 2).c - L.c).max() <= 1e-14


def test_general_matches_pair_formula(rng):
    for _ in range(100):
        a, b = random_elliptic_phase(rng), random_elliptic_phase(rng)
        t = rng.uniform(0.02, 0.98)
        _, Lp = laminate_isotropic_pair(a, b, t)
        Lg = laminate_general([(iso_tensor(a), t), (iso_tensor(b), 1 - t)], axis=1)
        scale = np.abs(Lp.c).max()
        assert np.abs(Lg.c - Lp.c).max() <= 1e-12 * scale


def test_general_output_symmetric(rng):
    layers = [(ElasticTensor(random_spd_mandel(rng)), f) for f in (0.2, 0.5, 0.3)]
    F = laminate_general(layers, 3).full
    assert np.abs(F - F.transpose(1, 0, 2, 3)).max() <= 1e-12
    assert np.abs(F - F.transpose(2, 3, 0, 1)).max() <= 1e-12


def test_axis_covariance(rng):
    for _ in range(10):
        layers = [(ElasticTensor(random_spd_mandel(rng)), 0.35), (ElasticTensor(random_spd_mandel(rng)), 0.65)]
        direct = laminate_general(layers, 2)
        swap = (1, 0, 2)
        swapped = [(permute_axes(L, swap), f) for L, f in layers]
        back = permute_axes(laminate_general(swapped, 1), swap)
        assert np.abs(direct.c - back.c).max() <= 1e-12 * np.abs(direct.c).max()


def test_harmonic_mean_bound(rng):
    for _ in range(30):
        phases = [random_elliptic_phase(rng) for _ in range(3)]
        w = rng.dirichlet(np.ones(3))
        axis = int(rng.integers(1, 4))
        n = E[axis - 1]
        M = np.outer(n, n)
        layers = [(iso_tensor(p), f) for p, f in zip(phases, w)]
        vals = np.array([quadratic_form(L, M) for L, _ in layers])
        q = quadratic_form(laminate_general(layers, axis), M)
        assert 1 / np.sum(w / vals) - 1e-10 <= q <= np.sum(w * vals) + 1e-10


def test_anisotropic_normal_bounds(rng):
    # with acoustic coupling the lower bound is 1/<(A^-1)_nn>, below the harmonic mean of A_nn
    for _ in range(30):
        layers = [(ElasticTensor(random_spd_mandel(rng)), f) for f in (0.3, 0.7)]
        axis = int(rng.integers(1, 4))
        k = axis - 1
        M = np.outer(E[k], E[k])
        inv_nn = np.array([np.linalg.inv(acoustic_matrix(L, axis))[k, k] for L, _ in layers])
        vals = np.array([quadratic_form(L, M) for L, _ in layers])
        w = np.array([0.3, 0.7])
        q = quadratic_form(laminate_general(layers, axis), M)
        assert 1 / np.sum(w * inv_nn) - 1e-10 <= q <= np.sum(w * vals) + 1e-10


def test_nonelliptic_phase_rejected():
    with pytest.raises(InvalidInputError):
        laminate_moduli(IsotropicPhase(-2.0, 0.9), PHASE_B, 0.5)
    with pytest.raises(InvalidInputError):
        laminate_isotropic_pair(PHASE_A, IsotropicPhase(1.0, -0.1), 0.5)


def test_singular_acoustic_layer_named():
    bad = iso_tensor(IsotropicPhase(-1.0, 0.5))   # lambda + 2 mu = 0
    with pytest.raises(DegenerateLayerError, match="layer 1"):
        laminate_general([(iso_tensor(PHASE_A), 0.5), (bad, 0.5)], 1)


def test_delta_sweep_worked(worked_profile, worked_pair):
    m, _ = worked_pair
    deltas = [10.0 ** -k for k in range(1, 7)]
    e = delta_sweep(worked_profile, np.outer(E[0], E[0]), deltas)
    assert len(e) == 7
    assert all(e[i + 1] <= e[i] + 1e-13 for i in range(6))
    assert all(e[i + 1] < e[i] for i in range(5))
    assert e[-1] == pytest.approx(1 / m.A, rel=1e-13)
    assert abs(e[-2] - 1 / m.A) <= 1e-4 / m.A


def test_delta_sweep_constant_is_linear(rng):
    L = ElasticTensor(random_spd_mandel(rng))
    prof = LaminateProfile(1, ((L, 1.0),))
    M = rng.normal(size=(3, 3))
    S = 0.5 * (M + M.T)
    deltas = [0.5, 0.1, 0.01]
    e = delta_sweep(prof, M, deltas)
    for dl, v in zip(deltas + [0.0], e):
        assert v == pytest.approx(quadratic_form(L, M) + dl * np.sum(S * S), rel=1e-12)


def test_delta_sweep_monotone_random(rng):
    for _ in range(10):
        a, b = random_elliptic_phase(rng), random_elliptic_phase(rng)
        prof = laminate_isotropic_profile([a, b], [0.4, 0.6], axis=int(rng.integers(1, 4)))
        M = rng.normal(size=(3, 3))
        e = delta_sweep(prof, M, [1.0, 0.1, 0.01, 1e-3])
        assert all(e[i + 1] <= e[i] + 1e-13 for i in range(len(e) - 1))


def test_delta_sweep_rejects_bad_deltas(worked_profile):
    with pytest.raises(InvalidInputError):
        delta_sweep(worked_profile, np.eye(3), [0.1, 0.2])
    with pytest.raises(InvalidInputError):
        delta_sweep(worked_profile, np.eye(3), [0.1, 0.0])


def test_profile_builder():
    prof = laminate_isotropic_profile([PHASE_A, PHASE_B], [THETA1, 1 - THETA1])
    assert prof.axis == 1
    _, L1 = laminate_isotropic_pair(PHASE_A, PHASE_B, THETA1)
    assert laminate_general(prof).allclose(L1, atol=1e-12)
    assert two_phase_profile(iso_tensor(PHASE_A), iso_tensor(PHASE_B), THETA1).axis == 1
