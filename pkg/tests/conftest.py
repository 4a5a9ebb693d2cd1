import numpy as np
import pytest

from laminell.gutierrez import select_parameters
from laminell.lamination import laminate_isotropic_pair
from laminell.tensors import IsotropicPhase, LaminateProfile, iso_tensor

PHASE_A = IsotropicPhase(-1.0, 0.9)
PHASE_B = IsotropicPhase(2.0, 0.32)
THETA1 = 20.0 / 53.0


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture(scope="session")
def worked_pair():
    return laminate_isotropic_pair(PHASE_A, PHASE_B, THETA1)


@pytest.fixture(scope="session")
def worked_profile():
    return LaminateProfile(1, ((iso_tensor(PHASE_A), THETA1), (iso_tensor(PHASE_B), 1 - THETA1)))


@pytest.fixture(scope="session")
def worked_params():
    return select_parameters(-1.0, 0.9, 0.32, 2.0, 1.2)


def random_elliptic_phase(rng, lo=0.05):
    """Strongly elliptic isotropic phase with moduli of order one."""
    mu = rng.uniform(lo, 2.0)
    lam = rng.uniform(-2 * mu + lo, 3.0)
    return IsotropicPhase(lam, mu)


def random_spd_mandel(rng, shift=0.5):
    G = rng.normal(size=(6, 6))
    return G @ G.T / 6 + shift * np.eye(6)


_CRITERIA: dict[str, tuple[str, str]] = {}


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    if item.module.__name__.endswith("test_acceptance") and (rep.when == "call" or rep.failed):
        title = (item.function.__doc__ or item.name).strip().splitlines()[0]
        status = "PASS" if rep.passed else "FAIL"
        if item.nodeid not in _CRITERIA or status == "FAIL":
            _CRITERIA[item.nodeid] = (title, status)


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for title, status in _CRITERIA.values():
        terminalreporter.write_line(f"{status}  {title}")
