import pytest

from fbhardy.basis import EigenBasis
from fbhardy.kernels import UnitIntervalKernels
from fbhardy.quadrature import make_quadrature, MEASURE_LEBESGUE, MEASURE_MU
from fbhardy.specfun import Order

# registry filled by test_acceptance; printed once at the end of the run
ACCEPTANCE_LINES = []


def record_acceptance(criterion: int, passed: bool, detail: str) -> None:
    ACCEPTANCE_LINES.append((criterion, bool(passed), detail))


@pytest.fixture(scope="session")
def basis_half():
    """Full-size nu=1/2 basis, matching the shipped default configuration."""
    return EigenBasis.build(Order(0.5), 2400)


@pytest.fixture(scope="session")
def basis_half_small():
    return EigenBasis.build(Order(0.5), 64)


@pytest.fixture(scope="session")
def basis_zero():
    return EigenBasis.build(Order(0.0), 600)


@pytest.fixture(scope="session")
def kernels_half(basis_half):
    return UnitIntervalKernels(basis_half)


@pytest.fixture(scope="session")
def grid_mu():
    return make_quadrature("unit_interval", 256, measure=MEASURE_MU, nu=0.5)


@pytest.fixture(scope="session")
def grid_leb():
    return make_quadrature("unit_interval", 256, measure=MEASURE_LEBESGUE,
                           nu=0.5)


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for n, passed, detail in sorted(ACCEPTANCE_LINES):
        status = "PASS" if passed else "FAIL"
        terminalreporter.write_line(f"criterion {n:2d}: {status}  {detail}")
