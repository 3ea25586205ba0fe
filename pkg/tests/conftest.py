import numpy as np
import pytest

from bergapprox import bergman, geometry, weights

SQUARE = geometry.Rect(0j, 1.0, 1.0)


@pytest.fixture(scope="session")
def square():
    return SQUARE


@pytest.fixture(scope="session")
def grid256():
    return geometry.build_grid(SQUARE, 256, 256)


@pytest.fixture(scope="session")
def flat():
    return weights.make_model_weight("flat_line")


@pytest.fixture(scope="session")
def bump():
    return bergman.standard_bump()


@pytest.fixture(scope="session")
def K25():
    return geometry.shrink_to_compact(SQUARE, 0.25)


@pytest.fixture(scope="session")
def E_flat(flat, K25):
    return geometry.sample_zero_set(flat, SQUARE, 301).restrict(K25)


@pytest.fixture(scope="session")
def bump_k64(bump, grid256, flat, E_flat):
    """Adaptive P_64 of the standard bump under the flat_line weight."""
    return bergman.project_adaptive(bump, SQUARE, grid256, flat, 64.0, E_flat.points)


def fd_dbar(g, z, h):
    """Centered-difference dbar = (d_x + i d_y)/2."""
    return 0.5 * ((g(z + h) - g(z - h)) / (2 * h) + 1j * (g(z + 1j * h) - g(z - 1j * h)) / (2 * h))


def cr_residual(g, z, h=1e-4):
    return np.abs(fd_dbar(g, z, h))


ACCEPTANCE_LINES = []


def record_criterion(number, passed, detail):
    """Print and remember one acceptance line; the summary repeats them all."""
    line = f"{'PASS' if passed else 'FAIL'} criterion {number}: {detail}"
    print(line)
    ACCEPTANCE_LINES.append((number, line))


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for _, line in sorted(ACCEPTANCE_LINES, key=lambda t: t[0]):
            terminalreporter.write_line(line)
