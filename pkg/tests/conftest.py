import numpy as np
import pytest

from twistor_eikonal import Class1Eikonal, Grid, KerrCongruence

KERR_PI = "G*B0 - B1 + 2*i*a*G"
STATIC_S = "G^2/(G*B0 - B1 + 2*i*a*G)"


def kerr_branches(points, a=1.0):
    """Closed-form roots w̄/(z* + r) and w̄/(z* - r) (principal square root)."""
    x, y, z = np.asarray(points, dtype=float)[:, :3].T
    wb = x + 1j * y
    zs = z + 1j * a
    r = np.sqrt(x * x + y * y + zs * zs)
    with np.errstate(all="ignore"):
        return wb / (zs + r), wb / (zs - r)


def static_fields(points, a=1.0):
    """G = w̄/z* and S = w̄/(w̄w + z*²)."""
    x, y, z = np.asarray(points, dtype=float)[:, :3].T
    wb = x + 1j * y
    zs = z + 1j * a
    return wb / zs, wb / (x * x + y * y + zs * zs)


def ring_distance(points, a=1.0):
    p = np.asarray(points, dtype=float)
    return np.hypot(np.hypot(p[:, 0], p[:, 1]) - a, p[:, 2])


@pytest.fixture(scope="session")
def kerr_plus():
    return KerrCongruence(KERR_PI, params={"a": 1}, seed=((0, 0, 3), "auto")).fit(
        Grid.cube(-3, 3, 0.2))


@pytest.fixture(scope="session")
def kerr_minus():
    return KerrCongruence(KERR_PI, params={"a": 1}, seed=((0, 0, 3), "auto:1")).fit(
        Grid.cube(-3, 3, 0.2))


@pytest.fixture(scope="session")
def static_ring():
    return Class1Eikonal(STATIC_S, params={"a": 1}, seed=((2, 0, 0), -2j)).fit(
        Grid.cube(-3, 3, 0.25))


@pytest.fixture
def rng():
    return np.random.default_rng(20261016)


ACCEPTANCE = []


def record(criterion, ok, detail):
    """Log one acceptance line; printed immediately and again in the summary."""
    line = f"[{'PASS' if ok else 'FAIL'}] criterion {criterion}: {detail}"
    ACCEPTANCE.append(line)
    print("\n" + line)
    return ok


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE:
            terminalreporter.write_line(line)
