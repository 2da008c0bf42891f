import numpy as np
import pytest

from rcdarma.arma import ArmaModel


def poly_from_roots(roots):
    """Coefficients c_1..c_n of prod(1 - r w) = 1 + sum c_j w^j."""
    return np.poly(roots)[1:].real


def random_arma(rng, max_p=3, max_q=3, gain_range=(0.1, 10.0), radius=0.8, min_p=0, min_q=0):
    """ARMA model with distinct real AR and MA roots inside ``radius``."""
    p = rng.integers(min_p, max_p + 1)
    q = rng.integers(min_q, max_q + 1)
    poles = rng.uniform(-radius, radius, p)
    zeros = rng.uniform(-radius, radius, q)
    ar = -poly_from_roots(poles) if p else []
    ma = poly_from_roots(zeros) if q else []
    return ArmaModel(ar, ma, rng.uniform(*gain_range))


def random_pair(rng):
    """(signal, noise) whose whitened signal passes validation."""
    while True:
        signal = random_arma(rng, min_p=1, gain_range=(0.5, 2.0))
        noise = random_arma(rng, max_p=2, max_q=2, gain_range=(0.5, 3.0))
        if signal.p + noise.q > signal.q + noise.p:
            return signal, noise


@pytest.fixture
def rng():
    return np.random.default_rng(20240917)


def dc_pair(b, amplitude=1.0, sigma=10.0):
    return ArmaModel([1.0], [], amplitude), ArmaModel([1.0], [b], sigma)


ACCEPTANCE = {}


@pytest.fixture
def criterion():
    """Record one PASS/FAIL line for an acceptance criterion and return the verdict."""

    def record(key, ok, detail):
        line = f"criterion {key}: {'PASS' if ok else 'FAIL'}  {detail}"
        ACCEPTANCE[key] = line
        print(line)
        return ok

    return record


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for key in sorted(ACCEPTANCE, key=lambda k: (int(k.rstrip("abcdef")), k)):
            terminalreporter.write_line(ACCEPTANCE[key])
