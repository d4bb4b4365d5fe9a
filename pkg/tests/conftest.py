from __future__ import annotations

import numpy as np
import pytest


def pg_series_moments(b: float, z: float, terms: int = 100_000):
    """Mean and variance of PG(b, z) from its infinite sum-of-gammas representation.

    PG(b, z) = (1 / (2 pi^2)) * sum_k g_k / d_k with g_k ~ Gamma(b, 1) and
    d_k = (k - 1/2)^2 + z^2 / (4 pi^2).  The mean sum is truncated at
    ``terms`` and the remainder is added in closed form via the arctangent
    of the integral bound; the variance sum converges like k^-3 and needs
    no tail term at this truncation.
    """
    k = np.arange(1, terms + 1, dtype=float)
    c = z * z / (4.0 * np.pi**2)
    d = (k - 0.5) ** 2 + c
    if c > 0:
        tail = (np.pi / 2 - np.arctan(terms / np.sqrt(c))) / np.sqrt(c)
    else:
        tail = 1.0 / terms
    mean = b / (2 * np.pi**2) * (np.sum(1.0 / d) + tail)
    var = b / (4 * np.pi**4) * np.sum(1.0 / d**2)
    return float(mean), float(var)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture(scope="session")
def acceptance_lines(request):
    lines = []
    request.config._acceptance_lines = lines
    return lines


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    lines = getattr(config, "_acceptance_lines", None)
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
