import numpy as np
import pytest

from looptoda.dressing import DressingData
from looptoda.harness import random_soliton_data
from looptoda.model import build_system


def random_dressing_data(rng, p, n_star, r):
    """Generic initial data: every c_{i,alpha}, d_{i,alpha} random."""
    while True:
        mu = rng.uniform(0.5, 2.0, r) * np.exp(1j * rng.uniform(0, 2 * np.pi, r))
        nu = rng.uniform(0.5, 2.0, r) * np.exp(1j * rng.uniform(0, 2 * np.pi, r))
        c = rng.normal(size=(r, p, n_star, n_star)) + 1j * rng.normal(size=(r, p, n_star, n_star))
        d = rng.normal(size=(r, p, n_star, n_star)) + 1j * rng.normal(size=(r, p, n_star, n_star))
        try:
            return DressingData(mu, nu, c, d)
        except ValueError:
            continue


@pytest.fixture
def rng():
    return np.random.default_rng(20240607)


@pytest.fixture
def soliton_factory(rng):
    def make(p, n_star, r):
        data, _ = random_soliton_data(rng, p, n_star, r)
        return data
    return make


@pytest.fixture
def dressing_factory(rng):
    def make(p, n_star, r):
        return build_system(p, n_star), random_dressing_data(rng, p, n_star, r)
    return make


def spot_data():
    """p=2, n*=1 one-soliton tuned so that E_2 H = 1/2 at the origin."""
    from looptoda.solitons import SolitonData
    system = build_system(2, 1)
    k = 1.0409836065573776 + 0.9508196721311479j
    return SolitonData(system, [0.8 + 0.3j], [1.4 - 0.2j], [1], [1], [2], [[[1.0]]], [[[1.0]]], [[[k]]])


ACCEPTANCE_LINES = []


def record_criterion(number, ok, text):
    line = f"criterion {number:2d}: {'PASS' if ok else 'FAIL'}  {text}"
    ACCEPTANCE_LINES.append(line)
    print(line)
    return ok


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)
