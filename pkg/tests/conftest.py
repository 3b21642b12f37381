import sys

import numpy as np
import pytest

from landscape_lab.landscape import EmpiricalMeasure, TargetFunction
from landscape_lab.net_core import ParameterVector, Topology


def random_instance(rng, d=None, m=None, n=None, o=1):
    d = d or int(rng.integers(1, 4))
    m = m or int(rng.integers(1, 5))
    n = n or int(rng.integers(5, 51))
    topo = Topology(d, m, o)
    theta = ParameterVector.random(topo, rng)
    w = rng.uniform(0.5, 1.5, n)
    mu = EmpiricalMeasure(rng.normal(size=(n, d)), w / w.sum())
    f = TargetFunction(rng.normal(size=n) if o == 1 else rng.normal(size=(n, o)))
    return theta, mu, f


def fd_gradient(fun, x, h=1e-6):
    g = np.zeros_like(x)
    for i in range(x.size):
        e = np.zeros_like(x)
        e[i] = h
        g[i] = (fun(x + e) - fun(x - e)) / (2 * h)
    return g


def fd_jacobian(fun, x, h=1e-5):
    cols = []
    for i in range(x.size):
        e = np.zeros_like(x)
        e[i] = h
        cols.append((fun(x + e) - fun(x - e)) / (2 * h))
    return np.array(cols).T


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    if mod is None or not mod.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for line in mod.summary_lines():
        terminalreporter.write_line(line)
