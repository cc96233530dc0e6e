import sys

import numpy as np
import pytest
from mpmath import mp, mpf, mpc
import mpmath

from softexp.network import Layer, Network, Projection


def mp_softexp(alpha, x, dps=60):
    """High precision three-branch oracle, written straight from the formula."""
    # never lower the working precision of a caller such as mpmath.diff
    with mp.workdps(max(dps, mp.dps)):
        a, x = mpf(alpha), mpf(x)
        if a < 0:
            return -mpmath.log(1 - a * (x + a)) / a
        if a == 0:
            return x
        return (mpmath.exp(a * x) - 1) / a + a


def mp_softexp_complex(alpha, x, dps=60):
    """Exponential form in complex arithmetic (used away from negative reals)."""
    with mp.workdps(max(dps, mp.dps)):
        a, x = mpc(alpha), mpc(x)
        if a == 0:
            return x
        return (mpmath.exp(a * x) - 1) / a + a


def central_difference(fn, x0, step=1e-6):
    return (fn(x0 + step) - fn(x0 - step)) / (2 * step)


def random_network(rng, max_layers=3, max_width=5, alpha_range=0.5, real_output=True):
    depth = int(rng.integers(1, max_layers + 1))
    widths = [int(w) for w in rng.integers(1, max_width + 1, size=depth + 1)]
    layers = []
    for n_in, n_out in zip(widths[:-1], widths[1:]):
        w = rng.normal(size=(n_out, n_in)) / np.sqrt(n_in)
        layers.append(
            Layer(
                w,
                0.2 * rng.normal(size=n_out),
                rng.uniform(-alpha_range, alpha_range, size=n_out),
            )
        )
    if real_output:
        layers[-1].projection = Projection.REAL_PART
    return Network(widths[0], layers)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def pytest_terminal_summary(terminalreporter):
    module = sys.modules.get("test_acceptance")
    lines = getattr(module, "SUMMARY", None)
    if lines:
        terminalreporter.section("acceptance criteria")
        for number in sorted(lines):
            terminalreporter.write_line(lines[number])
