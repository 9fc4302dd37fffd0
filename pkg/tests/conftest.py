import importlib
import sys

import numpy as np
import pytest

from rssinfer import _backend, _pykernels

try:
    _ckernels = importlib.import_module("rssinfer._ckernels")
except ImportError:  # pragma: no cover - depends on the build
    _ckernels = None

KERNELS = {"python": _pykernels, "cython": _ckernels}


@pytest.fixture(params=["python", "cython"])
def backend(request, monkeypatch):
    """Run the test once per kernel implementation."""
    mod = KERNELS[request.param]
    if mod is None:
        pytest.skip("compiled kernels not built")
    monkeypatch.setattr(_backend, "kernels", mod)
    return request.param


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def pytest_report_header(config):
    return f"rssinfer kernels: {_backend.BACKEND}"


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    lines = getattr(mod, "REPORT_LINES", None)
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in sorted(lines, key=lambda s: s.split(":")[0].split()[-1].zfill(2)):
            terminalreporter.write_line(line)


def random_dataset(rng, k, n, empty_ok=True):
    """RSS dataset with random stratum sizes and uniform data."""
    from rssinfer.sampling import simulate_rss

    probs = rng.dirichlet(np.ones(k))
    design = rng.multinomial(n, probs)
    if not empty_ok:
        design = design + 1
    return simulate_rss(k, [int(d) for d in design], "uniform", seed=int(rng.integers(2**31)))
