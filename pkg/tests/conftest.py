import sys
from collections import OrderedDict
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from dicke_ldos.hamiltonian import ModelParams, converged_state_count, decompose, sector_hamiltonian  # noqa: E402
from dicke_ldos.hilbert import Parity, build_basis  # noqa: E402
from dicke_ldos.spectral import EigensolverError  # noqa: E402

# desk-scale protocol shared by the acceptance suite
DESK = dict(j=10, n_max=150)
DESK_WINDOW = range(150, 300)

_ACCEPTANCE: list[tuple[str, bool, str]] = []


def pytest_addoption(parser):
    parser.addoption("--runslow", action="store_true", default=False, help="run reference-size checks (j=20, n_max=350)")


def pytest_collection_modifyitems(config, items):
    if config.getoption("--runslow"):
        return
    skip = pytest.mark.skip(reason="reference-size; use --runslow")
    for item in items:
        if "slow" in item.keywords:
            item.add_marker(skip)


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for name, ok, detail in _ACCEPTANCE:
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'}  {name}  {detail}")


class EigenStore:
    """Memoized decompositions and converged counts, keyed by parameter fingerprint.

    Every decomposition is checked against its Hamiltonian when first built
    (residual and orthogonality bounds); results land in ``checks``. Only the
    ``capacity`` most recently used decompositions stay in memory.
    """

    def __init__(self, capacity=24):
        self.capacity = capacity
        self.decomps = OrderedDict()
        self.counts = {}
        self.checks = {}

    def __call__(self, params: ModelParams, sector=Parity.ODD):
        key = params.fingerprint(sector)
        if key in self.decomps:
            self.decomps.move_to_end(key)
            return self.decomps[key]
        basis, H = sector_hamiltonian(params, sector)
        decomp = decompose(params, sector)
        try:
            decomp.validate(H)
            self.checks[key] = (True, "")
        except EigensolverError as exc:
            self.checks[key] = (False, f"{params} {sector}: {exc}")
        self.decomps[key] = decomp
        while len(self.decomps) > self.capacity:
            self.decomps.popitem(last=False)
        return decomp

    def converged(self, params: ModelParams, sector=Parity.ODD):
        key = params.fingerprint(sector)
        if key not in self.counts:
            self.counts[key] = converged_state_count(params, build_basis(params.j, params.n_max, sector))
        return self.counts[key]


@pytest.fixture(scope="session")
def store():
    return EigenStore()


@pytest.fixture(scope="session")
def record():
    def _record(name, ok, detail=""):
        _ACCEPTANCE.append((name, bool(ok), detail))
        return ok
    return _record


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
