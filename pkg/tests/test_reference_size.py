"""Reference-size checks (j=20, n_max=350, odd block of 7195 states). Run with --runslow.

One decomposition takes minutes and about 0.4 GB, so the sweep holds at most
two at a time.
"""
import numpy as np
import pytest

from dicke_ldos.hamiltonian import ModelParams, decompose
from dicke_ldos.hilbert import Parity
from dicke_ldos.ldos import gamma_vs_delta, perturbation_operator_for, validity_threshold
from dicke_ldos.spectral import mean_level_spacing

pytestmark = pytest.mark.slow

WINDOW = range(400, 600)
P0 = ModelParams(lam=0.8, j=20, n_max=350)


@pytest.fixture(scope="module")
def unpert():
    return decompose(P0, Parity.ODD)


def test_spacing_and_threshold(unpert):
    assert unpert.dim == 7195
    spacing = mean_level_spacing(unpert, WINDOW)
    threshold = validity_threshold(perturbation_operator_for(P0), unpert, WINDOW)
    print(f"mean spacing {spacing:.4f}, first-order threshold {threshold:.4g}")
    assert spacing == pytest.approx(0.07, rel=0.3)
    assert threshold == pytest.approx(0.003, rel=0.5)


def test_three_regimes(unpert):
    deltas = np.logspace(-4, np.log10(0.3), 25)
    sweep = gamma_vs_delta(P0, deltas, WINDOW, Parity.ODD,
                           decompose=lambda p, s: unpert if p == P0 else decompose(p, s))
    s1, s2, s3 = sweep.regime_slopes
    assert abs(s1 - 1) <= 0.3 and abs(s2 - 2) <= 0.3 and abs(s3 - 1) <= 0.4
    assert 0.001 <= sweep.breakpoints[0] <= 0.009
