"""Fidelity amplitude after a small coupling quench, with the mixed decay fit.

The trace is computed spectrally from the same overlaps as the LDOS. The fit
mixes a Gaussian (weight a) with an exponential. In the quadratic-width regime
a drops towards zero.
"""
import numpy as np

from dicke_ldos import ModelParams, build_basis, converged_state_count, decompose, fidelity_amplitude, fit_decay
from dicke_ldos.fidelity import half_decay_time

J, N_MAX = 5, 60
window = range(30, 60)

for lam in (0.1, 0.8):
    p0 = ModelParams(lam=lam, j=J, n_max=N_MAX)
    assert converged_state_count(p0, build_basis(J, N_MAX, "odd")) >= window.stop
    unpert = decompose(p0)
    print(f"lam0={lam}")
    for d in (1e-3, 1e-2, 5e-2):
        trace = fidelity_amplitude(unpert, decompose(p0.with_coupling(lam + d)), window)
        line = f"  dlam={d:g}: width={trace.gamma:.3e}, |O|=1/2 at t={half_decay_time(trace):.1f}"
        try:
            fit = fit_decay(trace)
            line += f", fit a={fit.a:.2f} b={fit.b:.3g} c={fit.c:.3g} rms={fit.residual:.2g}"
        except ValueError as exc:
            line += f", fit skipped ({exc})"
        print(line)

# modulus samples of one trace
p0 = ModelParams(lam=0.8, j=J, n_max=N_MAX)
trace = fidelity_amplitude(decompose(p0), decompose(p0.with_coupling(0.81)), window)
for t, m in zip(trace.times[::60], trace.modulus[::60]):
    print(f"t={t:8.1f} |O|={m:.4f} {'*' * int(40 * m)}")
