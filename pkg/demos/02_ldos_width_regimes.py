"""Width of the averaged local density of states against the coupling perturbation.

On the chaotic side the width grows linearly for tiny perturbations, then
quadratically, then linearly again. The first crossover sits near the point
where first-order perturbation theory stops being valid.
"""
import numpy as np

from dicke_ldos import ModelParams, Window, build_basis, converged_state_count, decompose, gamma_vs_delta
from dicke_ldos.ldos import perturbation_operator_for, validity_threshold

J, N_MAX = 5, 60
p0 = ModelParams(lam=0.8, j=J, n_max=N_MAX)
K = converged_state_count(p0, build_basis(J, N_MAX, "odd"))
window = Window(0.4, 0.6)
idx = window.resolve(K)
print(f"converged states: {K}, averaging window {idx.start}..{idx.stop - 1}")

deltas = np.logspace(-4, np.log10(0.3), 20)
sweep = gamma_vs_delta(p0, deltas, window, converged=K)
for d, g in zip(sweep.abscissa, sweep.gamma):
    print(f"  dlam={d:9.3e}  width={g:9.3e}")

print("fitted log-log slopes:", np.round(sweep.regime_slopes, 2))
print("breakpoints:", np.round(sweep.breakpoints, 5))

unpert = decompose(p0)
thr = validity_threshold(perturbation_operator_for(p0), unpert, idx)
print(f"first-order validity threshold: {thr:.4g}")
