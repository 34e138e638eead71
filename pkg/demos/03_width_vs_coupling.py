"""LDOS width at a fixed small perturbation, as a function of the coupling.

The full model shows a drop and then a plateau once it becomes chaotic. The
rotating-wave model stays integrable, and its width stays flat through its
own critical coupling.
"""
import numpy as np

from dicke_ldos import ModelParams, gamma_vs_lambda

base = ModelParams(j=5, n_max=80)
# an absolute window that stays converged over the whole coupling range
sweeps = gamma_vs_lambda(base, np.arange(0.1, 1.01, 0.1).round(2), 1e-3, range(40, 80),
                         variants=("full",))
sweeps.update(gamma_vs_lambda(base, np.arange(0.1, 1.41, 0.1).round(2), 1e-3, range(40, 80),
                              variants=("rwa",)))

for variant, sw in sweeps.items():
    print(variant)
    for lam, g in zip(sw.abscissa, sw.gamma):
        print(f"  lam={lam:4.2f}  width={g:.4e}")
