"""Spectrum of the odd-parity block and its nearest-neighbour spacing statistics.

Weak coupling gives Poisson-like spacings, strong coupling gives level repulsion.
The KS distance to each reference law says which one the data sit closer to.
"""
import numpy as np

from dicke_ldos import ModelParams, build_basis, converged_state_count, decompose, spacing_statistics, unfold

J, N_MAX = 10, 150

basis = build_basis(J, N_MAX, "odd")
print(f"odd block: {basis.dim} states (j={J}, n_max={N_MAX})")

for lam in (0.1, 0.8):
    p = ModelParams(lam=lam, j=J, n_max=N_MAX)
    K = converged_state_count(p, basis)
    levels = decompose(p).energies[:K]
    stats = spacing_statistics(unfold(levels))
    print(f"lam={lam}: {K} converged levels, E0={levels[0]:.4f}")
    print(f"  KS to Poisson {stats.ks_poisson:.3f}, to Wigner {stats.ks_wigner:.3f} -> {stats.closer_to}")

    # coarse text histogram of P(s)
    centers = 0.5 * (stats.hist_edges[1:] + stats.hist_edges[:-1])
    for c, h in zip(centers[:20:2], stats.hist_density[:20:2]):
        print(f"  s={c:4.2f} {'#' * int(round(20 * h))}")
