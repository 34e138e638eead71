"""Averaging the Loschmidt echo over Haar-random states.

The average over random pure states depends only on the full-block trace O(t):
M(t) = (d + |O(t)|^2) / (d (d + 1)). A small block lets us check this by brute
force with explicit propagators.
"""
import numpy as np
from scipy.linalg import expm

from dicke_ldos import ModelParams, decompose, full_trace_amplitude, sector_hamiltonian
from dicke_ldos.fidelity import averaged_loschmidt

rng = np.random.default_rng(0)
p0 = ModelParams(lam=0.8, j=2, n_max=7)
pp = p0.with_coupling(1.1)
_, H = sector_hamiltonian(p0)
_, Hp = sector_hamiltonian(pp)
d = len(H)

times = np.linspace(0, 20, 9)
formula = averaged_loschmidt(full_trace_amplitude(decompose(p0), decompose(pp), times), d)

z = rng.normal(size=(5000, d)) + 1j * rng.normal(size=(5000, d))
psi = z / np.linalg.norm(z, axis=1, keepdims=True)
print(f"block dimension {d}, floor 1/(d+1) = {1 / (d + 1):.4f}")
for t, f in zip(times, formula):
    echo = expm(1j * Hp * t) @ expm(-1j * H * t)
    m = np.abs(np.einsum("si,ij,sj->s", psi.conj(), echo, psi)) ** 2
    print(f"t={t:5.1f}  formula {f:.4f}  sampled {m.mean():.4f} +- {m.std() / np.sqrt(len(m)):.4f}")
