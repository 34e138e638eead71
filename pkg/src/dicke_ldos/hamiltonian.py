"""Dense sector matrices for the Dicke Hamiltonian and its rotating-wave version.

    H(lam) = omega0 J_z + omega a^dag a + lam / sqrt(2j) (a^dag + a)(J_+ + J_-)     (full)
    H(lam) = omega0 J_z + omega a^dag a + lam / sqrt(2j) (a^dag J_- + a J_+)       (rwa)

Both are affine in ``lam``: H(lam) = H_free + lam * V with V the coupling
operator returned by :func:`build_perturbation_operator`.
"""
from __future__ import annotations

import hashlib
from dataclasses import dataclass, replace

import numpy as np

from .hilbert import Parity, SectorBasis, as_parity, build_basis, two_j
from .spectral import EigenDecomposition, diagonalize, eigenvalues

VARIANTS = ("full", "rwa")

# bump when matrix assembly or eigen-data conventions change; part of cache keys
MODEL_VERSION = "1"


@dataclass(frozen=True)
class ModelParams:
    omega: float = 1.0
    omega0: float = 1.0
    lam: float = 0.0
    j: float = 10.0
    n_max: int = 150
    variant: str = "full"

    def __post_init__(self):
        if not self.omega > 0 or not self.omega0 > 0:
            raise ValueError("omega and omega0 must be positive")
        if not self.lam >= 0:
            raise ValueError(f"coupling must be non-negative, got {self.lam}")
        if self.variant not in VARIANTS:
            raise ValueError(f"variant must be one of {VARIANTS}, got {self.variant!r}")
        object.__setattr__(self, "j", two_j(self.j) / 2)
        if int(self.n_max) != self.n_max or self.n_max < 1:
            raise ValueError(f"n_max must be an integer >= 1, got {self.n_max!r}")
        object.__setattr__(self, "n_max", int(self.n_max))

    @property
    def critical_coupling(self) -> float:
        """Thermodynamic-limit critical coupling; twice as large for the rwa variant."""
        lc = np.sqrt(self.omega * self.omega0) / 2
        return float(lc if self.variant == "full" else 2 * lc)

    def with_coupling(self, lam: float) -> "ModelParams":
        return replace(self, lam=float(lam))

    def fingerprint(self, sector) -> str:
        key = (
            f"dicke|{MODEL_VERSION}|{self.variant}|{self.omega!r}|{self.omega0!r}|"
            f"{self.lam!r}|{self.j!r}|{self.n_max}|{as_parity(sector).value}"
        )
        return hashlib.sha256(key.encode()).hexdigest()


def _check_basis(params: ModelParams, basis: SectorBasis):
    if basis.j != params.j or basis.n_max != params.n_max:
        raise ValueError(
            f"basis (j={basis.j}, n_max={basis.n_max}) does not match "
            f"params (j={params.j}, n_max={params.n_max})"
        )


def _ladder_pairs(basis: SectorBasis, counter_rotating: bool):
    """Index pairs (k, l) and coefficients sqrt(n+1) c(m) / sqrt(2j) for boson-raising terms.

    Each unordered pair appears once, from the lower-n state ``k``.
    """
    tj = basis.two_j
    j = tj / 2
    n = basis.n
    m_idx = basis.m_idx
    m = m_idx - j
    lookup = np.full((basis.n_max + 2, tj + 3), -1, dtype=np.int64)
    lookup[n, m_idx + 1] = np.arange(basis.dim)

    rows, cols, vals = [], [], []
    shifts = (-1, +1) if counter_rotating else (-1,)
    for dm in shifts:
        target = lookup[n + 1, m_idx + dm + 1]
        ok = target >= 0
        # a^dag J_- (dm=-1) is co-rotating, a^dag J_+ (dm=+1) counter-rotating
        coef = np.sqrt(n[ok] + 1.0) * np.sqrt(j * (j + 1) - m[ok] * (m[ok] + dm))
        rows.append(np.nonzero(ok)[0])
        cols.append(target[ok])
        vals.append(coef / np.sqrt(tj))
    return np.concatenate(rows), np.concatenate(cols), np.concatenate(vals)


def free_hamiltonian(params: ModelParams, basis: SectorBasis) -> np.ndarray:
    _check_basis(params, basis)
    return np.diag(params.omega * basis.n + params.omega0 * basis.m)


def build_perturbation_operator(params: ModelParams, basis: SectorBasis) -> np.ndarray:
    """The coupling operator dH/dlam (independent of ``params.lam``)."""
    _check_basis(params, basis)
    k, l, v = _ladder_pairs(basis, counter_rotating=params.variant == "full")
    out = np.zeros((basis.dim, basis.dim))
    out[k, l] = v
    out[l, k] = v
    return out


def build_hamiltonian(params: ModelParams, basis: SectorBasis) -> np.ndarray:
    _check_basis(params, basis)
    k, l, v = _ladder_pairs(basis, counter_rotating=params.variant == "full")
    out = np.diag(params.omega * basis.n + params.omega0 * basis.m)
    v = params.lam * v
    out[k, l] = v
    out[l, k] = v
    return out


def sector_hamiltonian(params: ModelParams, sector=Parity.ODD) -> tuple[SectorBasis, np.ndarray]:
    basis = build_basis(params.j, params.n_max, sector)
    return basis, build_hamiltonian(params, basis)


def decompose(params: ModelParams, sector=Parity.ODD, method: str = "lapack") -> EigenDecomposition:
    """Eigen-data of one parity sector, tagged with the parameter fingerprint."""
    _, H = sector_hamiltonian(params, sector)
    return diagonalize(H, method=method, fingerprint=params.fingerprint(sector))


def default_probe_increment(n_max: int) -> int:
    return max(10, n_max // 10)


def converged_state_count(
    params: ModelParams,
    basis: SectorBasis,
    tol: float = 1e-8,
    probe_increment: int | None = None,
) -> int:
    """Number of low-lying levels that do not move when the boson cutoff is raised.

    Diagonalizes at ``n_max`` and ``n_max + probe_increment`` and returns the
    largest K such that the K lowest eigenvalues agree within ``tol``. K = 0
    means the truncation is unusable.
    """
    _check_basis(params, basis)
    if not tol > 0:
        raise ValueError("tol must be positive")
    if probe_increment is None:
        probe_increment = default_probe_increment(params.n_max)
    if probe_increment < 0:
        raise ValueError("probe_increment must be >= 0")
    low = eigenvalues(build_hamiltonian(params, basis))
    if probe_increment == 0:
        return len(low)
    bigger = replace(params, n_max=params.n_max + probe_increment)
    high = eigenvalues(build_hamiltonian(bigger, build_basis(bigger.j, bigger.n_max, basis.sector)))
    moved = np.nonzero(np.abs(low - high[: len(low)]) > tol)[0]
    return int(moved[0]) if len(moved) else len(low)
