"""Truncated boson x collective-spin product basis and its parity sectors.

States are labelled by the boson occupation ``n`` and the spin index
``m_idx = m + j`` so that all parity arithmetic stays in integers.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass, field
from fractions import Fraction
from typing import NamedTuple

import numpy as np


class Parity(str, enum.Enum):
    EVEN = "even"
    ODD = "odd"

    @property
    def bit(self) -> int:
        return 0 if self is Parity.EVEN else 1


class BasisState(NamedTuple):
    n: int
    m_idx: int

    def m(self, j: float) -> float:
        return self.m_idx - j

    @property
    def excitations(self) -> int:
        """Eigenvalue of a^dag a + J_z + j."""
        return self.n + self.m_idx


def as_parity(sector) -> Parity:
    if isinstance(sector, Parity):
        return sector
    try:
        return Parity(str(sector).lower())
    except ValueError:
        raise ValueError(f"unknown parity sector {sector!r}") from None


def two_j(j) -> int:
    """Return 2j as an int, rejecting anything that is not a positive half-integer."""
    try:
        twice = Fraction(j) * 2
    except (TypeError, ValueError):
        raise ValueError(f"pseudospin length must be a half-integer, got {j!r}") from None
    if twice.denominator != 1 or twice <= 0:
        raise ValueError(f"pseudospin length must be a positive half-integer, got {j!r}")
    return int(twice)


def parity_of(state: BasisState, j=None) -> Parity:
    """Parity sector of ``state``; ``j`` is accepted for symmetry with the m-label form."""
    return Parity.ODD if state.excitations % 2 else Parity.EVEN


@dataclass(frozen=True)
class SectorBasis:
    j: float
    n_max: int
    sector: Parity
    states: tuple[BasisState, ...]
    _index: dict = field(repr=False, compare=False, hash=False)

    def __len__(self) -> int:
        return len(self.states)

    @property
    def dim(self) -> int:
        return len(self.states)

    @property
    def two_j(self) -> int:
        return two_j(self.j)

    def index(self, n: int, m_idx: int) -> int:
        """Position of the state (n, m_idx); raises KeyError if absent from this sector."""
        return self._index[(n, m_idx)]

    def __contains__(self, state) -> bool:
        return tuple(state) in self._index

    @property
    def n(self) -> np.ndarray:
        return np.fromiter((s.n for s in self.states), dtype=np.int64, count=self.dim)

    @property
    def m_idx(self) -> np.ndarray:
        return np.fromiter((s.m_idx for s in self.states), dtype=np.int64, count=self.dim)

    @property
    def m(self) -> np.ndarray:
        return self.m_idx - self.two_j / 2


def build_basis(j, n_max: int, sector) -> SectorBasis:
    """All (n, m_idx) product states of one parity, ordered lexicographically.

    ``j`` may be any half-integer (1, 2.5, Fraction(7, 2), ...). Pass
    ``sector="all"`` to get the unrestricted product basis in the same order.
    """
    tj = two_j(j)
    if int(n_max) != n_max or n_max < 1:
        raise ValueError(f"boson cutoff must be an integer >= 1, got {n_max!r}")
    n_max = int(n_max)
    if str(sector).lower() == "all":
        keep = None
        tag = None
    else:
        tag = as_parity(sector)
        keep = tag.bit
    states = tuple(
        BasisState(n, m_idx)
        for n in range(n_max + 1)
        for m_idx in range(tj + 1)
        if keep is None or (n + m_idx) % 2 == keep
    )
    index = {tuple(s): k for k, s in enumerate(states)}
    return SectorBasis(j=tj / 2, n_max=n_max, sector=tag, states=states, _index=index)


def full_basis(j, n_max: int) -> SectorBasis:
    return build_basis(j, n_max, "all")
