"""Local density of states under a coupling quench and its width.

For an unperturbed eigenstate |i(lam0)> the LDOS places weight
|<j(lam0 + dlam)|i(lam0)>|^2 at the energy E_j(lam0 + dlam) - E_i(lam0).
Averaging over a window of consecutive unperturbed states gives the
microcanonical LDOS, whose width ``gamma`` is the half-interval around the
mean that holds 70% of the weight.
"""
from __future__ import annotations

import itertools
import logging
import warnings
from dataclasses import dataclass, field, replace
from typing import Callable

import numpy as np

from .hamiltonian import (
    ModelParams,
    build_perturbation_operator,
    converged_state_count,
    decompose as _decompose,
)
from .hilbert import Parity, build_basis
from .spectral import EigenDecomposition, UnconvergedWindowError, Window, as_range, mean_level_spacing

log = logging.getLogger(__name__)

GAMMA_FRACTION = 0.7
LEAKAGE_WARN = 0.01


class LeakageWarning(UserWarning):
    pass


def _check_pair(unpert: EigenDecomposition, pert: EigenDecomposition):
    if unpert.vectors.shape != pert.vectors.shape:
        raise ValueError(
            f"decompositions live in different spaces: {unpert.vectors.shape} vs {pert.vectors.shape}"
        )


def overlap_weights(unpert: EigenDecomposition, pert: EigenDecomposition, i: int):
    """Energies E_j' - E_i and weights |<j'|i>|^2 over every perturbed level j."""
    _check_pair(unpert, pert)
    if not 0 <= i < unpert.dim:
        raise IndexError(f"state {i} outside spectrum of size {unpert.dim}")
    amp = pert.vectors.T @ unpert.vectors[:, i]
    return pert.energies - unpert.energies[i], amp * amp


def window_overlaps(unpert: EigenDecomposition, pert: EigenDecomposition, window):
    """Weight matrix w[j, k] = |<j'|i_k>|^2 for i_k in ``window`` (shape dim x W)."""
    _check_pair(unpert, pert)
    idx = as_range(window)
    if len(idx) == 0:
        raise ValueError("empty window")
    if idx[0] < 0 or idx[-1] >= unpert.dim:
        raise IndexError(f"window {idx} outside spectrum of size {unpert.dim}")
    amp = pert.vectors.T @ unpert.vectors[:, idx.start: idx.stop]
    return amp * amp


def width_gamma(energies, weights, mean_energy=None, fraction: float = GAMMA_FRACTION) -> float:
    """Smallest sigma such that the weight within |E - <E>| <= sigma reaches ``fraction``."""
    energies = np.asarray(energies, dtype=float).ravel()
    weights = np.asarray(weights, dtype=float).ravel()
    total = weights.sum()
    if total < fraction * (1 - 1e-12):
        raise ValueError(f"total weight {total:.6g} is below the target fraction {fraction}")
    if mean_energy is None:
        mean_energy = float(energies @ weights / total)
    dist = np.abs(energies - mean_energy)
    order = np.argsort(dist, kind="stable")
    cum = np.cumsum(weights[order])
    k = int(np.searchsorted(cum, fraction * (1 - 1e-12)))
    return float(dist[order][min(k, len(cum) - 1)])


@dataclass
class LdosHistogram:
    bin_edges: np.ndarray
    weights: np.ndarray
    mean_energy: float
    gamma: float
    leakage: float
    energies: np.ndarray = field(repr=False)
    probabilities: np.ndarray = field(repr=False)

    @property
    def bin_centers(self) -> np.ndarray:
        return 0.5 * (self.bin_edges[1:] + self.bin_edges[:-1])

    @property
    def density(self) -> np.ndarray:
        return self.weights / np.diff(self.bin_edges)

    def characteristic_function(self, times) -> np.ndarray:
        """sum_k p_k exp(-i E_k t) over the raw (unbinned) pairs."""
        times = np.atleast_1d(np.asarray(times, dtype=float))
        out = np.empty(len(times), dtype=complex)
        for n, t in enumerate(times):
            out[n] = np.sum(self.probabilities * np.exp(-1j * self.energies * t))
        return out


def averaged_ldos(
    unpert: EigenDecomposition,
    pert: EigenDecomposition,
    window,
    bin_width: float | None = None,
    converged: int | None = None,
    span: float | None = None,
    n_bins: int = 200,
) -> LdosHistogram:
    """Window-averaged LDOS.

    The mean and ``gamma`` come from the raw pairs. The histogram covers the
    perturbed levels below ``converged`` (all levels if None), on a grid
    centred at the mean and clipped to ``mean +/- span`` when given; weight
    that misses the grid is reported as ``leakage``.
    """
    idx = as_range(window)
    w = window_overlaps(unpert, pert, idx) / len(idx)
    E = pert.energies[:, None] - unpert.energies[None, idx.start: idx.stop]
    energies, probs = E.ravel(), w.ravel()
    mean = float(energies @ probs / probs.sum())
    gamma = width_gamma(energies, probs, mean)

    keep = np.ones(pert.dim, dtype=bool)
    if converged is not None:
        keep[converged:] = False
    sel_E, sel_w = E[keep].ravel(), w[keep].ravel()
    half = float(np.max(np.abs(sel_E - mean))) if sel_E.size else 0.0
    if span is not None:
        half = min(half, span)
    if bin_width is None:
        bin_width = 2 * half / n_bins if half > 0 else 1.0
    nside = int(np.ceil(half / bin_width - 0.5 + 1e-9)) if half > 0 else 0
    edges = mean + bin_width * (np.arange(-nside, nside + 2) - 0.5)
    hist, _ = np.histogram(sel_E, bins=edges, weights=sel_w)
    leakage = max(0.0, 1.0 - float(hist.sum()))
    if leakage > LEAKAGE_WARN:
        warnings.warn(f"LDOS leakage {leakage:.3g} outside the converged grid", LeakageWarning, stacklevel=2)
    return LdosHistogram(edges, hist, mean, gamma, leakage, energies, probs)


def segmented_loglog_fit(x, y, n_breaks: int = 2, min_points: int = 3):
    """Continuous piecewise-linear least squares of log y against log x.

    Breakpoints are searched exhaustively over the sample abscissae, each
    segment keeping at least ``min_points`` samples. Returns
    (breakpoints in x units, slopes per segment, residual sum of squares).
    """
    lx, ly = np.log(np.asarray(x, dtype=float)), np.log(np.asarray(y, dtype=float))
    n = len(lx)
    step = min_points - 1
    if n < (n_breaks + 1) * step + 1:
        raise ValueError(f"{n} points cannot hold {n_breaks + 1} segments of {min_points}")
    best = None
    for combo in itertools.combinations(range(step, n - step), n_breaks):
        if any(b - a < step for a, b in zip(combo, combo[1:])):
            continue
        cols = [np.ones(n), lx] + [np.maximum(lx - lx[c], 0.0) for c in combo]
        A = np.column_stack(cols)
        coef, *_ = np.linalg.lstsq(A, ly, rcond=None)
        rss = float(np.sum((A @ coef - ly) ** 2))
        if best is None or rss < best[0]:
            best = (rss, combo, coef)
    rss, combo, coef = best
    slopes = np.cumsum(coef[1:])
    return np.exp(lx[list(combo)]), slopes, rss


def loglog_slope(x, y) -> float:
    return float(np.polyfit(np.log(x), np.log(y), 1)[0])


@dataclass
class SweepResult:
    abscissa: np.ndarray
    gamma: np.ndarray
    breakpoints: np.ndarray = field(default_factory=lambda: np.array([]))
    regime_slopes: np.ndarray = field(default_factory=lambda: np.array([]))
    global_slope: float = float("nan")
    label: str = ""


Decomposer = Callable[[ModelParams, Parity], EigenDecomposition]


def _converged(params, sector, converged):
    if converged is None:
        return converged_state_count(params, build_basis(params.j, params.n_max, sector))
    if callable(converged):
        return converged(params, sector)
    return int(converged)


def _resolve(window, K):
    if isinstance(window, Window):
        return window.resolve(K)
    idx = as_range(window)
    if idx.stop > K:
        raise UnconvergedWindowError(idx.start, idx.stop, K)
    return idx


def gamma_vs_delta(
    params0: ModelParams,
    delta_list,
    window=Window(0.4, 0.6),
    sector=Parity.ODD,
    decompose: Decomposer | None = None,
    converged=None,
    n_breaks: int = 2,
) -> SweepResult:
    """LDOS width against perturbation strength, with log-log regime slopes.

    ``converged`` is the unperturbed converged count, a callable
    (params, sector) -> count, or None to compute it.
    """
    decompose = decompose or _decompose
    deltas = np.asarray(delta_list, dtype=float)
    if np.any(deltas <= 0) or np.any(np.diff(deltas) <= 0):
        raise ValueError("perturbations must be positive and strictly increasing")
    idx = _resolve(window, _converged(params0, sector, converged))
    unpert = decompose(params0, sector)
    gammas = np.empty(len(deltas))
    for k, d in enumerate(deltas):
        pert = decompose(params0.with_coupling(params0.lam + d), sector)
        w = window_overlaps(unpert, pert, idx) / len(idx)
        E = pert.energies[:, None] - unpert.energies[None, idx.start: idx.stop]
        gammas[k] = width_gamma(E, w)
        log.debug("lam0=%g dlam=%g gamma=%g", params0.lam, d, gammas[k])
    out = SweepResult(deltas, gammas, global_slope=loglog_slope(deltas, gammas),
                      label=f"{params0.variant} lam0={params0.lam:g}")
    if n_breaks and len(deltas) >= (n_breaks + 1) * 2 + 1:
        out.breakpoints, out.regime_slopes, _ = segmented_loglog_fit(deltas, gammas, n_breaks)
    return out


def gamma_vs_lambda(
    base: ModelParams,
    lambda_list,
    delta: float,
    window=Window(0.4, 0.6),
    sector=Parity.ODD,
    variants=("full", "rwa"),
    decompose: Decomposer | None = None,
    converged=None,
) -> dict[str, SweepResult]:
    """LDOS width against the unperturbed coupling at fixed ``delta``, per model variant.

    Keep ``delta`` inside one perturbative regime over the whole sweep; the
    function does not check this.
    """
    decompose = decompose or _decompose
    lams = np.asarray(lambda_list, dtype=float)
    if np.any(np.diff(lams) <= 0):
        raise ValueError("couplings must be strictly increasing")
    out = {}
    for variant in variants:
        gammas = np.empty(len(lams))
        for k, lam in enumerate(lams):
            p0 = replace(base, variant=variant, lam=float(lam))
            idx = _resolve(window, _converged(p0, sector, converged))
            unpert = decompose(p0, sector)
            pert = decompose(p0.with_coupling(lam + delta), sector)
            w = window_overlaps(unpert, pert, idx) / len(idx)
            E = pert.energies[:, None] - unpert.energies[None, idx.start: idx.stop]
            gammas[k] = width_gamma(E, w)
        out[variant] = SweepResult(lams, gammas, label=f"{variant} dlam={delta:g}")
    return out


def perturbation_in_eigenbasis(Hp: np.ndarray, unpert: EigenDecomposition, idx: range) -> np.ndarray:
    V = unpert.vectors[:, idx.start: idx.stop]
    return V.T @ Hp @ V


def perturbation_profile(Hp: np.ndarray, unpert: EigenDecomposition, window, margin: int = 0):
    """Mean |H'_ij| in the unperturbed eigenbasis as a function of i - j.

    Uses the window widened by ``margin`` levels on each side. Returns
    (offsets, mean magnitudes) for offsets -(L-1)..(L-1).
    """
    if Hp.shape != unpert.vectors.shape:
        raise ValueError("operator and eigenbasis dimensions differ")
    idx = as_range(window)
    idx = range(max(0, idx.start - margin), min(unpert.dim, idx.stop + margin))
    M = np.abs(perturbation_in_eigenbasis(Hp, unpert, idx))
    L = len(idx)
    offsets = np.arange(-(L - 1), L)
    profile = np.array([np.diagonal(M, offset=-o).mean() for o in offsets])
    return offsets, profile


def validity_threshold(Hp: np.ndarray, unpert: EigenDecomposition, window, band: int | None = None) -> float:
    """Largest perturbation for which |H'_ij| dlam / mean spacing stays below one.

    The maximum runs over i != j in the window with |i - j| <= ``band``
    (all pairs when None).
    """
    idx = as_range(window)
    M = np.abs(perturbation_in_eigenbasis(Hp, unpert, idx))
    np.fill_diagonal(M, 0.0)
    if band is not None:
        i, j = np.indices(M.shape)
        M[np.abs(i - j) > band] = 0.0
    return mean_level_spacing(unpert, idx) / float(M.max())


def perturbation_operator_for(params: ModelParams, sector=Parity.ODD) -> np.ndarray:
    return build_perturbation_operator(params, build_basis(params.j, params.n_max, sector))
