"""Fidelity amplitude after a coupling quench, evaluated from eigen-data.

The windowed amplitude is the characteristic function of the averaged LDOS,

    O(t) = (1/W) sum_{i in window} sum_j |<j'|i>|^2 exp(-i (E_j' - E_i) t),

so no propagator is ever built. ``averaged_loschmidt`` converts the
unnormalized full-sector trace into the Haar-averaged Loschmidt echo.
"""
from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np
from scipy.optimize import least_squares

from .hamiltonian import ModelParams, decompose as _decompose
from .hilbert import Parity
from .ldos import window_overlaps, width_gamma
from .spectral import EigenDecomposition, as_range

DEFAULT_SAMPLES = 600
DEFAULT_SPAN = 20.0


class FitError(ValueError):
    pass


@dataclass
class FaTrace:
    times: np.ndarray
    values: np.ndarray
    gamma: float = float("nan")
    label: str = ""

    @property
    def modulus(self) -> np.ndarray:
        return np.abs(self.values)


def default_times(gamma: float, n: int = DEFAULT_SAMPLES, span: float = DEFAULT_SPAN) -> np.ndarray:
    """``n`` samples on [0, span / gamma]; falls back to [0, span] when gamma is 0."""
    t_max = span / gamma if gamma > 0 else span
    return np.linspace(0.0, t_max, n)


def _phase_sum(e_pert, e_unpert, w, times, chunk=64):
    # sum_{j,k} w[j,k] exp(-i (e_pert[j] - e_unpert[k]) t) via (T x dim) @ (dim x W)
    out = np.empty(len(times), dtype=complex)
    for s in range(0, len(times), chunk):
        t = times[s: s + chunk]
        left = np.exp(-1j * np.outer(t, e_pert)) @ w
        out[s: s + chunk] = np.sum(left * np.exp(1j * np.outer(t, e_unpert)), axis=1)
    return out


def fidelity_amplitude(
    unpert: EigenDecomposition,
    pert: EigenDecomposition,
    window,
    times=None,
) -> FaTrace:
    """Window-averaged fidelity amplitude, normalized to O(0) = 1.

    Without ``times`` the grid is ``default_times(gamma)`` with gamma the
    LDOS width, so each trace resolves its own decay.
    """
    idx = as_range(window)
    if len(idx) == 0:
        raise ValueError("empty window")
    w = window_overlaps(unpert, pert, idx)
    e_i = unpert.energies[idx.start: idx.stop]
    E = pert.energies[:, None] - e_i[None, :]
    gamma = width_gamma(E, w / len(idx))
    if times is None:
        times = default_times(gamma)
    times = np.asarray(times, dtype=float)
    values = _phase_sum(pert.energies, e_i, w, times) / w.sum()
    return FaTrace(times, values, gamma)


def full_trace_amplitude(unpert: EigenDecomposition, pert: EigenDecomposition, times) -> np.ndarray:
    """Unnormalized sector trace, equal to d at t = 0."""
    amp = pert.vectors.T @ unpert.vectors
    return _phase_sum(pert.energies, unpert.energies, amp * amp, np.asarray(times, dtype=float))


def averaged_loschmidt(values, d: int) -> np.ndarray:
    """Haar average of |<psi|U'^dag U|psi>|^2 from the unnormalized trace."""
    if d < 1:
        raise ValueError("dimension must be >= 1")
    values = np.asarray(values)
    return (d + np.abs(values) ** 2) / (d * (d + 1.0))


def decay_model(t, a, b, c):
    return a * np.exp(-(b * t) ** 2) + (1.0 - a) * np.exp(-c * t)


@dataclass
class DecayFit:
    a: float
    b: float
    c: float
    residual: float
    t_range: tuple = field(default=(0.0, 0.0))

    def __call__(self, t):
        return decay_model(np.asarray(t), self.a, self.b, self.c)


def _crossing_time(t, y, level):
    below = np.nonzero(y <= level)[0]
    return t[below[0]] if len(below) else t[-1]


def fit_decay(trace: FaTrace, t_fit_range=None, cutoff: float = 0.1) -> DecayFit:
    """Least-squares fit of |O(t)| to a Gaussian plus exponential mixture.

    The default fit range runs from 0 to the first sample where |O| drops
    below ``cutoff``. Bounds: a in [0, 1], b and c >= 0. Three starts
    (a = 0, 0.5, 1) with b, c seeded from the e^{-1/2} and e^{-1} crossing
    times; the lowest residual wins.
    """
    t, y = trace.times, trace.modulus
    if t_fit_range is None:
        below = np.nonzero(y < cutoff)[0]
        t_hi = t[below[0]] if len(below) else t[-1]
        t_fit_range = (0.0, t_hi)
    lo, hi = t_fit_range
    sel = (t >= lo) & (t <= hi)
    t, y = t[sel], y[sel]
    if len(t) < 30:
        raise FitError(f"only {len(t)} samples in fit range {t_fit_range}; need 30")
    if y.min() >= 0.9:
        raise FitError("|O| stays above 0.9 over the fit range; decay is not resolved")

    t_gauss = _crossing_time(t, y, np.exp(-0.5))
    t_exp = _crossing_time(t, y, np.exp(-1.0))
    b0 = 1.0 / (np.sqrt(2.0) * max(t_gauss, 1e-300))
    c0 = 1.0 / max(t_exp, 1e-300)

    def resid(p):
        return decay_model(t, *p) - y

    best = None
    for a0 in (0.0, 0.5, 1.0):
        r = least_squares(resid, [a0, b0, c0], bounds=([0.0, 0.0, 0.0], [1.0, np.inf, np.inf]))
        if best is None or r.cost < best.cost:
            best = r
    a, b, c = best.x
    rms = float(np.sqrt(np.mean(best.fun ** 2)))
    return DecayFit(float(a), float(b), float(c), rms, (float(lo), float(hi)))


def half_decay_time(trace: FaTrace, level: float = 0.5) -> float:
    """First time |O| reaches ``level``, linearly interpolated; inf if it never does."""
    y = trace.modulus
    below = np.nonzero(y <= level)[0]
    if not len(below):
        return float("inf")
    k = below[0]
    if k == 0:
        return float(trace.times[0])
    t0, t1, y0, y1 = trace.times[k - 1], trace.times[k], y[k - 1], y[k]
    return float(t0 + (y0 - level) * (t1 - t0) / (y0 - y1))


def abrupt_drops(trace: FaTrace, threshold: float = 0.5) -> np.ndarray:
    """Sample indices where |O| falls by more than ``threshold`` in one step."""
    return np.nonzero(-np.diff(trace.modulus) > threshold)[0] + 1


def decay_comparison(
    base: ModelParams,
    lambda0s,
    deltas,
    window,
    times=None,
    sector=Parity.ODD,
    decompose=None,
) -> dict[tuple[float, float], FaTrace]:
    """|O(t)| for every (lam0, dlam) pair on a time grid shared across lam0.

    Without ``times`` each dlam gets ``default_times`` of the smallest width
    among the lam0 values, so the slowest trace is resolved.
    """
    decompose = decompose or _decompose
    unperts = {lam: decompose(replace(base, lam=float(lam)), sector) for lam in lambda0s}
    out = {}
    for d in deltas:
        perts = {lam: decompose(replace(base, lam=float(lam + d)), sector) for lam in lambda0s}
        grid = times
        if grid is None:
            probes = [fidelity_amplitude(unperts[lam], perts[lam], window, times=[0.0]).gamma
                      for lam in lambda0s]
            grid = default_times(min(probes))
        for lam in lambda0s:
            tr = fidelity_amplitude(unperts[lam], perts[lam], window, grid)
            tr.label = f"lam0={lam:g} dlam={d:g}"
            out[(float(lam), float(d))] = tr
    return out
