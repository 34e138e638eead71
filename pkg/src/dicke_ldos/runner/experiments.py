"""Experiment orchestration: eigen-data caching, sweeps and CSV/manifest output."""
from __future__ import annotations

import csv
import json
import logging
import time
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

from .. import __version__
from ..fidelity import FitError, default_times, fidelity_amplitude, fit_decay
from ..hamiltonian import ModelParams, converged_state_count, decompose
from ..hilbert import Parity, build_basis
from ..ldos import (
    averaged_ldos,
    gamma_vs_delta,
    gamma_vs_lambda,
    perturbation_operator_for,
    perturbation_profile,
    validity_threshold,
)
from ..spectral import EigenDecomposition, mean_level_spacing, spacing_statistics, unfold
from .cache import EigenCache
from .config import ExperimentConfig

log = logging.getLogger(__name__)


def fmt(x) -> str:
    if isinstance(x, (int, np.integer)) and not isinstance(x, bool):
        return str(int(x))
    return format(float(x), ".17g")


def write_csv(path: Path, header, rows):
    with open(path, "w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([v if isinstance(v, str) else fmt(v) for v in row])


def tag(x: float) -> str:
    return format(float(x), "g")


def _solve(params: ModelParams, sector: Parity) -> EigenDecomposition:
    return decompose(params, sector)


class Session:
    """Owns the cache, the convergence memo and all output files of one run."""

    def __init__(self, config: ExperimentConfig):
        self.config = config
        self.cache = EigenCache(config.cache_dir())
        self.out = Path(config.out)
        self.out.mkdir(parents=True, exist_ok=True)
        self.diagonalizations = 0
        self.files: list[str] = []
        self.converged_counts: dict[str, int] = {}
        self._memo: dict[str, EigenDecomposition] = {}
        self._converged_path = Path(self.cache.directory) / "converged.json"

    # eigen-data ---------------------------------------------------------

    def decomposition(self, params: ModelParams, sector=None) -> EigenDecomposition:
        sector = sector or self.config.parity
        key = params.fingerprint(sector)
        if key in self._memo:
            return self._memo[key]
        decomp = self.cache.get(key)
        if decomp is None:
            decomp = _solve(params, sector)
            self.diagonalizations += 1
            self.cache.put(decomp)
        self._memo[key] = decomp
        return decomp

    def prefetch(self, params_list, sector=None):
        """Diagonalize all cache misses, in parallel when several workers are configured."""
        sector = sector or self.config.parity
        missing, seen = [], set()
        for p in params_list:
            key = p.fingerprint(sector)
            if key in seen or key in self._memo:
                continue
            seen.add(key)
            hit = self.cache.get(key)
            if hit is not None:
                self._memo[key] = hit
            else:
                missing.append(p)
        workers = min(self.config.workers, len(missing))
        if workers > 1:
            with ProcessPoolExecutor(max_workers=workers) as pool:
                results = list(pool.map(_solve, missing, [sector] * len(missing)))
        else:
            results = [_solve(p, sector) for p in missing]
        for decomp in results:
            self.diagonalizations += 1
            self.cache.put(decomp)
            self._memo[decomp.fingerprint] = decomp

    def converged(self, params: ModelParams, sector=None) -> int:
        sector = sector or self.config.parity
        cfg = self.config
        key = f"{params.fingerprint(sector)}|{cfg.tol!r}|{cfg.probe_increment}"
        memo = self._load_converged()
        if key not in memo:
            basis = build_basis(params.j, params.n_max, sector)
            memo[key] = converged_state_count(params, basis, cfg.tol, cfg.probe_increment)
            self._store_converged(memo)
        self.converged_counts[f"{params.variant} lam={params.lam!r}"] = memo[key]
        return memo[key]

    def _load_converged(self) -> dict:
        try:
            return json.loads(self._converged_path.read_text())
        except (OSError, ValueError):
            return {}

    def _store_converged(self, memo: dict):
        self._converged_path.parent.mkdir(parents=True, exist_ok=True)
        self._converged_path.write_text(json.dumps(memo, sort_keys=True, indent=1))

    # output -------------------------------------------------------------

    def csv(self, name: str, header, rows):
        write_csv(self.out / name, header, rows)
        self.files.append(name)


# experiments ------------------------------------------------------------


def exp_spectrum(s: Session) -> dict:
    cfg = s.config
    p = cfg.params()
    decomp = s.decomposition(p)
    K = s.converged(p)
    idx = cfg.window_spec.resolve(K)
    s.csv("spectrum.csv", ["index", "energy", "converged"],
          ([k, e, int(k < K)] for k, e in enumerate(decomp.energies)))
    return {"converged": K, "window": [idx.start, idx.stop],
            "mean_level_spacing": mean_level_spacing(decomp, idx)}


def exp_level_stats(s: Session) -> dict:
    cfg = s.config
    lams = cfg.lambda_grid()
    s.prefetch([cfg.params(lam) for lam in lams])
    rows, out = [], {}
    for lam in lams:
        p = cfg.params(lam)
        K = s.converged(p)
        levels = s.decomposition(p).energies[:K]
        st = spacing_statistics(unfold(levels, cfg.discard_frac, cfg.poly_degree))
        rows.append([lam, K, st.ks_poisson, st.ks_wigner, st.closer_to])
        s.csv(f"spacings_lam{tag(lam)}.csv", ["s_lo", "s_hi", "density"],
              zip(st.hist_edges[:-1], st.hist_edges[1:], st.hist_density))
        out[tag(lam)] = st.closer_to
    s.csv("level_stats.csv", ["lambda0", "levels", "ks_poisson", "ks_wigner", "closer_to"], rows)
    return {"closer_to": out}


def exp_ldos(s: Session) -> dict:
    cfg = s.config
    p0 = cfg.params()
    deltas = cfg.delta_lambda
    s.prefetch([p0] + [p0.with_coupling(p0.lam + d) for d in deltas])
    idx = cfg.window_spec.resolve(s.converged(p0))
    unpert = s.decomposition(p0)
    rows = []
    for d in deltas:
        pp = p0.with_coupling(p0.lam + d)
        h = averaged_ldos(unpert, s.decomposition(pp), idx, bin_width=cfg.bin_width,
                          converged=s.converged(pp), span=cfg.span)
        s.csv(f"ldos_dlam{tag(d)}.csv", ["energy", "weight", "density"],
              zip(h.bin_centers, h.weights, h.density))
        rows.append([d, h.mean_energy, h.gamma, h.leakage])
    s.csv("ldos_summary.csv", ["delta_lambda", "mean_energy", "gamma", "leakage"], rows)
    return {"window": [idx.start, idx.stop]}


def exp_gamma_vs_delta(s: Session) -> dict:
    cfg = s.config
    p0 = cfg.params()
    deltas = cfg.delta_grid()
    s.prefetch([p0] + [p0.with_coupling(p0.lam + d) for d in deltas])
    K = s.converged(p0)
    sweep = gamma_vs_delta(p0, deltas, cfg.window_spec, cfg.parity,
                           decompose=s.decomposition, converged=K)
    s.csv("gamma_vs_delta.csv", ["delta_lambda", "gamma"], zip(sweep.abscissa, sweep.gamma))
    edges = [sweep.abscissa[0], *sweep.breakpoints, sweep.abscissa[-1]]
    s.csv("regimes.csv", ["segment", "delta_lo", "delta_hi", "slope"],
          ([k, edges[k], edges[k + 1], sl] for k, sl in enumerate(sweep.regime_slopes)))

    idx = cfg.window_spec.resolve(K)
    unpert = s.decomposition(p0)
    Hp = perturbation_operator_for(p0, cfg.parity)
    offsets, prof = perturbation_profile(Hp, unpert, idx)
    s.csv("profile.csv", ["offset", "mean_abs_element"], zip(offsets, prof))
    return {
        "global_slope": sweep.global_slope,
        "regime_slopes": [float(x) for x in sweep.regime_slopes],
        "breakpoints": [float(x) for x in sweep.breakpoints],
        "validity_threshold": validity_threshold(Hp, unpert, idx),
        "mean_level_spacing": mean_level_spacing(unpert, idx),
    }


def exp_gamma_vs_lambda(s: Session) -> dict:
    cfg = s.config
    lams = cfg.lambda_grid()
    (d,) = cfg.delta_lambda[:1] or (0.001,)
    todo = []
    for v in cfg.variants:
        for lam in lams:
            p = cfg.params(lam, v)
            todo += [p, p.with_coupling(lam + d)]
    s.prefetch(todo)
    base = cfg.params()
    sweeps = gamma_vs_lambda(base, lams, d, cfg.window_spec, cfg.parity, cfg.variants,
                             decompose=s.decomposition, converged=s.converged)
    for v, sw in sweeps.items():
        s.csv(f"gamma_vs_lambda_{v}.csv", ["lambda0", "gamma"], zip(sw.abscissa, sw.gamma))
    return {"delta_lambda": d}


def _traces(s: Session):
    cfg = s.config
    p0 = cfg.params()
    s.prefetch([p0] + [p0.with_coupling(p0.lam + d) for d in cfg.delta_lambda])
    idx = cfg.window_spec.resolve(s.converged(p0))
    unpert = s.decomposition(p0)
    for d in cfg.delta_lambda:
        pert = s.decomposition(p0.with_coupling(p0.lam + d))
        times = None
        if cfg.t_max is not None:
            times = np.linspace(0.0, cfg.t_max, cfg.n_times)
        elif cfg.n_times != 600:
            g = fidelity_amplitude(unpert, pert, idx, times=[0.0]).gamma
            times = default_times(g, cfg.n_times)
        yield d, fidelity_amplitude(unpert, pert, idx, times)


def exp_fidelity(s: Session) -> dict:
    gammas = {}
    for d, tr in _traces(s):
        s.csv(f"fidelity_dlam{tag(d)}.csv", ["time", "re", "im", "modulus"],
              zip(tr.times, tr.values.real, tr.values.imag, tr.modulus))
        gammas[tag(d)] = tr.gamma
    return {"gamma": gammas}


def exp_fit(s: Session) -> dict:
    rows, skipped = [], []
    for d, tr in _traces(s):
        try:
            f = fit_decay(tr, cutoff=s.config.fit_cutoff)
        except FitError as exc:
            log.warning("dlam=%g: fit skipped (%s)", d, exc)
            skipped.append(tag(d))
            rows.append([d, "nan", "nan", "nan", "nan", "nan", "nan", "skipped"])
            continue
        rows.append([d, f.a, f.b, f.c, f.residual, *f.t_range, "ok"])
    s.csv("decay_fits.csv", ["delta_lambda", "a", "b", "c", "rms_residual", "t_lo", "t_hi", "status"], rows)
    return {"skipped": skipped}


EXPERIMENTS = {
    "spectrum": exp_spectrum,
    "level-stats": exp_level_stats,
    "ldos": exp_ldos,
    "gamma-vs-delta": exp_gamma_vs_delta,
    "gamma-vs-lambda": exp_gamma_vs_lambda,
    "fidelity": exp_fidelity,
    "fit": exp_fit,
}


def execute(config: ExperimentConfig) -> Session:
    """Run one experiment and write its manifest; exceptions propagate to the caller."""
    config.validate()
    s = Session(config)
    t0 = time.perf_counter()
    summary = EXPERIMENTS[config.kind](s)
    manifest = {
        "version": __version__,
        "config": config.echo(),
        "converged_state_count": s.converged_counts,
        "summary": summary,
        "files": s.files,
        "diagonalizations": s.diagonalizations,
        "cache": {"dir": str(s.cache.directory), "hits": s.cache.hits, "misses": s.cache.misses},
        "seconds": time.perf_counter() - t0,
    }
    (s.out / "manifest.json").write_text(json.dumps(manifest, indent=2, default=float))
    return s
