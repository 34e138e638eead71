"""Experiment configuration: a flat ``key = value`` file plus command-line overrides.

Units: energies and frequencies in units of the field frequency (hbar = 1),
times in units of its inverse. Lists are comma-separated; ranges are
``lo:hi:n``.

    kind            spectrum | level-stats | ldos | gamma-vs-delta | gamma-vs-lambda | fidelity | fit
    omega           field frequency                               [energy]
    omega0          atomic level splitting                        [energy]
    j               pseudospin length, half-integer (N = 2j atoms)
    n_max           boson cutoff                                  [quanta]
    variant         full | rwa
    sector          odd | even
    window          lo:hi fractions of the converged count, or abs:lo:hi indices
    lambda0         unperturbed coupling                          [energy]
    delta_lambda    list of coupling perturbations                [energy]
    delta_range     lo:hi:n, log-spaced perturbations             [energy]
    lambdas         list of unperturbed couplings                 [energy]
    lambda_range    lo:hi:n, linearly spaced couplings            [energy]
    variants        list of variants for gamma-vs-lambda
    n_times         samples per fidelity trace
    t_max           end of the fidelity time grid, auto if unset  [1/energy]
    bin_width       LDOS histogram bin width, auto if unset        [energy]
    span            LDOS histogram half-range about the mean      [energy]
    tol             truncation-convergence tolerance              [energy]
    probe           boson-cutoff increment for the convergence test
    fit_cutoff      |O| level that ends the default fit range
    discard_frac    spectrum fraction dropped at each edge before unfolding
    poly_degree     degree of the unfolding polynomial
    out             output directory
    cache           eigen-cache directory (env DICKE_LDOS_CACHE if unset)
    workers         parallel worker processes
"""
from __future__ import annotations

import configparser
import os
from dataclasses import asdict, dataclass, field, fields

import numpy as np

from ..hamiltonian import VARIANTS, ModelParams, default_probe_increment
from ..hilbert import Parity, as_parity, two_j
from ..spectral import Window

KINDS = ("spectrum", "level-stats", "ldos", "gamma-vs-delta", "gamma-vs-lambda", "fidelity", "fit")
CACHE_ENV = "DICKE_LDOS_CACHE"
SECTION = "experiment"


class ConfigError(ValueError):
    pass


def _floats(text) -> tuple[float, ...]:
    if isinstance(text, (list, tuple)):
        return tuple(float(x) for x in text)
    return tuple(float(x) for x in str(text).replace(";", ",").split(",") if x.strip())


def _strings(text) -> tuple[str, ...]:
    if isinstance(text, (list, tuple)):
        return tuple(str(x) for x in text)
    return tuple(x.strip() for x in str(text).split(",") if x.strip())


def _range(text) -> tuple[float, float, int]:
    parts = str(text).split(":")
    if len(parts) != 3:
        raise ConfigError(f"range {text!r} must look like lo:hi:n")
    return float(parts[0]), float(parts[1]), int(parts[2])


@dataclass
class ExperimentConfig:
    kind: str = "spectrum"
    omega: float = 1.0
    omega0: float = 1.0
    j: float = 10.0
    n_max: int = 150
    variant: str = "full"
    sector: str = "odd"
    window: str = "0.4:0.6"
    lambda0: float = 0.8
    delta_lambda: tuple = (0.001,)
    delta_range: str | None = None
    lambdas: tuple = ()
    lambda_range: str | None = None
    variants: tuple = ("full", "rwa")
    n_times: int = 600
    t_max: float | None = None
    bin_width: float | None = None
    span: float | None = None
    tol: float = 1e-8
    probe: int | None = None
    fit_cutoff: float = 0.1
    discard_frac: float = 0.1
    poly_degree: int = 6
    out: str = "results"
    cache: str | None = None
    workers: int = field(default_factory=lambda: os.cpu_count() or 1)

    # parsing ------------------------------------------------------------

    _converters = {
        "omega": float, "omega0": float, "j": float, "n_max": int, "lambda0": float,
        "delta_lambda": _floats, "lambdas": _floats, "variants": _strings,
        "n_times": int, "t_max": float, "bin_width": float, "span": float, "tol": float,
        "probe": int, "fit_cutoff": float, "discard_frac": float, "poly_degree": int,
        "workers": int,
    }

    @classmethod
    def from_mapping(cls, values: dict, base: "ExperimentConfig | None" = None) -> "ExperimentConfig":
        cfg = base or cls()
        names = {f.name for f in fields(cls)}
        for key, raw in values.items():
            if raw is None:
                continue
            key = key.strip().replace("-", "_")
            if key not in names:
                raise ConfigError(f"unknown config key {key!r}")
            conv = cls._converters.get(key, str)
            try:
                value = conv(raw.strip() if isinstance(raw, str) else raw)
            except (TypeError, ValueError) as exc:
                raise ConfigError(f"bad value for {key}: {raw!r} ({exc})") from None
            setattr(cfg, key, value)
        return cfg

    @classmethod
    def from_file(cls, path) -> "ExperimentConfig":
        text = open(path, encoding="utf-8").read()
        parser = configparser.ConfigParser(inline_comment_prefixes=("#", ";"))
        if not text.lstrip().startswith("["):
            text = f"[{SECTION}]\n" + text
        try:
            parser.read_string(text)
        except configparser.Error as exc:
            raise ConfigError(f"cannot parse {path}: {exc}") from None
        values = {}
        for section in parser.sections():
            values.update(parser[section])
        return cls.from_mapping(values)

    # derived ------------------------------------------------------------

    def validate(self) -> "ExperimentConfig":
        if self.kind not in KINDS:
            raise ConfigError(f"kind must be one of {KINDS}, got {self.kind!r}")
        if self.variant not in VARIANTS or any(v not in VARIANTS for v in self.variants):
            raise ConfigError(f"variants must be drawn from {VARIANTS}")
        try:
            as_parity(self.sector)
            two_j(self.j)
            Window.parse(self.window)
            self.params()
        except ValueError as exc:
            raise ConfigError(str(exc)) from None
        if self.workers < 1 or self.n_times < 2 or self.tol <= 0:
            raise ConfigError("workers >= 1, n_times >= 2 and tol > 0 are required")
        if self.probe is not None and self.probe < 0:
            raise ConfigError("probe must be >= 0")
        if self.kind == "gamma-vs-delta":
            d = self.delta_grid()
            if len(d) == 0 or np.any(d <= 0) or np.any(np.diff(d) <= 0):
                raise ConfigError("perturbation grid must be positive and strictly increasing")
        if self.kind == "gamma-vs-lambda":
            lams = self.lambda_grid()
            if len(lams) == 0 or np.any(np.diff(lams) <= 0) or np.any(lams < 0):
                raise ConfigError("coupling grid must be non-negative and strictly increasing")
        if self.kind in ("ldos", "fidelity", "fit"):
            if len(self.delta_lambda) == 0 or any(d < 0 for d in self.delta_lambda):
                raise ConfigError("delta_lambda must hold non-negative values")
        return self

    def params(self, lam: float | None = None, variant: str | None = None) -> ModelParams:
        return ModelParams(
            omega=self.omega, omega0=self.omega0,
            lam=self.lambda0 if lam is None else float(lam),
            j=self.j, n_max=self.n_max, variant=variant or self.variant,
        )

    @property
    def parity(self) -> Parity:
        return as_parity(self.sector)

    @property
    def window_spec(self) -> Window:
        return Window.parse(self.window)

    @property
    def probe_increment(self) -> int:
        return default_probe_increment(self.n_max) if self.probe is None else self.probe

    def delta_grid(self) -> np.ndarray:
        if self.delta_range:
            lo, hi, n = _range(self.delta_range)
            if lo <= 0 or hi <= lo or n < 2:
                raise ConfigError(f"bad delta_range {self.delta_range!r}")
            return np.logspace(np.log10(lo), np.log10(hi), n)
        return np.asarray(self.delta_lambda, dtype=float)

    def lambda_grid(self) -> np.ndarray:
        if self.lambda_range:
            lo, hi, n = _range(self.lambda_range)
            if hi <= lo or n < 2:
                raise ConfigError(f"bad lambda_range {self.lambda_range!r}")
            return np.linspace(lo, hi, n)
        return np.asarray(self.lambdas or (self.lambda0,), dtype=float)

    def cache_dir(self) -> str:
        return self.cache or os.environ.get(CACHE_ENV) or ".dicke_cache"

    def echo(self) -> dict:
        return {k: (list(v) if isinstance(v, tuple) else v) for k, v in asdict(self).items()}
