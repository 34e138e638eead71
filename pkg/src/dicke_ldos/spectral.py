"""Full symmetric eigendecomposition and nearest-neighbour level statistics."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.linalg
import scipy.stats


class EigensolverError(RuntimeError):
    def __init__(self, message, index=None):
        super().__init__(message)
        self.index = index


@dataclass(frozen=True)
class EigenDecomposition:
    energies: np.ndarray
    vectors: np.ndarray
    fingerprint: str = ""

    @property
    def dim(self) -> int:
        return len(self.energies)

    def residuals(self, H: np.ndarray) -> np.ndarray:
        """||H v_k - E_k v_k||_2 / (1 + |E_k|) for every k."""
        r = H @ self.vectors - self.vectors * self.energies
        return np.linalg.norm(r, axis=0) / (1.0 + np.abs(self.energies))

    def orthogonality_error(self) -> float:
        g = self.vectors.T @ self.vectors
        g[np.diag_indices_from(g)] -= 1.0
        return float(np.abs(g).max())

    def validate(self, H: np.ndarray, residual_tol=1e-8, ortho_tol=1e-9):
        if np.any(np.diff(self.energies) < 0):
            raise EigensolverError("energies not sorted")
        ortho = self.orthogonality_error()
        if ortho > ortho_tol:
            raise EigensolverError(f"eigenvectors not orthonormal (max |V^T V - I| = {ortho:.3g})")
        res = self.residuals(H)
        worst = int(np.argmax(res))
        if res[worst] > residual_tol:
            raise EigensolverError(f"residual {res[worst]:.3g} at level {worst}", index=worst)


def fix_signs(vectors: np.ndarray) -> np.ndarray:
    """Flip columns so that each one's largest-magnitude entry is positive."""
    cols = np.arange(vectors.shape[1])
    lead = vectors[np.argmax(np.abs(vectors), axis=0), cols]
    return vectors * np.where(lead < 0, -1.0, 1.0)


def householder_tridiagonalize(a: np.ndarray):
    """Reduce symmetric ``a`` to tridiagonal form, T = Q^T a Q.

    Returns (diagonal, off-diagonal padded with a trailing 0, Q).
    """
    a = np.array(a, dtype=float, copy=True)
    n = a.shape[0]
    q = np.eye(n)
    off = np.zeros(n)
    for k in range(n - 2):
        x = a[k + 1:, k]
        norm = np.linalg.norm(x)
        if norm == 0.0:
            continue
        alpha = -math.copysign(norm, x[0])
        v = x.copy()
        v[0] -= alpha
        v /= np.linalg.norm(v)
        sub = a[k + 1:, k + 1:]
        p = sub @ v
        w = p - (v @ p) * v
        sub -= 2.0 * (np.outer(v, w) + np.outer(w, v))
        a[k + 1:, k] = 0.0
        a[k, k + 1:] = 0.0
        a[k + 1, k] = a[k, k + 1] = alpha
        q[:, k + 1:] -= 2.0 * np.outer(q[:, k + 1:] @ v, v)
    d = np.diag(a).copy()
    off[: n - 1] = np.diag(a, 1)
    return d, off, q


def tridiagonal_ql(d: np.ndarray, e: np.ndarray, z: np.ndarray, max_iter: int = 60):
    """Implicitly shifted QL on a symmetric tridiagonal matrix, accumulating rotations into ``z``.

    ``e[i]`` couples rows i and i+1; ``e[-1]`` is ignored. Works in place and
    returns (d, z) unsorted.
    """
    n = len(d)
    e = e.copy()
    e[-1] = 0.0
    eps = np.finfo(float).eps
    for l in range(n):
        it = 0
        while True:
            m = l
            while m < n - 1:
                dd = abs(d[m]) + abs(d[m + 1])
                if abs(e[m]) <= eps * dd:
                    break
                m += 1
            if m == l:
                break
            it += 1
            if it > max_iter:
                raise EigensolverError(f"QL iteration did not converge for level {l}", index=l)
            g = (d[l + 1] - d[l]) / (2.0 * e[l])
            r = math.hypot(g, 1.0)
            g = d[m] - d[l] + e[l] / (g + math.copysign(r, g))
            s = c = 1.0
            p = 0.0
            deflated = False
            for i in range(m - 1, l - 1, -1):
                f = s * e[i]
                b = c * e[i]
                r = math.hypot(f, g)
                e[i + 1] = r
                if r == 0.0:
                    d[i + 1] -= p
                    e[m] = 0.0
                    deflated = True
                    break
                s = f / r
                c = g / r
                g = d[i + 1] - p
                r = (d[i] - g) * s + 2.0 * c * b
                p = s * r
                d[i + 1] = g + p
                g = c * r - b
                zi = z[:, i].copy()
                z[:, i] = c * zi - s * z[:, i + 1]
                z[:, i + 1] = s * zi + c * z[:, i + 1]
            if deflated:
                continue
            d[l] -= p
            e[l] = g
            e[m] = 0.0
    return d, z


def householder_ql_eigh(a: np.ndarray):
    d, e, q = householder_tridiagonalize(a)
    d, z = tridiagonal_ql(d, e, q)
    order = np.argsort(d, kind="stable")
    return d[order], z[:, order]


def diagonalize(H: np.ndarray, method: str = "lapack", fingerprint: str = "") -> EigenDecomposition:
    """Full spectrum and orthonormal eigenvectors of a real symmetric matrix.

    ``method="lapack"`` uses the LAPACK divide-and-conquer driver;
    ``method="householder"`` runs the pure-numpy Householder + implicit QL
    path (fine up to a few hundred rows). Eigenvector signs are fixed so the
    largest-magnitude component of each vector is positive.
    """
    H = np.asarray(H, dtype=float)
    if H.ndim != 2 or H.shape[0] != H.shape[1]:
        raise ValueError("expected a square matrix")
    if not np.all(np.isfinite(H)):
        raise EigensolverError("matrix has non-finite entries")
    if method == "lapack":
        try:
            w, v = scipy.linalg.eigh(H, driver="evd")
        except np.linalg.LinAlgError as exc:
            raise EigensolverError(str(exc)) from exc
    elif method == "householder":
        w, v = householder_ql_eigh(H)
    else:
        raise ValueError(f"unknown method {method!r}")
    return EigenDecomposition(w, fix_signs(v), fingerprint)


def eigenvalues(H: np.ndarray) -> np.ndarray:
    return scipy.linalg.eigvalsh(H, driver="evd")


@dataclass(frozen=True)
class Window:
    """Contiguous block of eigenstate indices, either absolute or as fractions of a converged count."""

    lo: float
    hi: float
    fractional: bool = True

    def __post_init__(self):
        if not self.lo < self.hi:
            raise ValueError(f"empty window [{self.lo}, {self.hi})")
        if self.lo < 0 or (self.fractional and self.hi > 1):
            raise ValueError(f"window out of range: [{self.lo}, {self.hi})")

    @classmethod
    def parse(cls, text: str) -> "Window":
        """``"0.4:0.6"`` (fractions) or ``"abs:150:300"`` (indices)."""
        parts = [p.strip() for p in str(text).split(":")]
        try:
            if parts[0] == "abs" and len(parts) == 3:
                return cls(int(parts[1]), int(parts[2]), fractional=False)
            if len(parts) == 2:
                return cls(float(parts[0]), float(parts[1]), fractional=True)
        except ValueError as exc:
            raise ValueError(f"bad window {text!r}: {exc}") from None
        raise ValueError(f"bad window {text!r}; expected 'lo:hi' or 'abs:lo:hi'")

    def resolve(self, converged: int) -> range:
        """Index range inside [0, converged); raises if it does not fit."""
        if self.fractional:
            lo, hi = int(self.lo * converged), int(self.hi * converged)
        else:
            lo, hi = int(self.lo), int(self.hi)
        if hi > converged or hi <= lo:
            raise UnconvergedWindowError(lo, hi, converged)
        return range(lo, hi)

    def __str__(self):
        return f"abs:{int(self.lo)}:{int(self.hi)}" if not self.fractional else f"{self.lo}:{self.hi}"


class UnconvergedWindowError(ValueError):
    def __init__(self, lo, hi, converged):
        super().__init__(f"window [{lo}, {hi}) not inside converged range [0, {converged})")
        self.lo, self.hi, self.converged = lo, hi, converged


def as_range(window) -> range:
    if isinstance(window, range):
        return window
    lo, hi = window
    return range(int(lo), int(hi))


def mean_level_spacing(spectrum, window) -> float:
    energies = spectrum.energies if isinstance(spectrum, EigenDecomposition) else np.asarray(spectrum)
    w = as_range(window)
    if len(w) < 2:
        raise ValueError("need at least two levels to define a spacing")
    return float((energies[w[-1]] - energies[w[0]]) / (len(w) - 1))


def unfold(energies, discard_frac: float = 0.1, poly_degree: int = 6) -> np.ndarray:
    """Map levels onto a smooth fit of the cumulative level count, giving unit mean spacing.

    ``discard_frac`` of the levels is dropped at each edge before fitting.
    """
    energies = np.asarray(energies, dtype=float)
    cut = int(discard_frac * len(energies))
    kept = energies[cut: len(energies) - cut]
    if len(kept) < 100:
        raise ValueError(f"need at least 100 levels after edge removal, have {len(kept)}")
    if np.any(np.diff(kept) < 0):
        raise ValueError("energies must be sorted ascending")
    staircase = np.arange(1, len(kept) + 1, dtype=float)
    fit = np.polynomial.Polynomial.fit(kept, staircase, poly_degree)
    out = fit(kept)
    if np.any(np.diff(out) < 0):
        raise ValueError("smoothed level count is not monotone over the retained range")
    return out


def poisson_cdf(s):
    return 1.0 - np.exp(-np.asarray(s))


def wigner_cdf(s):
    s = np.asarray(s)
    return 1.0 - np.exp(-np.pi * s * s / 4.0)


def wigner_pdf(s):
    s = np.asarray(s)
    return np.pi * s / 2.0 * np.exp(-np.pi * s * s / 4.0)


@dataclass(frozen=True)
class SpacingStatistics:
    spacings: np.ndarray
    hist_edges: np.ndarray
    hist_density: np.ndarray
    ks_poisson: float
    ks_wigner: float

    @property
    def closer_to(self) -> str:
        return "poisson" if self.ks_poisson < self.ks_wigner else "wigner"


def spacing_statistics(unfolded, bins=None) -> SpacingStatistics:
    """Kolmogorov-Smirnov distances of the unfolded spacings to Poisson and Wigner-surmise laws."""
    unfolded = np.asarray(unfolded, dtype=float)
    s = np.diff(unfolded)
    if len(s) == 0:
        raise ValueError("need at least two levels")
    if np.any(s < 0):
        raise ValueError("negative spacing; levels must be sorted")
    if bins is None:
        bins = np.linspace(0.0, 4.0, 41)
    density, edges = np.histogram(s, bins=bins, density=True)
    return SpacingStatistics(
        spacings=s,
        hist_edges=edges,
        hist_density=density,
        ks_poisson=float(scipy.stats.kstest(s, poisson_cdf).statistic),
        ks_wigner=float(scipy.stats.kstest(s, wigner_cdf).statistic),
    )
