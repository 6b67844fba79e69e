"""Seeded Monte Carlo sampling of correlated Gaussian maxima.

Reproducibility contract: repetition r draws from a Philox counter-based
stream that is a pure function of (seed, r), so results are bitwise
identical for any worker count or chunking.  Normal variates are produced
by inverse-CDF transform of open-interval uniforms through
``std_normal_quantile``, so the sampler and the analytic layer share one
definition of the Gaussian CDF.
"""
from __future__ import annotations

import csv
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .errors import DomainError, EmptyInput, NotPsdError
from .normal import std_normal_quantile

__all__ = [
    "Ar1Model",
    "McConfig",
    "McResult",
    "NonIidConfig",
    "rep_rng",
    "sample_ar1_chain",
    "sample_max_distribution",
    "sample_multivariate_max",
    "empirical_stats",
    "non_iid_experiment",
    "dkw_band_halfwidth",
    "ecdf_values",
    "write_samples_csv",
    "stats_dict",
]

# Fixed work-unit size so chunking never depends on the worker count.
_CHUNK_REPS = 1024

_PSD_TOL = 1e-10


@dataclass(frozen=True)
class Ar1Model:
    """AR(1) chain X_{i+1} = rho*X_i + sigma*sqrt(1-rho^2)*Y_i.

    Marginals are exactly N(0, sigma^2) and the lag-d correlation is rho^d,
    so the implied covariance sigma^2 * rho^|i-j| is positive semidefinite
    for any rho in [0, 1].
    """

    n: int
    rho: float
    sigma: float = 1.0

    def __post_init__(self):
        if int(self.n) != self.n or self.n < 1:
            raise DomainError(f"n must be an integer >= 1 (got {self.n!r})")
        if not (0.0 <= self.rho <= 1.0):
            raise DomainError(f"rho must lie in [0, 1] (got {self.rho})")
        if not (self.sigma > 0.0 and np.isfinite(self.sigma)):
            raise DomainError(f"sigma must be positive (got {self.sigma})")


@dataclass(frozen=True)
class McConfig:
    """Repetition count, seed, and worker count for a Monte Carlo run."""

    seed: int
    reps: int = 10_000
    workers: int = 1

    def __post_init__(self):
        if self.reps < 1:
            raise DomainError(f"reps must be >= 1 (got {self.reps})")
        if not (0 <= self.seed < 2**64):
            raise DomainError("seed must be a 64-bit unsigned integer")
        if self.workers < 1:
            raise DomainError(f"workers must be >= 1 (got {self.workers})")


@dataclass(frozen=True)
class McResult:
    """Maximum samples plus summary statistics.

    ``ecdf`` is the sorted view of ``samples``; ``histogram`` is an
    equal-width (bin_edges, counts) pair.
    """

    samples: np.ndarray
    mean: float
    std: float
    ecdf: np.ndarray
    histogram: tuple[np.ndarray, np.ndarray]

    @property
    def stderr(self) -> float:
        return float(self.std / np.sqrt(len(self.samples)))


@dataclass(frozen=True)
class NonIidConfig:
    """Configuration of the independent-but-non-identical experiment.

    Component means mu_i = mu + xi*delta_mu and deviations
    sigma_i = sigma + xi*delta_sigma, with each xi drawn independently from
    U(-1, 1).  By default the (mu_i, sigma_i) sets are redrawn every
    repetition; ``freeze_deviations`` draws them once per grid point.
    """

    n_grid: tuple[int, ...]
    mu: float = 0.0
    sigma: float = 1.0
    delta_mu: float = 0.0
    delta_sigma: float = 0.0
    reps: int = 10_000
    seed: int = 0
    workers: int = 1
    freeze_deviations: bool = False

    def __post_init__(self):
        grid = tuple(int(n) for n in self.n_grid)
        object.__setattr__(self, "n_grid", grid)
        if len(grid) == 0 or any(n < 1 for n in grid):
            raise DomainError("n_grid must contain integers >= 1")
        if not (self.sigma > 0.0):
            raise DomainError(f"sigma must be positive (got {self.sigma})")
        if self.delta_mu < 0.0 or self.delta_sigma < 0.0:
            raise DomainError("delta_mu and delta_sigma must be nonnegative")
        if self.sigma - self.delta_sigma <= 0.0:
            raise DomainError(
                f"sigma - delta_sigma must stay positive "
                f"(got {self.sigma} - {self.delta_sigma})"
            )
        if self.reps < 1:
            raise DomainError(f"reps must be >= 1 (got {self.reps})")


def rep_rng(seed: int, rep: int, stream: int = 0) -> np.random.Generator:
    """Generator for one repetition: a pure function of (seed, rep, stream)."""
    counter = (int(stream) << 192) | (int(rep) << 128)
    return np.random.Generator(np.random.Philox(key=int(seed), counter=counter))


def _open_uniform(rng: np.random.Generator, size) -> np.ndarray:
    """Uniforms strictly inside (0, 1), safe for the inverse-CDF transform."""
    return (rng.integers(0, 2**53, size=size, dtype=np.uint64) + 0.5) * 2.0**-53


def _run_chunked(reps: int, workers: int, fill) -> np.ndarray:
    """Fill a samples array chunk by chunk, optionally on a thread pool.

    ``fill(start, stop, out)`` must write samples for repetitions
    [start, stop) into ``out[start:stop]`` using only per-repetition
    streams, which keeps the result independent of the execution order.
    """
    out = np.empty(reps, dtype=float)
    starts = range(0, reps, _CHUNK_REPS)
    if workers == 1 or len(starts) == 1:
        for a in starts:
            fill(a, min(a + _CHUNK_REPS, reps), out)
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            futures = [
                pool.submit(fill, a, min(a + _CHUNK_REPS, reps), out)
                for a in starts
            ]
            for f in futures:
                f.result()
    return out


def sample_ar1_chain(model: Ar1Model, rng: np.random.Generator) -> np.ndarray:
    """Draw one stationary AR(1) chain of length n from the given stream.

    The first element is X_0 ~ N(0, sigma^2); each subsequent element
    applies the recurrence with a fresh standard normal Y_i.
    """
    u = _open_uniform(rng, model.n)
    z = std_normal_quantile(u)
    x = np.empty(model.n, dtype=float)
    x[0] = model.sigma * z[0]
    c = model.sigma * np.sqrt(1.0 - model.rho * model.rho)
    for i in range(1, model.n):
        x[i] = model.rho * x[i - 1] + c * z[i]
    return x


def sample_max_distribution(model: Ar1Model, cfg: McConfig) -> McResult:
    """Maxima of ``cfg.reps`` independent AR(1) chains."""
    rho, sigma, n = model.rho, model.sigma, model.n
    c = sigma * np.sqrt(1.0 - rho * rho)

    def fill(start, stop, out):
        u = np.empty((stop - start, n), dtype=float)
        for r in range(start, stop):
            u[r - start] = _open_uniform(rep_rng(cfg.seed, r), n)
        z = std_normal_quantile(u)
        x = sigma * z[:, 0]
        running_max = x.copy()
        for i in range(1, n):
            x = rho * x + c * z[:, i]
            np.maximum(running_max, x, out=running_max)
        out[start:stop] = running_max

    samples = _run_chunked(cfg.reps, cfg.workers, fill)
    return empirical_stats(samples)


def _psd_sqrt(cov: np.ndarray) -> np.ndarray:
    """Symmetric square-root factor L with L @ L.T = cov (PSD tolerant)."""
    vals, vecs = np.linalg.eigh(cov)
    scale = max(1.0, float(vals[-1]))
    if vals[0] < -_PSD_TOL * scale:
        raise NotPsdError(
            f"covariance is not positive semidefinite "
            f"(min eigenvalue {vals[0]:.3e})"
        )
    return vecs * np.sqrt(np.clip(vals, 0.0, None))


def sample_multivariate_max(cov, cfg: McConfig, mean=None) -> McResult:
    """Maxima of correlated Gaussian vectors with the given covariance.

    Components have the given ``mean`` (default zero) and covariance
    ``cov``; sampling goes through a PSD-tolerant matrix square root of
    IID standard normals.
    """
    c = np.asarray(cov, dtype=float)
    if c.ndim != 2 or c.shape[0] != c.shape[1]:
        raise DomainError(f"cov must be a square matrix (got shape {c.shape})")
    if not np.allclose(c, c.T, rtol=0.0, atol=_PSD_TOL * max(1.0, np.abs(c).max())):
        raise DomainError("cov must be symmetric")
    n = c.shape[0]
    m = np.zeros(n) if mean is None else np.asarray(mean, dtype=float)
    if m.shape != (n,):
        raise DomainError(f"mean must have shape ({n},) (got {m.shape})")
    factor_t = _psd_sqrt((c + c.T) / 2.0).T

    def fill(start, stop, out):
        u = np.empty((stop - start, n), dtype=float)
        for r in range(start, stop):
            u[r - start] = _open_uniform(rep_rng(cfg.seed, r), n)
        z = std_normal_quantile(u)
        x = z @ factor_t + m
        out[start:stop] = x.max(axis=1)

    samples = _run_chunked(cfg.reps, cfg.workers, fill)
    return empirical_stats(samples)


def empirical_stats(samples, bins: int | None = None) -> McResult:
    """Summary statistics: mean, unbiased std, sorted ECDF, histogram.

    ``bins`` is the number of equal-width bins over [min, max]; when
    omitted, the Freedman-Diaconis rule decides.
    """
    arr = np.asarray(samples, dtype=float)
    if arr.ndim != 1 or arr.size == 0:
        raise EmptyInput("samples must be a nonempty 1-D array")
    if bins is not None and bins < 1:
        raise DomainError(f"bins must be >= 1 (got {bins})")
    mean = float(np.mean(arr))
    std = float(np.std(arr, ddof=1)) if arr.size > 1 else 0.0
    counts, edges = np.histogram(arr, bins=bins if bins is not None else "fd")
    return McResult(
        samples=arr,
        mean=mean,
        std=std,
        ecdf=np.sort(arr),
        histogram=(edges, counts),
    )


def non_iid_experiment(cfg: NonIidConfig) -> list[tuple[int, float, float]]:
    """Empirical (mean, std) of the maximum versus n for non-identical
    independent Gaussians.

    Returns one (n, mean, std) row per entry of ``cfg.n_grid``.
    """
    rows = []
    for n_index, n in enumerate(cfg.n_grid):
        # Streams 2k feed the repetitions of grid point k; streams 2k+1 are
        # reserved for its frozen deviations, so the spaces never collide.
        rep_stream = 2 * n_index
        if cfg.freeze_deviations:
            fr = rep_rng(cfg.seed, 0, stream=rep_stream + 1)
            xi_mu = 2.0 * _open_uniform(fr, n) - 1.0
            xi_sigma = 2.0 * _open_uniform(fr, n) - 1.0
            mu_frozen = cfg.mu + cfg.delta_mu * xi_mu
            sigma_frozen = cfg.sigma + cfg.delta_sigma * xi_sigma

        def fill(start, stop, out, n=n, rep_stream=rep_stream):
            rows_ = stop - start
            if cfg.freeze_deviations:
                u = np.empty((rows_, n), dtype=float)
                for r in range(start, stop):
                    u[r - start] = _open_uniform(
                        rep_rng(cfg.seed, r, stream=rep_stream), n
                    )
                x = mu_frozen + sigma_frozen * std_normal_quantile(u)
            else:
                u = np.empty((rows_, 3 * n), dtype=float)
                for r in range(start, stop):
                    u[r - start] = _open_uniform(
                        rep_rng(cfg.seed, r, stream=rep_stream), 3 * n
                    )
                mu_i = cfg.mu + cfg.delta_mu * (2.0 * u[:, :n] - 1.0)
                sigma_i = cfg.sigma + cfg.delta_sigma * (2.0 * u[:, n : 2 * n] - 1.0)
                x = mu_i + sigma_i * std_normal_quantile(u[:, 2 * n :])
            out[start:stop] = x.max(axis=1)

        samples = _run_chunked(cfg.reps, cfg.workers, fill)
        stats = empirical_stats(samples)
        rows.append((n, stats.mean, stats.std))
    return rows


def dkw_band_halfwidth(n_samples: int, confidence: float = 0.99) -> float:
    """Half-width of the Dvoretzky-Kiefer-Wolfowitz band around an ECDF."""
    if n_samples < 1:
        raise DomainError("n_samples must be >= 1")
    if not (0.0 < confidence < 1.0):
        raise DomainError("confidence must lie in (0, 1)")
    return float(np.sqrt(np.log(2.0 / (1.0 - confidence)) / (2.0 * n_samples)))


def ecdf_values(sorted_samples: np.ndarray, z) -> np.ndarray:
    """Evaluate the empirical CDF of pre-sorted samples at points z."""
    arr = np.asarray(sorted_samples)
    return np.searchsorted(arr, np.asarray(z), side="right") / arr.size


def write_samples_csv(result: McResult, path) -> None:
    """Write samples as a one-column CSV with header ``sample``."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["sample"])
        for v in result.samples:
            writer.writerow([format(v, ".17g")])


def stats_dict(result: McResult) -> dict:
    """JSON-ready summary: mean, std, stderr, count, histogram."""
    edges, counts = result.histogram
    return {
        "mean": result.mean,
        "std": result.std,
        "stderr": result.stderr,
        "count": int(len(result.samples)),
        "histogram": {
            "bin_edges": [float(e) for e in edges],
            "counts": [int(c) for c in counts],
        },
    }
