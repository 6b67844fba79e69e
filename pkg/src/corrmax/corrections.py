"""Corrected maximum distributions for weakly correlated standard Gaussians.

Off-diagonal covariance entries eps_ij (zero diagonal, |eps_ij| small) enter
every correction only through the double sum S = sum_{i != j} eps_ij.  With

    x(z) = phi_kernel(z)^2 * S / (4*pi)

the corrected CDFs for the maximum of N weakly correlated standard normals
are

    first:    Psi_N(z) * (1 + x)
    second:   Psi_N(z) * (1 + x + x^2/2)
    complete: Psi_N(z) * exp(x)        (resummed exponential series)

and each PDF is the exact z-derivative of its CDF, using
d(phi^2)/dz = -2 z phi^2.  Outside the weak-correlation regime these
expressions may leave [0, 1] or lose monotonicity; they are returned
unclamped and ``validity_check`` reports where that happens.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DimensionMismatch, DomainError
from .gumbel import GumbelParams, _reduced, _TAIL_CLIP

__all__ = [
    "EpsilonMatrix",
    "CorrelationSum",
    "ValidityReport",
    "ar1_epsilon",
    "ar1_correlation_sum",
    "correlation_sum",
    "corrected_cdf",
    "corrected_pdf",
    "validity_check",
    "correlated_pdf_first_order",
    "char_fn_identity_check",
    "ORDERS",
]

ORDERS = ("first", "second", "complete")

# Oracle-scale limit for the explicit multivariate expansion; it exists to
# validate the theory, not to evaluate high-dimensional densities.
_EXPANSION_MAX_DIM = 8


@dataclass(frozen=True)
class EpsilonMatrix:
    """Symmetric matrix of off-diagonal covariance perturbations.

    Entries must satisfy eps_ii = 0 and |eps_ij| < 1 (standardized
    variables).  Whether the entries are small enough for the corrections
    to be trusted is a separate question answered by ``validity_check``.
    """

    entries: np.ndarray
    n: int = field(init=False)

    def __post_init__(self):
        e = np.asarray(self.entries, dtype=float)
        if e.ndim != 2 or e.shape[0] != e.shape[1]:
            raise DimensionMismatch(f"entries must be square (got shape {e.shape})")
        if not np.all(np.isfinite(e)):
            raise DomainError("entries must be finite")
        if not np.allclose(e, e.T, rtol=0.0, atol=1e-12):
            raise DomainError("entries must be symmetric")
        if np.any(np.diag(e) != 0.0):
            raise DomainError("diagonal entries must be exactly zero")
        e = (e + e.T) / 2.0
        if np.any(np.abs(e) >= 1.0):
            raise DomainError("off-diagonal entries must satisfy |eps_ij| < 1")
        e.flags.writeable = False
        object.__setattr__(self, "entries", e)
        object.__setattr__(self, "n", e.shape[0])

    @classmethod
    def from_covariance(cls, cov) -> "EpsilonMatrix":
        """Strip the diagonal from a unit-diagonal covariance matrix."""
        c = np.array(cov, dtype=float)
        if c.ndim != 2 or c.shape[0] != c.shape[1]:
            raise DimensionMismatch(f"cov must be square (got shape {c.shape})")
        np.fill_diagonal(c, 0.0)
        return cls(entries=c)

    def max_abs(self) -> float:
        return float(np.max(np.abs(self.entries))) if self.n > 1 else 0.0


@dataclass(frozen=True)
class CorrelationSum:
    """The double sum S = sum_{i != j} eps_ij driving all corrections."""

    s: float


@dataclass(frozen=True)
class ValidityReport:
    """Diagnostics for a corrected distribution on a z grid."""

    smallness_ok: bool
    max_abs_eps: float
    cdf_monotone: bool
    cdf_bounded: bool
    pdf_nonnegative: bool
    z_violations: tuple[float, ...]


def ar1_epsilon(n: int, rho: float) -> EpsilonMatrix:
    """Epsilon matrix of an AR(1) chain: eps_ij = rho^|i-j| for i != j."""
    if int(n) != n or n < 1:
        raise DomainError(f"n must be an integer >= 1 (got {n!r})")
    if not (0.0 <= rho < 1.0):
        raise DomainError(f"rho must lie in [0, 1) (got {rho})")
    idx = np.arange(int(n))
    e = np.asarray(rho, dtype=float) ** np.abs(idx[:, None] - idx[None, :])
    np.fill_diagonal(e, 0.0)
    return EpsilonMatrix(entries=e)


def correlation_sum(eps: EpsilonMatrix) -> CorrelationSum:
    """Sum all off-diagonal entries (the diagonal is zero by construction)."""
    return CorrelationSum(s=float(np.sum(eps.entries)))


def ar1_correlation_sum(n: int, rho: float) -> CorrelationSum:
    """Closed form of sum_{i != j} rho^|i-j| without building the matrix.

    With q = rho and partial geometric sums over lag d = 1..n-1:

        S = 2 * [ n*(q - q^n)/(1 - q) - q*(1 - n q^(n-1) + (n-1) q^n)/(1-q)^2 ]

    Equals ``correlation_sum(ar1_epsilon(n, rho))`` up to roundoff but runs
    in O(1) memory, which matters for large n.
    """
    if int(n) != n or n < 1:
        raise DomainError(f"n must be an integer >= 1 (got {n!r})")
    if not (0.0 <= rho < 1.0):
        raise DomainError(f"rho must lie in [0, 1) (got {rho})")
    if rho == 0.0 or n == 1:
        return CorrelationSum(s=0.0)
    q = float(rho)
    qn = q**n
    geo = (q - qn) / (1.0 - q)
    weighted = q * (1.0 - n * qn / q + (n - 1) * qn) / (1.0 - q) ** 2
    return CorrelationSum(s=float(2.0 * (n * geo - weighted)))


def _s_value(s) -> float:
    return float(s.s) if isinstance(s, CorrelationSum) else float(s)


def _check_order(order: str) -> None:
    if order not in ORDERS:
        raise DomainError(f"order must be one of {ORDERS} (got {order!r})")


def _pieces(z, p: GumbelParams, s):
    """Shared terms: reduced exponent w, Psi_N, and the correction x(z)."""
    arr = np.asarray(z, dtype=float)
    if not np.all(np.isfinite(arr)):
        raise DomainError("z must be finite")
    t = _reduced(arr, p)
    w = np.exp(-np.maximum(t, _TAIL_CLIP))
    psi_cdf = np.exp(-w)
    x = np.exp(-arr * arr) * (_s_value(s) / (4.0 * np.pi))
    return arr, w, psi_cdf, x


def corrected_cdf(z, p: GumbelParams, s, order: str = "first"):
    """Corrected CDF of the chosen order; reduces to the Gumbel CDF at S=0.

    Values are intentionally not clamped to [0, 1]: excursions outside the
    unit interval indicate breakdown of the weak-correlation expansion and
    are surfaced by ``validity_check``.
    """
    _check_order(order)
    arr, w, psi_cdf, x = _pieces(z, p, s)
    if order == "first":
        out = psi_cdf * (1.0 + x)
    elif order == "second":
        out = psi_cdf * (1.0 + x + 0.5 * x * x)
    else:
        out = np.exp(x - w)
    return float(out) if np.isscalar(z) else out


def corrected_pdf(z, p: GumbelParams, s, order: str = "first"):
    """Exact z-derivative of ``corrected_cdf`` for the same order."""
    _check_order(order)
    arr, w, psi_cdf, x = _pieces(z, p, s)
    wb = w / p.beta
    if order == "first":
        out = psi_cdf * (wb * (1.0 + x) - 2.0 * arr * x)
    elif order == "second":
        out = psi_cdf * (wb * (1.0 + x + 0.5 * x * x) - 2.0 * arr * (x + x * x))
    else:
        out = np.exp(x - w) * (wb - 2.0 * arr * x)
    return float(out) if np.isscalar(z) else out


def validity_check(
    p: GumbelParams,
    s,
    eps,
    z_grid,
    order: str = "second",
    smallness_threshold: float = 0.3,
    atol: float = 1e-9,
) -> ValidityReport:
    """Diagnose whether the corrected distribution behaves like one.

    Checks, on the given ascending grid: CDF within [0, 1], CDF monotone
    non-decreasing, PDF non-negative.  ``z_violations`` collects the grid
    points where any check fails.  ``smallness_ok`` is a configurable
    trust marker on max |eps_ij| (default threshold 0.3), independent of
    the grid checks.

    ``eps`` is an EpsilonMatrix, or directly the scalar max |eps_ij| for
    correlation models whose matrix is never materialized.
    """
    grid = np.asarray(z_grid, dtype=float)
    if grid.ndim != 1 or grid.size < 2:
        raise DomainError("z_grid must be a 1-D grid with at least 2 points")
    if np.any(np.diff(grid) <= 0.0):
        raise DomainError("z_grid must be sorted strictly ascending")

    cdf = corrected_cdf(grid, p, s, order)
    pdf = corrected_pdf(grid, p, s, order)

    out_of_bounds = (cdf < -atol) | (cdf > 1.0 + atol)
    decreasing = np.zeros_like(grid, dtype=bool)
    decreasing[1:] = np.diff(cdf) < -atol
    negative_pdf = pdf < -atol

    flagged = out_of_bounds | decreasing | negative_pdf
    max_abs = eps.max_abs() if isinstance(eps, EpsilonMatrix) else float(eps)
    if not (0.0 <= max_abs < 1.0):
        raise DomainError(
            f"max |eps| must lie in [0, 1) (got {max_abs})"
        )
    return ValidityReport(
        smallness_ok=max_abs <= smallness_threshold,
        max_abs_eps=max_abs,
        cdf_monotone=not bool(np.any(decreasing)),
        cdf_bounded=not bool(np.any(out_of_bounds)),
        pdf_nonnegative=not bool(np.any(negative_pdf)),
        z_violations=tuple(float(v) for v in grid[flagged]),
    )


def correlated_pdf_first_order(r, eps: EpsilonMatrix) -> float:
    """First-order joint density of weakly correlated standard normals.

    Evaluates omega_0(r) * (1 + (1/2) * r^T eps r) with
    omega_0(r) = (2*pi)^(-n/2) exp(-|r|^2/2).  Restricted to small
    dimension: this is a test oracle for the expansion, not a production
    density evaluator.
    """
    rv = np.atleast_1d(np.asarray(r, dtype=float))
    if rv.ndim != 1 or rv.shape[0] != eps.n:
        raise DimensionMismatch(
            f"r must be a 1-D vector of length {eps.n} (got shape {rv.shape})"
        )
    if eps.n > _EXPANSION_MAX_DIM:
        raise DomainError(
            f"expansion oracle is limited to n <= {_EXPANSION_MAX_DIM} "
            f"(got n = {eps.n})"
        )
    if not np.all(np.isfinite(rv)):
        raise DomainError("r must be finite")
    omega0 = (2.0 * np.pi) ** (-eps.n / 2.0) * np.exp(-0.5 * float(rv @ rv))
    return float(omega0 * (1.0 + 0.5 * float(rv @ eps.entries @ rv)))


def char_fn_identity_check(k, mu, sigma, i: int, j: int, h: float) -> float:
    """Numerically verify the perturbation identity of the Gaussian
    characteristic function.

    Compares the central finite difference of chi(k) with respect to
    eps_ij at eps = 0 against the analytic value
    (1/2) d^2 chi_0 / dmu_i dmu_j = -(1/2) k_i k_j chi_0(k), and returns
    the absolute discrepancy, which is O(h^2).
    """
    kv = np.atleast_1d(np.asarray(k, dtype=float))
    mv = np.atleast_1d(np.asarray(mu, dtype=float))
    sv = np.atleast_1d(np.asarray(sigma, dtype=float))
    if not (kv.shape == mv.shape == sv.shape) or kv.ndim != 1:
        raise DimensionMismatch(
            f"k, mu, sigma must be 1-D and equal length "
            f"(got {kv.shape}, {mv.shape}, {sv.shape})"
        )
    if i == j:
        raise DomainError("indices i and j must differ (eps_ii is fixed at 0)")
    dim = kv.shape[0]
    if not (0 <= i < dim and 0 <= j < dim):
        raise DomainError(f"indices must lie in [0, {dim}) (got i={i}, j={j})")
    if np.any(sv <= 0.0):
        raise DomainError("all sigma entries must be positive")
    if not (1e-6 < h < 1e-3):
        raise DomainError(f"step h must lie in (1e-6, 1e-3) (got {h})")

    chi0 = np.exp(1j * np.dot(mv, kv) - 0.5 * np.dot(sv * sv, kv * kv))
    kk = kv[i] * kv[j]
    finite_diff = chi0 * (np.exp(-0.5 * h * kk) - np.exp(0.5 * h * kk)) / (2.0 * h)
    analytic = -0.5 * kk * chi0
    return float(abs(finite_diff - analytic))
