"""
Special functions and quadrature rules used by the receiver densities.

Polynomials are evaluated with forward three-term recurrences. Functions that
take an ``x`` accept either a float or a numpy array and return the same kind.
"""
import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, NamedTuple, Tuple, Union

import numpy as np
from scipy.special import gammaln, roots_legendre, xlogy

from .errors import DomainError, RangeError

ArrayLike = Union[float, np.ndarray]

HERMITE_MAX_ORDER = 1000
LOG_FACTORIAL_TABLE_SIZE = 2048

# Airy branch edges: Maclaurin series on [AIRY_SERIES_NEG, AIRY_SERIES_POS]
AIRY_SERIES_POS = 6.0
AIRY_SERIES_NEG = -7.0
AIRY_MIN_Z = -60.0
AIRY_MAX_Z = 40.0

_AI0 = 0.355028053887817239260     # Ai(0)
_MINUS_AIP0 = 0.258819403792806798405  # -Ai'(0)
_SQRT_PI = math.sqrt(math.pi)
_ERF_SERIES_LIMIT = 3.0
_ERFC_CF_TERMS = 120


@dataclass(frozen=True)
class EvalDomain:
    """Closed interval plus the absolute error target for integrating over it."""
    lo: float
    hi: float
    abs_tol: float = 1e-10

    def __post_init__(self):
        if not (math.isfinite(self.lo) and math.isfinite(self.hi)) or not self.lo < self.hi:
            raise DomainError(f"EvalDomain needs finite lo < hi, got [{self.lo}, {self.hi}]")
        if not self.abs_tol > 0:
            raise DomainError(f"EvalDomain needs abs_tol > 0, got {self.abs_tol}")

    @property
    def width(self) -> float:
        return self.hi - self.lo


class QuadResult(NamedTuple):
    value: float
    error: float
    n_evals: int


def _as_array(x: ArrayLike) -> Tuple[np.ndarray, bool]:
    arr = np.asarray(x, dtype=float)
    return arr, arr.ndim == 0


def _finish(values: np.ndarray, scalar: bool) -> ArrayLike:
    return float(values) if scalar else values


def _check_order(n: int, name: str, limit: int = None) -> int:
    if isinstance(n, bool) or int(n) != n or n < 0:
        raise DomainError(f"{name} order must be a non-negative integer, got {n}")
    if limit is not None and n > limit:
        raise RangeError(f"{name} order {n} exceeds the supported maximum {limit}")
    return int(n)


# Orthogonal polynomials
def hermite_phys(n: int, x: ArrayLike) -> ArrayLike:
    """
    Physicists' Hermite polynomial H_n(x).

    Args:
        n: Order, 0 <= n <= 1000
        x: Finite evaluation point(s)

    Returns:
        H_n(x) from the recurrence H_{k+1} = 2x H_k - 2k H_{k-1}

    Raises:
        RangeError: If the order is too large or the result overflows
    """
    n = _check_order(n, "Hermite", HERMITE_MAX_ORDER)
    xs, scalar = _as_array(x)
    if not np.all(np.isfinite(xs)):
        raise RangeError("hermite_phys needs finite x")
    h_prev = np.ones_like(xs)
    if n == 0:
        return _finish(h_prev, scalar)
    h = 2.0 * xs
    with np.errstate(over='ignore', invalid='ignore'):
        for k in range(1, n):
            h_prev, h = h, 2.0 * xs * h - 2.0 * k * h_prev
    if not np.all(np.isfinite(h)):
        raise RangeError(f"H_{n}(x) overflows double precision at the given x")
    return _finish(h, scalar)


def hermite_functions(nmax: int, x: ArrayLike) -> np.ndarray:
    """
    Position-space number-state wavefunctions <x|n> for n = 0..nmax.

    The normalized recurrence carries pi^(-1/4) e^(-x^2/2) / sqrt(2^n n!)
    inside every term, so nothing overflows for large n.

    Returns:
        Array of shape x.shape + (nmax + 1,)
    """
    nmax = _check_order(nmax, "Hermite", HERMITE_MAX_ORDER)
    xs = np.asarray(x, dtype=float)
    out = np.empty(xs.shape + (nmax + 1,))
    out[..., 0] = np.pi ** -0.25 * np.exp(-0.5 * xs * xs)
    if nmax >= 1:
        out[..., 1] = math.sqrt(2.0) * xs * out[..., 0]
    for k in range(1, nmax):
        out[..., k + 1] = (math.sqrt(2.0 / (k + 1)) * xs * out[..., k]
                           - math.sqrt(k / (k + 1)) * out[..., k - 1])
    return out


def _check_unit_interval(ss: np.ndarray) -> None:
    if np.any(np.isnan(ss)) or np.any(ss < -1.0) or np.any(ss > 1.0):
        raise DomainError("Legendre polynomials are defined on -1 <= s <= 1")


def legendre(n: int, s: ArrayLike) -> ArrayLike:
    """
    Legendre polynomial P_n(s) by Bonnet's recurrence.

    Raises:
        DomainError: If any s lies outside [-1, 1]
    """
    n = _check_order(n, "Legendre")
    ss, scalar = _as_array(s)
    _check_unit_interval(ss)
    p_prev = np.ones_like(ss)
    if n == 0:
        return _finish(p_prev, scalar)
    p = ss.copy()
    for k in range(1, n):
        p_prev, p = p, ((2 * k + 1) * ss * p - k * p_prev) / (k + 1)
    return _finish(p, scalar)


def legendre_normalized(nmax: int, s: ArrayLike) -> np.ndarray:
    """sqrt((2n+1)/2) P_n(s) for n = 0..nmax, shape s.shape + (nmax + 1,)."""
    nmax = _check_order(nmax, "Legendre")
    ss = np.asarray(s, dtype=float)
    _check_unit_interval(ss)
    out = np.empty(ss.shape + (nmax + 1,))
    out[..., 0] = 1.0
    if nmax >= 1:
        out[..., 1] = ss
    for k in range(1, nmax):
        out[..., k + 1] = ((2 * k + 1) * ss * out[..., k] - k * out[..., k - 1]) / (k + 1)
    out *= np.sqrt((2.0 * np.arange(nmax + 1) + 1.0) / 2.0)
    return out


def _check_laguerre_args(nu: float, xs: np.ndarray) -> None:
    if not nu > -1.0:
        raise DomainError(f"Laguerre parameter must satisfy nu > -1, got {nu}")
    if np.any(np.isnan(xs)) or np.any(xs < 0.0):
        raise DomainError("Laguerre polynomials are evaluated for x >= 0")


def laguerre_gen(n: int, nu: float, x: ArrayLike) -> ArrayLike:
    """
    Generalized Laguerre polynomial L_n^(nu)(x).

    Raises:
        DomainError: If nu <= -1 or x < 0
    """
    n = _check_order(n, "Laguerre")
    xs, scalar = _as_array(x)
    _check_laguerre_args(nu, xs)
    l_prev = np.ones_like(xs)
    if n == 0:
        return _finish(l_prev, scalar)
    l = 1.0 + nu - xs
    for k in range(1, n):
        l_prev, l = l, ((2 * k + 1 + nu - xs) * l - (k + nu) * l_prev) / (k + 1)
    return _finish(l, scalar)


def laguerre_functions(nmax: int, nu: float, r: ArrayLike) -> np.ndarray:
    """
    Orthonormal Laguerre functions sqrt(n!/Gamma(n+nu+1)) r^(nu/2) e^(-r/2) L_n^(nu)(r).

    Returns:
        Array of shape r.shape + (nmax + 1,)
    """
    nmax = _check_order(nmax, "Laguerre")
    rs = np.asarray(r, dtype=float)
    _check_laguerre_args(nu, rs)
    out = np.empty(rs.shape + (nmax + 1,))
    with np.errstate(divide='ignore'):
        out[..., 0] = np.exp(0.5 * (xlogy(nu, rs) - rs - gammaln(nu + 1.0)))
    previous = np.zeros_like(rs)
    for k in range(nmax):
        out[..., k + 1] = (((2 * k + 1 + nu - rs) * out[..., k]
                            - math.sqrt(k * (k + nu)) * previous)
                           / math.sqrt((k + 1) * (k + 1 + nu)))
        previous = out[..., k]
    return out


# Error function
def _erf_series(x: float) -> float:
    """erf for 0 < x <= 3 from a series with positive terms only."""
    x2 = x * x
    term = total = x
    k = 0
    while term > 1e-17 * total:
        k += 1
        term *= 2.0 * x2 / (2 * k + 1)
        total += term
    return 2.0 / _SQRT_PI * math.exp(-x2) * total


def _erfc_continued_fraction(x: float) -> float:
    """erfc for x > 3 from its continued fraction, evaluated bottom-up."""
    f = x
    for k in range(_ERFC_CF_TERMS, 0, -1):
        f = x + 0.5 * k / f
    return math.exp(-x * x) / (_SQRT_PI * f)


def erf(x: float) -> float:
    """
    Error function, accurate to about 1e-16 absolute.

    Uses a positive-term series up to |x| = 3 and the complement's continued
    fraction beyond. Odd symmetry holds exactly.
    """
    x = float(x)
    if math.isnan(x):
        raise DomainError("erf of NaN")
    ax = abs(x)
    if ax == 0.0:
        return 0.0
    if ax <= _ERF_SERIES_LIMIT:
        value = _erf_series(ax)
    elif math.isinf(ax):
        value = 1.0
    else:
        value = 1.0 - _erfc_continued_fraction(ax)
    return math.copysign(value, x)


def erfc(x: float) -> float:
    """Complementary error function without cancellation for large x."""
    x = float(x)
    if math.isnan(x):
        raise DomainError("erfc of NaN")
    if x < 0.0:
        return 2.0 - erfc(-x)
    if x <= _ERF_SERIES_LIMIT:
        return 1.0 - erf(x)
    if math.isinf(x):
        return 0.0
    return _erfc_continued_fraction(x)


# Airy function
@lru_cache(maxsize=None)
def _airy_asymptotic_coefficients(terms: int = 40) -> np.ndarray:
    u = np.empty(terms)
    u[0] = 1.0
    for k in range(1, terms):
        u[k] = u[k - 1] * (6 * k - 5) * (6 * k - 3) * (6 * k - 1) / ((2 * k - 1) * 216.0 * k)
    return u


def _optimally_truncated(terms: np.ndarray) -> np.ndarray:
    """Row-wise sum of an asymptotic series, stopping at its smallest term."""
    k = np.arange(terms.shape[-1])
    smallest = np.argmin(np.abs(terms), axis=-1)
    return np.sum(np.where(k[None, :] <= smallest[:, None], terms, 0.0), axis=-1)


def _airy_series(z: np.ndarray) -> np.ndarray:
    z3 = z ** 3
    f_term = np.ones_like(z)
    g_term = z.copy()
    f_sum = f_term.copy()
    g_sum = g_term.copy()
    for k in range(1, 60):
        f_term = f_term * z3 / ((3 * k - 1) * (3 * k))
        g_term = g_term * z3 / ((3 * k) * (3 * k + 1))
        f_sum += f_term
        g_sum += g_term
    return _AI0 * f_sum - _MINUS_AIP0 * g_sum


def _airy_positive_scaled(z: np.ndarray) -> np.ndarray:
    """Ai(z) e^(zeta) for large positive z."""
    u = _airy_asymptotic_coefficients()
    zeta = 2.0 / 3.0 * z ** 1.5
    k = np.arange(len(u))
    with np.errstate(over='ignore'):
        terms = (-1.0) ** k * u / np.power(zeta[:, None], k)
    return _optimally_truncated(terms) / (2.0 * _SQRT_PI * z ** 0.25)


def _airy_negative(z: np.ndarray) -> np.ndarray:
    """Ai(z) for large negative z, oscillatory form."""
    u = _airy_asymptotic_coefficients()
    x = -z
    zeta = 2.0 / 3.0 * x ** 1.5
    k = np.arange(len(u))
    with np.errstate(over='ignore'):
        magnitudes = u / np.power(zeta[:, None], k)
    signs = np.where(k % 2 == 0, (-1.0) ** (k // 2), (-1.0) ** ((k - 1) // 2))
    terms = signs * magnitudes
    # both sums stop at the smallest term of the combined sequence
    smallest = np.argmin(magnitudes, axis=-1)
    keep = k[None, :] <= smallest[:, None]
    even = np.sum(np.where(keep & (k % 2 == 0), terms, 0.0), axis=-1)
    odd = np.sum(np.where(keep & (k % 2 == 1), terms, 0.0), axis=-1)
    chi = zeta - math.pi / 4.0
    return (np.cos(chi) * even + np.sin(chi) * odd) / (_SQRT_PI * x ** 0.25)


def _airy(zs: np.ndarray, scaled: bool) -> np.ndarray:
    out = np.empty_like(zs)
    mid = (zs >= AIRY_SERIES_NEG) & (zs <= AIRY_SERIES_POS)
    pos = zs > AIRY_SERIES_POS
    neg = zs < AIRY_SERIES_NEG
    if np.any(mid):
        zm = zs[mid]
        values = _airy_series(zm)
        if scaled:
            values = values * np.exp(2.0 / 3.0 * np.clip(zm, 0.0, None) ** 1.5)
        out[mid] = values
    if np.any(pos):
        zp = zs[pos]
        values = _airy_positive_scaled(zp)
        if not scaled:
            values = values * np.exp(-2.0 / 3.0 * zp ** 1.5)
        out[pos] = values
    if np.any(neg):
        out[neg] = _airy_negative(zs[neg])
    return out


def airy_ai(z: ArrayLike) -> ArrayLike:
    """
    Airy function of the first kind, absolute error below 1e-10.

    Raises:
        RangeError: If z lies outside [-60, 40]
    """
    zs, scalar = _as_array(z)
    if np.any(np.isnan(zs)) or np.any(zs < AIRY_MIN_Z) or np.any(zs > AIRY_MAX_Z):
        raise RangeError(f"airy_ai is supported on [{AIRY_MIN_Z}, {AIRY_MAX_Z}]")
    return _finish(_airy(zs.reshape(-1), scaled=False).reshape(zs.shape), scalar)


def airy_ai_scaled(z: ArrayLike) -> ArrayLike:
    """Ai(z) e^((2/3) z^(3/2)) for z > 0 and plain Ai(z) for z <= 0."""
    zs, scalar = _as_array(z)
    if not np.all(np.isfinite(zs)):
        raise RangeError("airy_ai_scaled needs finite z")
    return _finish(_airy(zs.reshape(-1), scaled=True).reshape(zs.shape), scalar)


# Factorials
@lru_cache(maxsize=None)
def _log_factorial_table() -> np.ndarray:
    table = np.zeros(LOG_FACTORIAL_TABLE_SIZE + 1)
    table[1:] = np.cumsum(np.log(np.arange(1, LOG_FACTORIAL_TABLE_SIZE + 1, dtype=float)))
    table.flags.writeable = False
    return table


def log_factorial(n: int) -> float:
    """ln(n!) from a cumulative-sum table, Stirling's series beyond it."""
    n = _check_order(n, "factorial")
    if n <= LOG_FACTORIAL_TABLE_SIZE:
        return float(_log_factorial_table()[n])
    x = float(n)
    return ((x + 0.5) * math.log(x) - x + 0.5 * math.log(2.0 * math.pi)
            + 1.0 / (12.0 * x) - 1.0 / (360.0 * x ** 3) + 1.0 / (1260.0 * x ** 5))


def log_factorials(nmax: int) -> np.ndarray:
    """ln(k!) for k = 0..nmax."""
    nmax = _check_order(nmax, "factorial")
    if nmax <= LOG_FACTORIAL_TABLE_SIZE:
        return _log_factorial_table()[:nmax + 1].copy()
    return np.array([log_factorial(k) for k in range(nmax + 1)])


# Quadrature
@lru_cache(maxsize=None)
def gauss_legendre_rule(order: int) -> Tuple[np.ndarray, np.ndarray]:
    nodes, weights = roots_legendre(order)
    nodes.flags.writeable = False
    weights.flags.writeable = False
    return nodes, weights


def composite_rule(domain: EvalDomain, panels: int, order: int = 32) -> Tuple[np.ndarray, np.ndarray]:
    """Nodes and weights of composite Gauss-Legendre over equal panels."""
    nodes, weights = gauss_legendre_rule(order)
    edges = np.linspace(domain.lo, domain.hi, panels + 1)
    half = 0.5 * np.diff(edges)
    mids = 0.5 * (edges[:-1] + edges[1:])
    x = (mids[:, None] + half[:, None] * nodes[None, :]).reshape(-1)
    w = (half[:, None] * weights[None, :]).reshape(-1)
    return x, w


def fixed_quadrature(f: Callable[[np.ndarray], np.ndarray], domain: EvalDomain,
                     panels: int = 64, order: int = 32) -> float:
    """Integrate a vectorized function with a fixed composite rule."""
    x, w = composite_rule(domain, panels, order)
    return float(np.dot(w, f(x)))


def _gauss_pair(f: Callable[[np.ndarray], np.ndarray], lo: np.ndarray, hi: np.ndarray,
                order: int) -> Tuple[np.ndarray, np.ndarray]:
    """Order-n and order-2n Gauss-Legendre values on many panels with one call to f."""
    low_nodes, low_weights = gauss_legendre_rule(order)
    high_nodes, high_weights = gauss_legendre_rule(2 * order)
    half = 0.5 * (hi - lo)[:, None]
    mid = 0.5 * (hi + lo)[:, None]
    nodes = np.concatenate([low_nodes, high_nodes])
    y = f((mid + half * nodes[None, :]).reshape(-1)).reshape(len(lo), -1)
    coarse = half[:, 0] * (y[:, :order] @ low_weights)
    fine = half[:, 0] * (y[:, order:] @ high_weights)
    return fine, np.abs(fine - coarse)


def adaptive_quadrature(f: Callable[[np.ndarray], np.ndarray], domain: EvalDomain,
                        max_evals: int = 200_000, initial_panels: int = 1,
                        order: int = 16) -> QuadResult:
    """
    Adaptive composite Gauss-Legendre integration of a vectorized function.

    Each panel is integrated with ``order`` and ``2*order`` nodes; the higher
    order value is kept and the difference is the panel's error estimate.
    Every round bisects the panels whose estimate exceeds their share of
    ``domain.abs_tol`` (always including the worst one) and evaluates all new
    panels in a single call, until the summed estimate meets the target or
    the evaluation budget runs out.

    Args:
        f: Integrand taking and returning 1-D arrays
        domain: Interval and absolute error target
        max_evals: Integrand evaluation budget
        initial_panels: Number of equal panels to start from
        order: Low order of the Gauss-Legendre pair

    Returns:
        QuadResult(value, error, n_evals)
    """
    per_panel = 3 * order
    edges = np.linspace(domain.lo, domain.hi, max(1, initial_panels) + 1)
    lo, hi = edges[:-1], edges[1:]
    values, errors = _gauss_pair(f, lo, hi, order)
    n_evals = per_panel * len(lo)

    while errors.sum() > domain.abs_tol:
        share = domain.abs_tol / len(lo)
        refine = errors > share
        refine[np.argmax(errors)] = True
        mids = 0.5 * (lo[refine] + hi[refine])
        splittable = (mids > lo[refine]) & (mids < hi[refine])
        if not np.all(splittable) or n_evals + 2 * per_panel * int(refine.sum()) > max_evals:
            break
        child_lo = np.concatenate([lo[refine], mids])
        child_hi = np.concatenate([mids, hi[refine]])
        child_values, child_errors = _gauss_pair(f, child_lo, child_hi, order)
        n_evals += per_panel * len(child_lo)
        keep = ~refine
        lo = np.concatenate([lo[keep], child_lo])
        hi = np.concatenate([hi[keep], child_hi])
        values = np.concatenate([values[keep], child_values])
        errors = np.concatenate([errors[keep], child_errors])

    ordering = np.argsort(lo, kind='stable')
    return QuadResult(
        value=math.fsum(values[ordering]),
        error=math.fsum(errors[ordering]),
        n_evals=n_evals,
    )
