"""
Error probabilities: total-variation quadrature and closed-form benchmarks.
"""
import math
import warnings
from dataclasses import dataclass
from typing import Callable, List, NamedTuple, Tuple

import numpy as np
from scipy.optimize import brentq

from .errors import AccuracyWarning, DomainError
from .receivers import DensityPair, Domain
from .specfun import EvalDomain, adaptive_quadrature, erfc, gauss_legendre_rule
from .utils import debug

LINE_TOLERANCE = 1e-8
PLANE_TOLERANCE = 1e-6
SCAN_SAMPLES = 2048
MAX_SCAN_SAMPLES = 2048 * 32
ROOT_XTOL = 1e-12
# differences below this fraction of the largest one carry no sign information
SIGN_FLOOR = 1e-12
EVAL_BUDGET = 2_000_000
# angular rule: panels per quarter turn, Gauss-Legendre pair order, ray budget per quarter
ANGLE_PANELS = 2
ANGLE_ORDER = 8
ANGLE_RAY_BUDGET = 2400
RAY_TOLERANCE = 1e-10


@dataclass(frozen=True)
class QuadratureReport:
    value: float
    est_abs_error: float
    n_evals: int
    kinks: Tuple[float, ...] = ()


class _Integral(NamedTuple):
    value: float
    error: float
    n_evals: int
    kinks: Tuple[float, ...]


def _sign_change_brackets(diff: Callable[[np.ndarray], np.ndarray], lo: float, hi: float) -> List[Tuple[float, float]]:
    """
    Bracket the sign changes of ``diff`` on [lo, hi] with a uniform sample scan.

    The scan starts at SCAN_SAMPLES points and doubles while three sign flips
    sit in consecutive sample intervals.
    """
    samples = SCAN_SAMPLES
    while True:
        x = np.linspace(lo, hi, samples)
        d = diff(x)
        floor = SIGN_FLOOR * float(np.max(np.abs(d))) if d.size else 0.0
        signs = np.where(np.abs(d) > floor, np.sign(d), 0.0)
        flips = signs[:-1] * signs[1:] < 0
        crowded = bool(np.any(flips[:-2] & flips[1:-1] & flips[2:])) if flips.size >= 3 else False
        if not crowded or samples >= MAX_SCAN_SAMPLES:
            break
        samples *= 2
        debug(f"sign changes crowd the scan; retrying with {samples} samples")

    brackets = []
    nonzero = np.nonzero(signs)[0]
    for i, j in zip(nonzero[:-1], nonzero[1:]):
        if signs[i] != signs[j]:
            brackets.append((float(x[i]), float(x[j])))
    return brackets


def _integrate_abs_difference(evaluate: Callable[[np.ndarray], Tuple[np.ndarray, np.ndarray]],
                              lo: float, hi: float, feature_scale: float,
                              tolerance: float, max_evals: int = EVAL_BUDGET) -> _Integral:
    """Integral of |rho_1 - rho_2| over [lo, hi], split at the sign changes."""
    calls = [0]

    def diff(x: np.ndarray) -> np.ndarray:
        x = np.atleast_1d(x)
        calls[0] += x.size
        first, second = evaluate(x)
        return first - second

    brackets = _sign_change_brackets(diff, lo, hi)
    roots = []
    for a, b in brackets:
        roots.append(brentq(lambda t: float(diff(np.array([t]))[0]), a, b, xtol=ROOT_XTOL))
    edges = [lo] + sorted(set(roots)) + [hi]
    pieces = [(a, b) for a, b in zip(edges[:-1], edges[1:]) if b > a]

    values, errors = [], []
    per_piece_tol = tolerance / max(1, len(pieces))
    per_piece_budget = max(10_000, max_evals // max(1, len(pieces)))
    for a, b in pieces:
        result = adaptive_quadrature(
            lambda x: np.abs(diff(x)),
            EvalDomain(a, b, per_piece_tol),
            max_evals=per_piece_budget,
            initial_panels=max(1, math.ceil((b - a) / feature_scale)),
        )
        values.append(result.value)
        errors.append(result.error)
    return _Integral(math.fsum(values), math.fsum(errors), calls[0], tuple(roots))


def _warn_if_inaccurate(report: QuadratureReport, target: float, label: str) -> None:
    if report.est_abs_error > target:
        warnings.warn(AccuracyWarning(
            f"{label}: error estimate {report.est_abs_error:.3g} exceeds target {target:.3g}",
            report.est_abs_error), stacklevel=3)


def _plane_integral(pair: DensityPair, tolerance: float) -> _Integral:
    """
    Integral of |rho_1 - rho_2| over the plane from the upper half, doubled.

    Rays from the origin are integrated with the 1-D engine. The angle is
    integrated adaptively on [0, pi/2] and [pi/2, pi], where the two densities
    agree identically along the imaginary axis; panels bisect wherever rays
    turn tangent to the zero curve of the difference.
    """
    radius = pair.hi
    ray_errors: List[float] = []
    calls = [0]

    def ray(theta: float) -> float:
        direction = complex(math.cos(theta), math.sin(theta))

        def evaluate(r: np.ndarray):
            first, second = pair.eval(r * direction)
            return r * first, r * second

        result = _integrate_abs_difference(evaluate, 0.0, radius, pair.feature_scale, RAY_TOLERANCE)
        ray_errors.append(result.error)
        calls[0] += result.n_evals
        return result.value

    def angular(thetas: np.ndarray) -> np.ndarray:
        return np.array([ray(float(t)) for t in thetas])

    values, errors = [], []
    for a, b in ((0.0, 0.5 * math.pi), (0.5 * math.pi, math.pi)):
        result = adaptive_quadrature(angular, EvalDomain(a, b, 0.2 * tolerance),
                                     max_evals=ANGLE_RAY_BUDGET, initial_panels=ANGLE_PANELS,
                                     order=ANGLE_ORDER)
        values.append(result.value)
        errors.append(result.error)
    error = math.fsum(errors) + math.pi * max(ray_errors)
    return _Integral(2.0 * math.fsum(values), 2.0 * error, calls[0], ())


def error_rate_tv(pair: DensityPair, tolerance: float = None) -> QuadratureReport:
    """
    Minimum error probability P_E = 1/2 - 1/4 integral |rho_1 - rho_2|.

    One-dimensional domains are split at the bisected sign changes of the
    difference and each piece is integrated adaptively. The plane integrates
    rays with the same engine and the angle adaptively.

    Args:
        pair: Normalized densities for both signals
        tolerance: Absolute error target on P_E (1e-8 on lines, 1e-6 on the plane)

    Returns:
        QuadratureReport; an AccuracyWarning is issued when the target is missed
    """
    if pair.domain is Domain.PLANE_BETA:
        target = PLANE_TOLERANCE if tolerance is None else tolerance
        integral = _plane_integral(pair, 4.0 * target)
    else:
        target = LINE_TOLERANCE if tolerance is None else tolerance
        integral = _integrate_abs_difference(pair.eval, pair.lo, pair.hi, pair.feature_scale, 4.0 * target)

    value = min(0.5, max(0.0, 0.5 - 0.25 * integral.value))
    report = QuadratureReport(value, 0.25 * integral.error, integral.n_evals, integral.kinks)
    debug(f"{pair.label} alpha={pair.alpha:.6g}: P_E={value:.12g} "
          f"err={report.est_abs_error:.2g} evals={report.n_evals} kinks={len(report.kinks)}")
    _warn_if_inaccurate(report, target, pair.label)
    return report


def _check_alpha(alpha: float) -> float:
    alpha = float(alpha)
    if not alpha >= 0.0:
        raise DomainError(f"alpha must be >= 0, got {alpha}")
    return alpha


def helstrom_bpsk(alpha: float) -> float:
    """Helstrom bound 1/2 (1 - sqrt(1 - q)) = q / (2 (1 + sqrt(1 - q))) with q = e^(-4 alpha^2)."""
    alpha = _check_alpha(alpha)
    overlap_sq = math.exp(-4.0 * alpha ** 2)
    return 0.5 * overlap_sq / (1.0 + math.sqrt(-math.expm1(-4.0 * alpha ** 2)))


def gaussian_limit(alpha: float) -> float:
    """Homodyne (Gaussian) error 1/2 (1 - erf(sqrt(2) alpha))."""
    alpha = _check_alpha(alpha)
    return 0.5 * erfc(math.sqrt(2.0) * alpha)


def kennedy_error(alpha: float) -> float:
    """Kennedy receiver error 1/2 e^(-4 alpha^2)."""
    alpha = _check_alpha(alpha)
    return 0.5 * math.exp(-4.0 * alpha ** 2)


def heterodyne_error(alpha: float) -> float:
    """Heterodyne error 1/2 (1 - erf(alpha))."""
    alpha = _check_alpha(alpha)
    return 0.5 * erfc(alpha)


def helstrom_pure(overlap_sq: float) -> float:
    """Helstrom bound for two equiprobable pure states with |<psi_1|psi_2>|^2 = overlap_sq."""
    if not 0.0 <= overlap_sq <= 1.0:
        raise DomainError(f"overlap_sq must lie in [0, 1], got {overlap_sq}")
    return 0.5 * overlap_sq / (1.0 + math.sqrt(1.0 - overlap_sq))
