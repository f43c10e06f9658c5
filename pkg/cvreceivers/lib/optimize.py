"""
Receiver parameter optimization, error-curve sweeps and linear scaling fits.
"""
import math
from dataclasses import dataclass, field
from typing import Dict, Iterable, List, Optional, Sequence, Tuple, Union

import numpy as np
from scipy.optimize import minimize, minimize_scalar
from scipy.stats import qmc

from .discrim import (
    LINE_TOLERANCE,
    PLANE_TOLERANCE,
    QuadratureReport,
    error_rate_tv,
    gaussian_limit,
    helstrom_bpsk,
    kennedy_error,
)
from .errors import DomainError, InvariantError, RankError, SpecError
from .progress import run_parallel
from .receivers import Family, ReceiverSpec, build_density, rotation_receiver
from .states import RotationKind
from .utils import compact_json, debug

BETA_STEP = 0.05
BETA_TOL = 1e-4
FLAT_TOLERANCE = 1e-12
# half-width of the coarse beta window around a warm-start value
WARM_WINDOW = 0.5
MAX_FOCK_SET = 8
THETA_BUDGET = 400
THETA_SIMPLEX_STEP = 0.5
LOW_DISCREPANCY_SEEDS = 8
TWO_PI = 2.0 * math.pi
SWEEP_HEADER = ('alpha_sq', 'receiver', 'param_json', 'pe', 'pe_helstrom', 'pe_gaussian', 'pe_kennedy',
                'est_abs_error', 'flag')


@dataclass(frozen=True)
class OptResult:
    """
    Best parameters found for one alpha.

    ``flat`` marks a beta landscape with no measurable structure; the result
    then carries the homodyne error and no parameters.
    """
    best_params: Tuple[float, ...]
    best_pe: float
    n_evals: int
    converged: bool
    param_names: Tuple[str, ...] = ()
    est_abs_error: float = 0.0
    flat: bool = False

    def __post_init__(self):
        if not 0.0 <= self.best_pe <= 0.5:
            raise InvariantError(f"best_pe {self.best_pe} outside [0, 0.5]")

    def as_dict(self) -> Dict[str, float]:
        return dict(zip(self.param_names, self.best_params))


@dataclass(frozen=True)
class CurvePoint:
    alpha_sq: float
    pe: float
    params: Dict[str, object] = field(default_factory=dict)
    pe_helstrom: float = float('nan')
    pe_gaussian: float = float('nan')
    pe_kennedy: float = float('nan')
    est_abs_error: float = 0.0
    flag: str = "ok"


@dataclass(frozen=True, eq=False)
class ErrorCurve:
    points: Tuple[CurvePoint, ...]
    receiver: ReceiverSpec

    def __post_init__(self):
        object.__setattr__(self, 'points', tuple(self.points))
        grid = [p.alpha_sq for p in self.points]
        if any(b <= a for a, b in zip(grid[:-1], grid[1:])):
            raise InvariantError("ErrorCurve alpha_sq values must be strictly increasing")
        if any(not 0.0 <= p.pe <= 0.5 for p in self.points):
            raise InvariantError("ErrorCurve error probabilities must lie in [0, 0.5]")

    @property
    def label(self) -> str:
        return self.receiver.label

    def column(self, name: str) -> List[object]:
        return [getattr(p, name) for p in self.points]

    def rows(self) -> List[List[object]]:
        """Rows in SWEEP_HEADER order."""
        return [
            [p.alpha_sq, self.label, compact_json(p.params), p.pe, p.pe_helstrom, p.pe_gaussian,
             p.pe_kennedy, p.est_abs_error, p.flag]
            for p in self.points
        ]


@dataclass(frozen=True)
class FitResult:
    slope: float
    intercept: float
    rms_residual: float

    def as_dict(self) -> Dict[str, float]:
        return {"slope": self.slope, "intercept": self.intercept, "rms_residual": self.rms_residual}


def _rotation_kind(family: Union[str, RotationKind]) -> RotationKind:
    if isinstance(family, RotationKind):
        kind = family
    else:
        kind = RotationKind(str(family).replace('_rotation', ''))
    if kind not in (RotationKind.CAT, RotationKind.COHERENT):
        raise SpecError(f"beta optimization covers cat and coherent rotations, not {kind.value}")
    return kind


def evaluate_receiver(spec: ReceiverSpec, alpha: float) -> QuadratureReport:
    """Error probability of one receiver at one amplitude."""
    return error_rate_tv(build_density(spec, alpha))


def beta_grid(alpha: float, step: float = BETA_STEP) -> np.ndarray:
    """Coarse beta grid on (0, 0.5 alpha + 3]."""
    beta_max = 0.5 * alpha + 3.0
    count = int(math.floor(beta_max / step + 1e-9))
    return step * np.arange(1, count + 1)


def optimize_beta(family: Union[str, RotationKind], alpha: float, start: Optional[float] = None,
                  step: float = BETA_STEP, tol: float = BETA_TOL) -> OptResult:
    """
    Best rotation amplitude beta for a cat or coherent rotation with theta = pi.

    A coarse grid over (0, beta_max] locates the minimum, then bounded Brent
    search (golden section with parabolic steps) refines it to ``tol``. With
    ``start`` the coarse scan covers only start +/- 0.5, widening to the full
    grid when the minimum sits on the window edge.

    Args:
        family: "cat_rotation" or "coherent_rotation"
        alpha: Signal amplitude, alpha > 0
        start: Warm-start beta from a neighbouring grid point

    Returns:
        OptResult with best_params == (beta,); flat landscapes return the
        homodyne error with flat=True
    """
    kind = _rotation_kind(family)
    alpha = float(alpha)
    if not alpha > 0.0:
        raise DomainError(f"optimize_beta needs alpha > 0, got {alpha}")

    reports: Dict[float, QuadratureReport] = {}

    def objective(beta: float) -> float:
        beta = float(beta)
        if beta not in reports:
            reports[beta] = evaluate_receiver(rotation_receiver(kind, alpha, beta=beta), alpha)
        return reports[beta].value

    grid = beta_grid(alpha, step)
    scan = grid
    if start is not None:
        window = grid[np.abs(grid - start) <= WARM_WINDOW + 1e-9]
        if window.size >= 3:
            values = [objective(b) for b in window]
            i = int(np.argmin(values))
            on_edge = (i == 0 and window[0] != grid[0]) or (i == window.size - 1 and window[-1] != grid[-1])
            if not on_edge:
                scan = window
    values = np.array([objective(b) for b in scan])

    if values.max() - values.min() <= FLAT_TOLERANCE:
        homodyne = evaluate_receiver(ReceiverSpec(Family.HOMODYNE), alpha)
        debug(f"{kind.value} rotation: flat beta landscape at alpha={alpha:.6g}")
        return OptResult((), homodyne.value, len(reports) + 1, True,
                         est_abs_error=homodyne.est_abs_error, flat=True)

    i = int(np.argmin(values))
    lo = scan[max(i - 1, 0)]
    hi = scan[min(i + 1, scan.size - 1)]
    refined = minimize_scalar(objective, bounds=(lo, hi), method='bounded', options={'xatol': tol})
    best_beta = float(refined.x) if refined.fun < values[i] else float(scan[i])
    best = reports[best_beta]
    debug(f"{kind.value} rotation alpha={alpha:.6g}: beta*={best_beta:.6g} P_E={best.value:.6g} "
          f"evals={len(reports)}")
    return OptResult((best_beta,), best.value, len(reports), bool(refined.success),
                     ('beta',), best.est_abs_error)


def theta_seeds(dim: int) -> List[np.ndarray]:
    """Deterministic multistart seeds: all pi, all pi/2, zeros, then Halton points."""
    seeds = [np.full(dim, math.pi), np.full(dim, 0.5 * math.pi), np.zeros(dim)]
    halton = qmc.Halton(d=dim, scramble=False).random(LOW_DISCREPANCY_SEEDS + 1)[1:]
    seeds.extend(TWO_PI * point for point in halton)
    return seeds


def optimize_thetas(fock_set: Sequence[int], alpha: float,
                    max_evals_per_start: int = THETA_BUDGET,
                    extra_seeds: Iterable[Sequence[float]] = ()) -> OptResult:
    """
    Best rotation angles for a set of number-state projectors.

    Nelder-Mead runs from every seed of theta_seeds plus ``extra_seeds``;
    the best end point over all starts wins. Angles are reported in [0, 2 pi).

    Returns:
        OptResult; converged is False when the winning start ran out of budget
    """
    fock_set = tuple(int(n) for n in fock_set)
    if not fock_set or len(fock_set) > MAX_FOCK_SET:
        raise DomainError(f"Fock set size must be between 1 and {MAX_FOCK_SET}, got {len(fock_set)}")
    dim = len(fock_set)
    alpha = float(alpha)
    reports: Dict[Tuple[float, ...], QuadratureReport] = {}

    def objective(thetas: np.ndarray) -> float:
        key = tuple(float(t) for t in np.mod(thetas, TWO_PI))
        if key not in reports:
            spec = rotation_receiver(RotationKind.FOCK, alpha, thetas=key, fock_set=fock_set)
            reports[key] = evaluate_receiver(spec, alpha)
        return reports[key].value

    seeds = theta_seeds(dim) + [np.asarray(s, dtype=float) for s in extra_seeds]
    best = None
    total_evals = 0
    for seed in seeds:
        simplex = np.vstack([seed, seed + THETA_SIMPLEX_STEP * np.eye(dim)])
        result = minimize(objective, seed, method='Nelder-Mead',
                          options={'maxfev': max_evals_per_start, 'initial_simplex': simplex,
                                   'xatol': 1e-4, 'fatol': 1e-12})
        total_evals += int(result.nfev)
        if best is None or result.fun < best.fun:
            best = result

    thetas = tuple(float(t) for t in np.mod(best.x, TWO_PI))
    report = reports[thetas]
    debug(f"fock set {fock_set} alpha={alpha:.6g}: theta*={thetas} P_E={report.value:.6g} evals={total_evals}")
    return OptResult(thetas, report.value, total_evals, bool(best.success),
                     tuple(f"theta_{n}" for n in fock_set), report.est_abs_error)


def optimize_fock_chain(fock_sets: Sequence[Sequence[int]], alpha: float,
                        max_evals_per_start: int = THETA_BUDGET) -> List[OptResult]:
    """
    Optimize nested Fock sets in order, seeding each with the previous optimum.

    Angles for projectors new to a set start at zero, so every set starts
    from the error rate its predecessor reached.
    """
    results: List[OptResult] = []
    previous: Dict[int, float] = {}
    for fock_set in fock_sets:
        seed = [previous.get(n, 0.0) for n in fock_set]
        result = optimize_thetas(fock_set, alpha, max_evals_per_start,
                                 extra_seeds=[seed] if previous else ())
        previous = dict(zip(fock_set, result.best_params))
        results.append(result)
    return results


def _benchmarks(alpha: float) -> Dict[str, float]:
    return {
        'pe_helstrom': helstrom_bpsk(alpha),
        'pe_gaussian': gaussian_limit(alpha),
        'pe_kennedy': kennedy_error(alpha),
    }


def _check_grid(alpha_sq_grid: Sequence[float]) -> List[float]:
    grid = [float(a) for a in alpha_sq_grid]
    if not grid:
        raise DomainError("alpha_sq grid is empty")
    if any(a <= 0.0 for a in grid):
        raise DomainError("alpha_sq grid values must be positive")
    if any(b <= a for a, b in zip(grid[:-1], grid[1:])):
        raise DomainError("alpha_sq grid must be strictly increasing")
    return grid


def _fixed_point(spec: ReceiverSpec, alpha_sq: float) -> CurvePoint:
    alpha = math.sqrt(alpha_sq)
    report = evaluate_receiver(spec, alpha)
    target = PLANE_TOLERANCE if spec.family is Family.PACS else LINE_TOLERANCE
    flag = "accuracy" if report.est_abs_error > target else "ok"
    return CurvePoint(alpha_sq, report.value, spec.params(), est_abs_error=report.est_abs_error,
                      flag=flag, **_benchmarks(alpha))


def _optimized_point(spec: ReceiverSpec, alpha_sq: float, result: OptResult) -> CurvePoint:
    alpha = math.sqrt(alpha_sq)
    rotation = spec.rotation
    params: Dict[str, object] = {"rotation": rotation.kind.value}
    if rotation.kind is RotationKind.FOCK:
        params["fock_set"] = list(rotation.fock_set)
        params["theta"] = list(result.best_params)
    elif not result.flat:
        params.update(result.as_dict())
        params["theta"] = [math.pi]
    if result.flat:
        flag = "flat"
    elif result.est_abs_error > LINE_TOLERANCE:
        flag = "accuracy"
    else:
        flag = "ok"
    return CurvePoint(alpha_sq, result.best_pe, params, est_abs_error=result.est_abs_error,
                      flag=flag, **_benchmarks(alpha))


def sweep_error_curve(spec: ReceiverSpec, alpha_sq_grid: Sequence[float], optimize: bool = False,
                      workers: int = 1, backward: bool = False) -> ErrorCurve:
    """
    Error probability of one receiver across a grid of signal energies.

    With ``optimize`` set, rotation receivers are re-optimized at every point
    (beta for cat/coherent, angles for Fock sets), warm-started from the
    previous point in sweep order; these sweeps run sequentially. Other
    sweeps may use ``workers`` threads. Points are always returned in
    ascending alpha_sq order.

    Args:
        spec: Receiver; for optimized sweeps only its rotation kind and Fock set matter
        alpha_sq_grid: Strictly increasing positive |alpha|^2 values
        optimize: Re-optimize free parameters per point
        workers: Thread count for non-optimized sweeps
        backward: Walk the grid from the top when warm-starting
    """
    grid = _check_grid(alpha_sq_grid)
    optimizable = optimize and spec.family is Family.ROTATION_HOMODYNE
    if optimize and not optimizable:
        debug(f"{spec.label} has no continuous parameters to optimize; evaluating as given")

    if not optimizable:
        points = run_parallel([lambda a=a: _fixed_point(spec, a) for a in grid], workers)
        return ErrorCurve(tuple(points), spec)

    order = list(reversed(grid)) if backward else grid
    points: Dict[float, CurvePoint] = {}
    warm = None
    kind = spec.rotation.kind
    for alpha_sq in order:
        alpha = math.sqrt(alpha_sq)
        if kind is RotationKind.FOCK:
            extra = [warm] if warm is not None else []
            result = optimize_thetas(spec.rotation.fock_set, alpha, extra_seeds=extra)
        else:
            result = optimize_beta(kind, alpha, start=warm)
        if not result.flat:
            warm = result.best_params if kind is RotationKind.FOCK else result.best_params[0]
        points[alpha_sq] = _optimized_point(spec, alpha_sq, result)
    return ErrorCurve(tuple(points[a] for a in grid), spec)


def linear_fit(points: Sequence[Tuple[float, float]]) -> FitResult:
    """
    Ordinary least-squares line through (x, y) points.

    Raises:
        RankError: With fewer than two points or a single distinct x
    """
    data = np.asarray(points, dtype=float).reshape(-1, 2)
    if data.shape[0] < 2:
        raise RankError("linear_fit needs at least two points")
    x, y = data[:, 0], data[:, 1]
    design = np.column_stack([x, np.ones_like(x)])
    coef, _, rank, _ = np.linalg.lstsq(design, y, rcond=None)
    if rank < 2 or np.ptp(x) == 0.0:
        raise RankError("linear_fit needs at least two distinct x values")
    residual = y - design @ coef
    return FitResult(float(coef[0]), float(coef[1]), float(np.sqrt(np.mean(residual ** 2))))


def fit_beta_scaling(family: Union[str, RotationKind], alpha_sq_grid: Sequence[float]) -> Tuple[ErrorCurve, FitResult]:
    """
    Optimal beta across a grid and its linear fit in |alpha|^2.

    Points where the landscape is flat carry no beta and are left out of the fit.
    """
    kind = _rotation_kind(family)
    spec = rotation_receiver(kind, 1.0, beta=1.0)
    curve = sweep_error_curve(spec, alpha_sq_grid, optimize=True)
    pairs = [(p.alpha_sq, p.params["beta"]) for p in curve.points if "beta" in p.params]
    return curve, linear_fit(pairs)
