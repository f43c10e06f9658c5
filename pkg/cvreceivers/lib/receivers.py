"""
Outcome densities of each receiver family for the signals |+alpha> and |-alpha>.
"""
import math
from dataclasses import dataclass, fields
from enum import Enum
from typing import Callable, Dict, Optional, Sequence, Tuple, Union

import numpy as np
from scipy.special import gammainc

from .errors import DegenerateParameterError, DomainError, SpecError
from .specfun import (
    EvalDomain,
    airy_ai_scaled,
    erf,
    fixed_quadrature,
    gauss_legendre_rule,
    hermite_functions,
    laguerre_functions,
    legendre_normalized,
)
from .states import (
    FockVector,
    QUADRATURE_LIMIT,
    RotationKind,
    RotationSpec,
    apply_projector_rotation,
    cat_rotation,
    coherent_fock,
    coherent_rotation,
    fock_rotation,
    pacs_overlap_sq,
    quad_overlap,
    real_amplitude,
    truncation_for,
)

SQRT2 = math.sqrt(2.0)
# Gaussian tails e^(-9^2) sit far below double precision relative to the peak
LINE_MARGIN = 9.0
PACS_MARGIN = 8.0


class Family(Enum):
    HOMODYNE = "homodyne"
    ROTATION_HOMODYNE = "rotation_homodyne"
    LEGENDRE = "legendre"
    LAGUERRE = "laguerre"
    PACS = "pacs"
    CPG = "cpg"


class Domain(Enum):
    LINE = "line"
    INTERVAL_S = "interval_s"
    HALFLINE_R = "halfline_r"
    PLANE_BETA = "plane_beta"


_REQUIRED_FIELDS = {
    Family.HOMODYNE: frozenset(),
    Family.ROTATION_HOMODYNE: frozenset({'rotation'}),
    Family.LEGENDRE: frozenset(),
    Family.LAGUERRE: frozenset({'nu'}),
    Family.PACS: frozenset({'n_add'}),
    Family.CPG: frozenset({'gamma'}),
}


@dataclass(frozen=True, eq=False)
class ReceiverSpec:
    """One measurement scheme with its free parameters."""
    family: Family
    rotation: Optional[RotationSpec] = None
    nu: Optional[float] = None
    n_add: Optional[int] = None
    gamma: Optional[float] = None

    def __post_init__(self):
        try:
            family = Family(self.family)
        except ValueError:
            raise SpecError(f"Unknown receiver family: {self.family}") from None
        object.__setattr__(self, 'family', family)

        present = {f.name for f in fields(self) if f.name != 'family' and getattr(self, f.name) is not None}
        required = _REQUIRED_FIELDS[family]
        if present != required:
            missing = sorted(required - present)
            extra = sorted(present - required)
            raise SpecError(
                f"{family.value} receiver: missing {missing or 'nothing'}, unexpected {extra or 'nothing'}")

        if self.nu is not None and not float(self.nu) > -1.0:
            raise DomainError(f"Laguerre order must satisfy nu > -1, got {self.nu}")
        if self.n_add is not None and (isinstance(self.n_add, bool) or int(self.n_add) != self.n_add
                                       or self.n_add < 0):
            raise DomainError(f"n_add must be a non-negative integer, got {self.n_add}")
        if self.gamma is not None:
            if self.gamma == 0.0:
                raise DegenerateParameterError("gamma = 0 is plain homodyne detection; use the homodyne family")
            if not (math.isfinite(self.gamma) and self.gamma > 0.0):
                raise DomainError(f"cubicity gamma must be positive and finite, got {self.gamma}")

    @property
    def label(self) -> str:
        """Short receiver name used in reports."""
        if self.family is Family.ROTATION_HOMODYNE:
            return f"{self.rotation.kind.value}_rotation"
        if self.family is Family.LAGUERRE:
            return f"laguerre_nu{self.nu:g}"
        if self.family is Family.PACS:
            return "heterodyne" if self.n_add == 0 else f"pacs_n{self.n_add}"
        if self.family is Family.CPG:
            return f"cpg_gamma{self.gamma:g}"
        return self.family.value

    def params(self) -> Dict[str, object]:
        """Free parameters as a plain dict."""
        if self.rotation is not None:
            return self.rotation.describe()
        for name in ('nu', 'n_add', 'gamma'):
            value = getattr(self, name)
            if value is not None:
                return {name: value}
        return {}


@dataclass(frozen=True, eq=False)
class DensityPair:
    """
    Outcome densities for both signals over one labelled domain.

    ``eval`` maps an array of outcome labels (complex for the plane) to the pair
    (rho_plus, rho_minus). ``lo``/``hi`` bound the integration window; for the
    plane they are the radial range of a disk centred on the origin.
    ``feature_scale`` is the narrowest structure the densities can show.
    """
    domain: Domain
    eval: Callable[[np.ndarray], Tuple[np.ndarray, np.ndarray]]
    lo: float
    hi: float
    feature_scale: float
    alpha: float
    label: str


def _line_pair(vectors: Sequence[FockVector], alpha: float, label: str) -> DensityPair:
    """Quadrature densities of the two output states."""
    ncut = vectors[0].ncut
    matrix = np.stack([v.coeff for v in vectors], axis=1)
    top = max(v.significant_index() for v in vectors)
    half_width = min(QUADRATURE_LIMIT, math.sqrt(2.0 * top + 1.0) + LINE_MARGIN)

    def evaluate(x: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
        amplitudes = hermite_functions(ncut, x) @ matrix
        densities = np.abs(amplitudes) ** 2
        return densities[..., 0], densities[..., 1]

    return DensityPair(Domain.LINE, evaluate, -half_width, half_width, 0.5, alpha, label)


def _homodyne(spec: ReceiverSpec, alpha: float) -> DensityPair:
    mean = SQRT2 * alpha

    def evaluate(x: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
        x = np.asarray(x, dtype=float)
        return (np.exp(-(x - mean) ** 2) / math.sqrt(math.pi),
                np.exp(-(x + mean) ** 2) / math.sqrt(math.pi))

    half_width = mean + LINE_MARGIN
    return DensityPair(Domain.LINE, evaluate, -half_width, half_width, 0.5, alpha, spec.label)


def _rotation_homodyne(spec: ReceiverSpec, alpha: float) -> DensityPair:
    ncut = max(spec.rotation.ncut, truncation_for(alpha))
    rotation = spec.rotation.padded(ncut)
    outputs = [apply_projector_rotation(coherent_fock(sign * alpha, ncut), rotation)
               for sign in (1.0, -1.0)]
    return _line_pair(outputs, alpha, spec.label)


def _legendre(spec: ReceiverSpec, alpha: float) -> DensityPair:
    ncut = truncation_for(alpha)
    matrix = np.stack([coherent_fock(sign * alpha, ncut).coeff.real for sign in (1.0, -1.0)], axis=1)

    def evaluate(s: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
        densities = (legendre_normalized(ncut, s) @ matrix) ** 2
        return densities[..., 0], densities[..., 1]

    return DensityPair(Domain.INTERVAL_S, evaluate, -1.0, 1.0, 0.1, alpha, spec.label)


def _laguerre(spec: ReceiverSpec, alpha: float) -> DensityPair:
    ncut = truncation_for(alpha)
    nu = float(spec.nu)
    matrix = np.stack([coherent_fock(sign * alpha, ncut).coeff.real for sign in (1.0, -1.0)], axis=1)

    def evaluate(r: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
        densities = (laguerre_functions(ncut, nu, r) @ matrix) ** 2
        return densities[..., 0], densities[..., 1]

    r_max = 4.0 * ncut + 50.0
    return DensityPair(Domain.HALFLINE_R, evaluate, 0.0, r_max, 1.0, alpha, spec.label)


def _pacs(spec: ReceiverSpec, alpha: float) -> DensityPair:
    n = int(spec.n_add)

    def evaluate(beta: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
        return pacs_overlap_sq(alpha, n, beta), pacs_overlap_sq(-alpha, n, beta)

    radius = alpha + PACS_MARGIN + math.sqrt(2.0 * n)
    return DensityPair(Domain.PLANE_BETA, evaluate, 0.0, radius, 0.5, alpha, spec.label)


def cpg_density(x: np.ndarray, center: float, gamma: float) -> np.ndarray:
    """
    Quadrature density of a cubic-phase-gated coherent state centred at ``center``.

    psi(x) = (4 pi)^(1/4) (3g)^(-1/3) e^(u/(6g) + 1/(108 g^2)) Ai((3g)^(-1/3)(u + 1/(12g)))
    with u = x - center. For positive Airy arguments the exponentials are merged
    with the scaled Airy function so nothing overflows at small g.
    """
    u = np.asarray(x, dtype=float) - center
    scale = (3.0 * gamma) ** (-1.0 / 3.0)
    z = scale * (u + 1.0 / (12.0 * gamma))
    log_amplitude = 0.25 * math.log(4.0 * math.pi) + math.log(scale) + u / (6.0 * gamma) + 1.0 / (108.0 * gamma ** 2)
    zeta = 2.0 / 3.0 * np.clip(z, 0.0, None) ** 1.5
    airy = airy_ai_scaled(z)
    return np.exp(2.0 * (log_amplitude - zeta)) * airy ** 2


def _cpg(spec: ReceiverSpec, alpha: float) -> DensityPair:
    gamma = float(spec.gamma)
    mean = SQRT2 * alpha

    def evaluate(x: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
        return cpg_density(x, mean, gamma), cpg_density(x, -mean, gamma)

    reach = 12.0 + 40.0 * gamma ** (1.0 / 3.0)
    feature = 0.5 * min(1.0, (3.0 * gamma) ** (1.0 / 3.0))
    return DensityPair(Domain.LINE, evaluate, -mean - reach, mean + reach, feature, alpha, spec.label)


_BUILDERS = {
    Family.HOMODYNE: _homodyne,
    Family.ROTATION_HOMODYNE: _rotation_homodyne,
    Family.LEGENDRE: _legendre,
    Family.LAGUERRE: _laguerre,
    Family.PACS: _pacs,
    Family.CPG: _cpg,
}


def build_density(spec: ReceiverSpec, alpha: float) -> DensityPair:
    """
    Outcome densities of ``spec`` for the signals |+alpha> and |-alpha>.

    Args:
        spec: Receiver description
        alpha: Real amplitude, alpha >= 0

    Returns:
        DensityPair over the family's outcome domain
    """
    alpha = real_amplitude(alpha)
    if alpha < 0.0:
        raise DomainError(f"build_density needs alpha >= 0, got {alpha}")
    return _BUILDERS[spec.family](spec, alpha)


def _plane_rule(radius: float, radial_panels: int = 32, angles: int = 256) -> Tuple[np.ndarray, np.ndarray]:
    """Polar product rule on the disk: Gauss-Legendre in r, trapezoid in angle."""
    nodes, weights = gauss_legendre_rule(32)
    edges = np.linspace(0.0, radius, radial_panels + 1)
    half = 0.5 * np.diff(edges)
    r = (0.5 * (edges[:-1] + edges[1:])[:, None] + half[:, None] * nodes).reshape(-1)
    wr = (half[:, None] * weights).reshape(-1)
    phi = 2.0 * math.pi * np.arange(angles) / angles
    points = (r[:, None] * np.exp(1j * phi)[None, :]).reshape(-1)
    w = (wr[:, None] * r[:, None] * np.full(angles, 2.0 * math.pi / angles)[None, :]).reshape(-1)
    return points, w


def normalization_check(pair: DensityPair) -> float:
    """
    Largest deviation of either density's integral from 1.

    Reference rules: composite 32-point Gauss-Legendre on line and half-line
    windows, a single 512-point Gauss-Legendre rule on [-1, 1], and a polar
    product grid on the plane.
    """
    if pair.domain is Domain.PLANE_BETA:
        points, weights = _plane_rule(pair.hi)
        rho_plus, rho_minus = pair.eval(points)
        totals = (float(np.dot(weights, rho_plus)), float(np.dot(weights, rho_minus)))
        return max(abs(t - 1.0) for t in totals)

    domain = EvalDomain(pair.lo, pair.hi)
    if pair.domain is Domain.INTERVAL_S:
        panels, order = 1, 512
    else:
        panels, order = max(64, math.ceil(domain.width / pair.feature_scale)), 32
    totals = [
        fixed_quadrature(lambda x, k=k: pair.eval(x)[k], domain, panels=panels, order=order)
        for k in (0, 1)
    ]
    return max(abs(t - 1.0) for t in totals)


def partial_vacuum_mass(a: float) -> float:
    """
    Probability that homodyne detection of the vacuum lands in [-a, a].

    Equals erf(a) and stays strictly below 1 for finite a, so no bounded
    quadrature window reproduces the vacuum projector.
    """
    if not a > 0.0:
        raise DomainError(f"partial_vacuum_mass needs a > 0, got {a}")
    return erf(a)


def partial_heterodyne_mass(n: int, radius: float) -> float:
    """(1/pi) integral of |<n|beta>|^2 over the disk |beta| <= radius: P(n+1, radius^2)."""
    if not radius > 0.0:
        raise DomainError(f"partial_heterodyne_mass needs radius > 0, got {radius}")
    return float(gammainc(int(n) + 1, radius ** 2))


def rotation_correction(x: Union[float, np.ndarray], alpha: float, psi: FockVector) -> Union[float, np.ndarray]:
    """
    Interference term F(x, alpha, psi) of a single projector rotation.

    F = |<psi|alpha>|^2 |<x|psi>|^2 - Re[<x|alpha> conj(<psi|alpha> <x|psi>)].
    With real overlaps the rotated density is |<x|alpha>|^2 + 2(1 - cos theta) F.
    """
    ncut = max(psi.ncut, truncation_for(alpha))
    psi = psi.padded(ncut)
    signal = coherent_fock(alpha, ncut)
    psi_alpha = complex(np.vdot(psi.coeff, signal.coeff))
    x_alpha = quad_overlap(x, signal)
    x_psi = quad_overlap(x, psi)
    value = abs(psi_alpha) ** 2 * np.abs(x_psi) ** 2 - np.real(x_alpha * np.conj(psi_alpha * x_psi))
    return float(value) if np.ndim(value) == 0 else value


def rotation_receiver(kind: Union[RotationKind, str], alpha: float, beta: Optional[float] = None,
                      thetas: Optional[Sequence[float]] = None,
                      fock_set: Optional[Sequence[int]] = None) -> ReceiverSpec:
    """
    Projector-rotation receiver sized for signals of amplitude ``alpha``.

    Cat and coherent rotations take ``beta`` (theta is pi); Fock rotations take
    ``fock_set`` and optional ``thetas`` (default all pi).
    """
    kind = RotationKind(kind)
    if kind in (RotationKind.CAT, RotationKind.COHERENT):
        if beta is None:
            raise SpecError(f"{kind.value} rotation needs beta")
        ncut = truncation_for(alpha, beta)
        build = cat_rotation if kind is RotationKind.CAT else coherent_rotation
        rotation = build(beta, ncut)
    elif kind is RotationKind.FOCK:
        if not fock_set:
            raise SpecError("fock rotation needs a Fock set")
        rotation = fock_rotation(fock_set, thetas, truncation_for(alpha))
    else:
        raise SpecError("custom rotations are built directly as RotationSpec")
    return ReceiverSpec(Family.ROTATION_HOMODYNE, rotation=rotation)


def heterodyne() -> ReceiverSpec:
    """Heterodyne detection, the n = 0 member of the PACS family."""
    return ReceiverSpec(Family.PACS, n_add=0)
