"""
Truncated Fock-space states and the projector-rotation unitary.

Amplitudes are real (BPSK alphabet {|a>, |-a>}); complex amplitudes are only
accepted where a displacement in the plane is genuinely needed.
"""
import cmath
import itertools
import math
from dataclasses import dataclass
from enum import Enum
from typing import Dict, Optional, Sequence, Tuple, Union

import numpy as np
from scipy.special import xlogy

from .errors import DomainError, InvariantError, RangeError, ShapeError, TruncationError
from .specfun import hermite_functions, laguerre_gen, log_factorial, log_factorials

MIN_NCUT = 32
TAIL_TOLERANCE = 1e-12
NORM_TOLERANCE = 1e-10
QUADRATURE_LIMIT = 40.0
PACS_MAX_N = 60


def truncation_for(*amplitudes: float) -> int:
    """
    Fock cutoff that keeps the Poisson tail of every amplitude below 1e-12.

    ncut = max(32, ceil(mu + 12 sqrt(mu) + 12)) with mu the largest |amplitude|^2.
    """
    mu = max((abs(a) ** 2 for a in amplitudes), default=0.0)
    return max(MIN_NCUT, math.ceil(mu + 12.0 * math.sqrt(mu) + 12.0))


def real_amplitude(alpha: Union[float, complex], name: str = "alpha") -> float:
    """Reject complex or non-finite amplitudes at the boundary."""
    if isinstance(alpha, (complex, np.complexfloating)):
        if alpha.imag != 0.0:
            raise DomainError(f"{name} must be real, got {alpha}")
        alpha = alpha.real
    value = float(alpha)
    if not math.isfinite(value):
        raise DomainError(f"{name} must be finite, got {alpha}")
    return value


@dataclass(frozen=True, eq=False)
class FockVector:
    """Immutable amplitude vector over number states |0>..|ncut>."""
    coeff: np.ndarray

    def __post_init__(self):
        coeff = np.array(self.coeff, dtype=complex).reshape(-1)
        if coeff.size == 0:
            raise ShapeError("FockVector needs at least one amplitude")
        if not np.all(np.isfinite(coeff)):
            raise InvariantError("FockVector amplitudes must be finite")
        coeff.flags.writeable = False
        object.__setattr__(self, 'coeff', coeff)

    @property
    def ncut(self) -> int:
        return self.coeff.size - 1

    def norm(self) -> float:
        return float(np.linalg.norm(self.coeff))

    def padded(self, ncut: int) -> 'FockVector':
        """Zero-extend to a larger cutoff."""
        if ncut < self.ncut:
            raise ShapeError(f"Cannot pad a cutoff-{self.ncut} vector down to {ncut}")
        if ncut == self.ncut:
            return self
        return FockVector(np.concatenate([self.coeff, np.zeros(ncut - self.ncut)]))

    def significant_index(self, threshold: float = 1e-15) -> int:
        """Largest n with |c_n| above threshold (0 for the vacuum)."""
        above = np.nonzero(np.abs(self.coeff) > threshold)[0]
        return int(above[-1]) if above.size else 0


@dataclass(frozen=True)
class CatParams:
    beta: float
    phi: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, 'beta', real_amplitude(self.beta, "beta"))
        if not math.isfinite(self.phi):
            raise InvariantError(f"cat phase must be finite, got {self.phi}")
        if not self.denominator() > 0.0:
            raise InvariantError(
                f"cat(beta={self.beta}, phi={self.phi}) has a vanishing normalization")

    def denominator(self) -> float:
        """2(1 + e^(-2 beta^2) cos phi), written to avoid cancellation near phi = pi."""
        cos_phi = math.cos(self.phi)
        return 2.0 * ((1.0 + cos_phi) + math.expm1(-2.0 * self.beta ** 2) * cos_phi)


def _coherent_coefficients(alpha: float, ncut: int) -> np.ndarray:
    """e^(-a^2/2) a^n / sqrt(n!) assembled in log space."""
    coeff = np.zeros(ncut + 1)
    if alpha == 0.0:
        coeff[0] = 1.0
        return coeff
    n = np.arange(ncut + 1)
    logs = -0.5 * alpha ** 2 + n * math.log(abs(alpha)) - 0.5 * log_factorials(ncut)
    coeff = np.exp(logs)
    if alpha < 0.0:
        coeff *= (-1.0) ** n
    return coeff


def _check_tail(coeff: np.ndarray, amplitude: float, ncut: int) -> None:
    tail = 1.0 - float(np.sum(np.abs(coeff) ** 2))
    if tail > TAIL_TOLERANCE:
        raise TruncationError(
            f"ncut={ncut} leaves tail mass {tail:.3g} for amplitude {amplitude}; "
            f"use ncut >= {truncation_for(amplitude)}")


def coherent_fock(alpha: float, ncut: Optional[int] = None) -> FockVector:
    """
    Coherent state |alpha> for real alpha.

    Args:
        alpha: Real amplitude
        ncut: Cutoff, defaults to truncation_for(alpha)

    Raises:
        DomainError: For complex alpha
        TruncationError: If the tail beyond ncut exceeds 1e-12
    """
    alpha = real_amplitude(alpha)
    ncut = truncation_for(alpha) if ncut is None else _check_ncut(ncut)
    coeff = _coherent_coefficients(alpha, ncut)
    _check_tail(coeff, alpha, ncut)
    return FockVector(coeff)


def cat_fock(params: CatParams, ncut: Optional[int] = None) -> FockVector:
    """Normalized (|beta> + e^(i phi)|-beta>) / sqrt(2(1 + e^(-2 beta^2) cos phi))."""
    ncut = truncation_for(params.beta) if ncut is None else _check_ncut(ncut)
    base = _coherent_coefficients(params.beta, ncut)
    _check_tail(base, params.beta, ncut)
    parity = (-1.0) ** np.arange(ncut + 1)
    branch = 1.0 + cmath.exp(1j * params.phi) * parity
    return FockVector(base * branch / math.sqrt(params.denominator()))


def _check_ncut(ncut: int) -> int:
    if isinstance(ncut, bool) or int(ncut) != ncut or ncut < 0:
        raise DomainError(f"ncut must be a non-negative integer, got {ncut}")
    return int(ncut)


def fock_basis(n: int, ncut: int) -> FockVector:
    """Number state |n> inside a cutoff-ncut space."""
    ncut = _check_ncut(ncut)
    if isinstance(n, bool) or int(n) != n or n < 0 or n > ncut:
        raise DomainError(f"Fock index must satisfy 0 <= n <= {ncut}, got {n}")
    coeff = np.zeros(ncut + 1)
    coeff[int(n)] = 1.0
    return FockVector(coeff)


def displaced_fock(beta: complex, n: int, ncut: int) -> FockVector:
    """
    D(beta)|n> from the displacement matrix elements.

    <m|D(beta)|n> = sqrt(n!/m!) beta^(m-n) e^(-|beta|^2/2) L_n^(m-n)(|beta|^2) for m >= n,
    and sqrt(m!/n!) (-beta*)^(n-m) e^(-|beta|^2/2) L_m^(n-m)(|beta|^2) for m < n.
    """
    ncut = _check_ncut(ncut)
    if n > ncut:
        raise DomainError(f"displaced_fock needs n <= ncut, got n={n}, ncut={ncut}")
    beta = complex(beta)
    r2 = abs(beta) ** 2
    logs = log_factorials(ncut)
    coeff = np.empty(ncut + 1, dtype=complex)
    for m in range(ncut + 1):
        if m >= n:
            scale = math.exp(0.5 * (logs[n] - logs[m]) - 0.5 * r2)
            coeff[m] = scale * beta ** (m - n) * laguerre_gen(n, m - n, r2)
        else:
            scale = math.exp(0.5 * (logs[m] - logs[n]) - 0.5 * r2)
            coeff[m] = scale * (-beta.conjugate()) ** (n - m) * laguerre_gen(m, n - m, r2)
    return FockVector(coeff)


def inner(u: FockVector, v: FockVector) -> complex:
    """<u|v>, conjugating the first argument."""
    if u.ncut != v.ncut:
        raise ShapeError(f"inner product of cutoffs {u.ncut} and {v.ncut}")
    return complex(np.vdot(u.coeff, v.coeff))


class RotationKind(Enum):
    FOCK = "fock"
    CAT = "cat"
    COHERENT = "coherent"
    CUSTOM = "custom"


@dataclass(frozen=True, eq=False)
class RotationSpec:
    """
    Rotation states |psi_k> and angles theta_k of U = prod_k exp(-i theta_k |psi_k><psi_k|).

    ``kind``, ``beta`` and ``fock_set`` record how the states were built so the
    rotation can be rebuilt at another cutoff or reported.
    """
    states: Tuple[FockVector, ...]
    thetas: Tuple[float, ...]
    kind: RotationKind = RotationKind.CUSTOM
    beta: Optional[float] = None
    fock_set: Optional[Tuple[int, ...]] = None

    def __post_init__(self):
        states = tuple(self.states)
        thetas = tuple(float(t) for t in self.thetas)
        object.__setattr__(self, 'states', states)
        object.__setattr__(self, 'thetas', thetas)
        if not states:
            raise InvariantError("RotationSpec needs at least one rotation state")
        if len(states) != len(thetas):
            raise InvariantError(f"{len(states)} rotation states but {len(thetas)} angles")
        if not all(math.isfinite(t) for t in thetas):
            raise InvariantError("rotation angles must be finite")
        if len({s.ncut for s in states}) != 1:
            raise ShapeError("rotation states must share one cutoff")
        for k, psi in enumerate(states):
            if abs(psi.norm() - 1.0) > NORM_TOLERANCE:
                raise InvariantError(f"rotation state {k} has norm {psi.norm():.12g}, expected 1")

    @property
    def ncut(self) -> int:
        return self.states[0].ncut

    def padded(self, ncut: int) -> 'RotationSpec':
        if ncut == self.ncut:
            return self
        return RotationSpec(tuple(s.padded(ncut) for s in self.states), self.thetas,
                            self.kind, self.beta, self.fock_set)

    def describe(self) -> Dict[str, object]:
        """Parameters as a plain dict for reports."""
        params: Dict[str, object] = {"rotation": self.kind.value, "theta": list(self.thetas)}
        if self.beta is not None:
            params["beta"] = self.beta
        if self.fock_set is not None:
            params["fock_set"] = list(self.fock_set)
        return params


def fock_rotation(fock_set: Sequence[int], thetas: Optional[Sequence[float]] = None,
                  ncut: int = MIN_NCUT) -> RotationSpec:
    """Rotation by mutually orthogonal number states; angles default to pi."""
    fock_set = tuple(int(n) for n in fock_set)
    if not fock_set or len(set(fock_set)) != len(fock_set):
        raise DomainError(f"Fock set must be non-empty without repeats, got {fock_set}")
    thetas = tuple(math.pi for _ in fock_set) if thetas is None else tuple(thetas)
    ncut = max(_check_ncut(ncut), max(fock_set))
    return RotationSpec(tuple(fock_basis(n, ncut) for n in fock_set), thetas,
                        RotationKind.FOCK, fock_set=fock_set)


def cat_rotation(beta: float, ncut: Optional[int] = None, phi: float = 0.0) -> RotationSpec:
    """Single even-cat rotation state with theta fixed at pi."""
    params = CatParams(beta, phi)
    return RotationSpec((cat_fock(params, ncut),), (math.pi,), RotationKind.CAT, beta=params.beta)


def coherent_rotation(beta: float, ncut: Optional[int] = None) -> RotationSpec:
    """Single coherent rotation state with theta fixed at pi."""
    beta = real_amplitude(beta, "beta")
    return RotationSpec((coherent_fock(beta, ncut),), (math.pi,), RotationKind.COHERENT, beta=beta)


def apply_projector_rotation(state: FockVector, rot: RotationSpec) -> FockVector:
    """
    Apply U = U_0 U_1 ... U_N to a state, rightmost factor first.

    Each factor is the rank-one update state + (e^(-i theta_k) - 1)<psi_k|state>|psi_k>.
    Zero angles are skipped, so the identity rotation returns the input exactly.
    """
    if state.ncut != rot.ncut:
        raise ShapeError(f"state cutoff {state.ncut} differs from rotation cutoff {rot.ncut}")
    out = state.coeff.copy()
    for psi, theta in zip(reversed(rot.states), reversed(rot.thetas)):
        if theta == 0.0:
            continue
        overlap = np.vdot(psi.coeff, out)
        out = out + (cmath.exp(-1j * theta) - 1.0) * overlap * psi.coeff
    return FockVector(out)


def rotation_by_index_expansion(state: FockVector, rot: RotationSpec) -> FockVector:
    """
    Reference evaluation of the rotation as a sum over ordered index subsets.

    U|s> = |s> + sum over increasing index tuples (k_0 < ... < k_j) of
    z_k0 P_k0 z_k1 P_k1 ... z_kj P_kj |s>, with z_k = e^(-i theta_k) - 1 and
    P_k = |psi_k><psi_k|. There are C(N+1, j+1) tuples of each length.
    Cost is exponential in N; use apply_projector_rotation for real work.
    """
    if state.ncut != rot.ncut:
        raise ShapeError(f"state cutoff {state.ncut} differs from rotation cutoff {rot.ncut}")
    zetas = [cmath.exp(-1j * theta) - 1.0 for theta in rot.thetas]
    total = state.coeff.copy()
    size = len(rot.states)
    for length in range(1, size + 1):
        for sigma in itertools.combinations(range(size), length):
            term = state.coeff.copy()
            for k in reversed(sigma):
                psi = rot.states[k].coeff
                term = zetas[k] * np.vdot(psi, term) * psi
            total = total + term
    return FockVector(total)


def quad_overlap(x: Union[float, np.ndarray], v: FockVector) -> Union[complex, np.ndarray]:
    """
    Position wavefunction <x|v> = sum_n v_n <x|n>.

    Raises:
        RangeError: If any |x| > 40
    """
    xs = np.asarray(x, dtype=float)
    if np.any(np.isnan(xs)) or np.any(np.abs(xs) > QUADRATURE_LIMIT):
        raise RangeError(f"quad_overlap is supported for |x| <= {QUADRATURE_LIMIT}")
    values = hermite_functions(v.ncut, xs) @ v.coeff
    return complex(values) if xs.ndim == 0 else values


def pacs_overlap_sq(alpha_signed: float, n: int, beta: Union[complex, np.ndarray]) -> Union[float, np.ndarray]:
    """
    PACS outcome density (1/pi)|<n|D(beta)^dagger|alpha>|^2 = e^(-|a-b|^2)|a-b|^(2n) / (pi n!).

    Raises:
        RangeError: If n > 60
    """
    if isinstance(n, bool) or int(n) != n or n < 0:
        raise DomainError(f"photon-addition number must be a non-negative integer, got {n}")
    if n > PACS_MAX_N:
        raise RangeError(f"PACS photon number {n} exceeds {PACS_MAX_N}")
    alpha = real_amplitude(alpha_signed)
    betas = np.asarray(beta, dtype=complex)
    d2 = np.abs(alpha - betas) ** 2
    with np.errstate(divide='ignore'):
        values = np.exp(-d2 + xlogy(int(n), d2) - log_factorial(int(n))) / math.pi
    return float(values) if betas.ndim == 0 else values
