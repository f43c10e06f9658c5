"""
Stellar-rank metadata for each receiver family and a constructive rank check
for photon-added coherent states.
"""
import math
from dataclasses import dataclass
from enum import Enum
from typing import Callable, Dict, List, Optional, Tuple

import numpy as np

from .errors import DomainError, RangeError
from .receivers import Family, ReceiverSpec, heterodyne, rotation_receiver
from .specfun import log_factorials
from .states import RotationKind, displaced_fock

PACS_RANK_MAX_N = 30
# extra Fock levels beyond n; coefficients up to degree n + PAD are exact
PAD = 8
COEFF_THRESHOLD = 1e-8


class RankKind(Enum):
    FINITE = "finite"
    INFINITE = "infinite"
    AT_LEAST_ONE = "at_least_one"


@dataclass(frozen=True)
class StellarRankLabel:
    kind: RankKind
    n: Optional[int] = None

    def __post_init__(self):
        if self.kind is RankKind.FINITE:
            if self.n is None or self.n < 0:
                raise DomainError(f"finite stellar rank needs n >= 0, got {self.n}")
        elif self.n is not None:
            raise DomainError(f"{self.kind.value} stellar rank carries no n")

    @classmethod
    def finite(cls, n: int) -> 'StellarRankLabel':
        return cls(RankKind.FINITE, int(n))

    @classmethod
    def infinite(cls) -> 'StellarRankLabel':
        return cls(RankKind.INFINITE)

    @classmethod
    def at_least_one(cls) -> 'StellarRankLabel':
        return cls(RankKind.AT_LEAST_ONE)

    @property
    def label(self) -> str:
        if self.kind is RankKind.FINITE:
            return str(self.n)
        return "∞" if self.kind is RankKind.INFINITE else "≥ 1"


def declared_rank(spec: ReceiverSpec) -> StellarRankLabel:
    """Maximum stellar rank of the receiver's POVM elements."""
    if spec.family is Family.HOMODYNE:
        return StellarRankLabel.finite(0)
    if spec.family is Family.PACS:
        return StellarRankLabel.finite(spec.n_add)
    if spec.family in (Family.CPG, Family.ROTATION_HOMODYNE):
        return StellarRankLabel.infinite()
    return StellarRankLabel.at_least_one()


def stellar_polynomial(n: int, beta: complex) -> np.ndarray:
    """
    Coefficients (lowest degree first) of the polynomial part of the stellar
    function of D(beta)|n>.

    The stellar function sum_m psi_m z^m / sqrt(m!) is multiplied by the
    series of e^(|beta|^2/2) e^(-beta z), which cancels the Gaussian factor.
    """
    ncut = int(n) + PAD
    psi = displaced_fock(beta, int(n), ncut).coeff
    logs = log_factorials(ncut)
    f = psi * np.exp(-0.5 * logs)
    beta = complex(beta)
    powers = np.cumprod(np.concatenate([[1.0 + 0j], np.full(ncut, -beta)]))
    g = math.exp(0.5 * abs(beta) ** 2) * powers * np.exp(-logs)
    return np.convolve(f, g)[:ncut + 1]


def pacs_rank_check(n: int, beta: complex) -> int:
    """
    Count the zeros of the stellar function of D(beta)|n>.

    Args:
        n: Number of photon additions, 0 <= n <= 30
        beta: Displacement

    Returns:
        Number of polynomial roots, which equals n

    Raises:
        RangeError: For n > 30, where the root count is ill-conditioned
    """
    if isinstance(n, bool) or int(n) != n or n < 0:
        raise DomainError(f"n must be a non-negative integer, got {n}")
    if n > PACS_RANK_MAX_N:
        raise RangeError(f"pacs_rank_check supports n <= {PACS_RANK_MAX_N}, got {n}")
    coeffs = stellar_polynomial(int(n), beta)
    significant = np.nonzero(np.abs(coeffs) > COEFF_THRESHOLD * np.max(np.abs(coeffs)))[0]
    degree = int(significant[-1])
    # numpy.roots wants the highest degree first
    return len(np.roots(coeffs[:degree + 1][::-1]))


@dataclass(frozen=True)
class TableRow:
    scheme: str
    povm: str
    rank: str
    near_optimal: bool
    representative: Callable[[], ReceiverSpec]

    def as_dict(self) -> Dict[str, str]:
        return {
            "scheme": self.scheme,
            "povm": self.povm,
            "stellar_rank": self.rank,
            "near_optimal": "Yes" if self.near_optimal else "No",
        }

    def consistent(self) -> bool:
        """Declared rank of the representative receiver agrees with the row symbol."""
        declared = declared_rank(self.representative())
        if self.rank == "n":
            return declared.kind is RankKind.FINITE
        return declared.label == self.rank


TABLE_I: Tuple[TableRow, ...] = (
    TableRow("Homodyne", "dx |x><x|", "0", False,
             lambda: ReceiverSpec(Family.HOMODYNE)),
    TableRow("Heterodyne", "d^2beta (1/pi) |beta><beta|", "0", False, heterodyne),
    TableRow("Photon-added coherent states", "d^2beta (1/pi) D(beta)^dagger |n><n| D(beta)", "n", False,
             lambda: ReceiverSpec(Family.PACS, n_add=1)),
    TableRow("Cubic phase gate + homodyne", "dx exp(-i gamma p^3) |x><x| exp(i gamma p^3)", "∞", False,
             lambda: ReceiverSpec(Family.CPG, gamma=0.1)),
    TableRow("Unitary Fock state rotation + homodyne", "dx U({|k>}, theta)^dagger |x><x| U({|k>}, theta)",
             "∞", True, lambda: rotation_receiver(RotationKind.FOCK, 1.0, fock_set=(1,))),
    TableRow("Unitary cat state rotation + homodyne",
             "dx U({|cat_k>}, theta)^dagger |x><x| U({|cat_k>}, theta)", "∞", True,
             lambda: rotation_receiver(RotationKind.CAT, 1.0, beta=1.0)),
    TableRow("Unitary coherent state rotation + homodyne",
             "dx U({|beta_k>}, theta)^dagger |x><x| U({|beta_k>}, theta)", "∞", True,
             lambda: rotation_receiver(RotationKind.COHERENT, 1.0, beta=1.0)),
    TableRow("Generalised Laguerre polynomial states", "dr |r;nu><r;nu|", "≥ 1", True,
             lambda: ReceiverSpec(Family.LAGUERRE, nu=10.0)),
    TableRow("Legendre polynomial states", "ds |s><s|", "≥ 1", True,
             lambda: ReceiverSpec(Family.LEGENDRE)),
)


def table_one() -> List[Dict[str, str]]:
    """Table rows in the fixed JSON schema printed by ``cvrx table1``."""
    return [row.as_dict() for row in TABLE_I]
