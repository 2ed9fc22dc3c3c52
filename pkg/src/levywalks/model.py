"""Walk parameters, dimension parity and the closed-form constants of the density formulas."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from functools import lru_cache

from .errors import DomainError

MAX_DIM = 25


class WalkKind(enum.Enum):
    STANDARD = "standard"
    UNDERSHOOT = "undershoot"
    OVERSHOOT = "overshoot"

    @classmethod
    def parse(cls, name: str | WalkKind) -> WalkKind:
        if isinstance(name, WalkKind):
            return name
        key = name.strip().lower()
        aliases = {"under": "undershoot", "over": "overshoot", "std": "standard"}
        key = aliases.get(key, key)
        try:
            return cls(key)
        except ValueError:
            raise DomainError(f"unknown walk kind {name!r}") from None

    @property
    def bounded(self) -> bool:
        """True when the limit density lives in the closed unit ball."""
        return self is not WalkKind.OVERSHOOT


class Parity(enum.Enum):
    ODD = "odd"    # d = 2n + 3
    EVEN = "even"  # d = 2n + 2


@dataclass(frozen=True)
class ModelParams:
    kind: WalkKind
    alpha: float
    dim: int
    n: int = field(init=False)
    parity: Parity = field(init=False)
    velocity: float = field(default=1.0, init=False)

    def __post_init__(self):
        if not isinstance(self.kind, WalkKind):
            object.__setattr__(self, "kind", WalkKind.parse(self.kind))
        alpha = float(self.alpha)
        if not (0.0 < alpha < 1.0) or math.isnan(alpha):
            raise DomainError(f"alpha must lie in the open interval (0, 1), got {self.alpha}")
        if int(self.dim) != self.dim or self.dim < 2:
            raise DomainError(f"dimension must be an integer >= 2, got {self.dim}")
        if self.dim > MAX_DIM:
            raise DomainError(f"dimension is capped at {MAX_DIM}, got {self.dim}")
        dim = int(self.dim)
        object.__setattr__(self, "alpha", alpha)
        object.__setattr__(self, "dim", dim)
        if dim % 2:
            object.__setattr__(self, "parity", Parity.ODD)
            object.__setattr__(self, "n", (dim - 3) // 2)
        else:
            object.__setattr__(self, "parity", Parity.EVEN)
            object.__setattr__(self, "n", (dim - 2) // 2)

    @property
    def hyper_c(self) -> float:
        """Third hypergeometric parameter, d/2."""
        return self.dim / 2.0


def make_params(kind: WalkKind | str, alpha: float, dim: int) -> ModelParams:
    return ModelParams(WalkKind.parse(kind), alpha, dim)


@lru_cache(maxsize=64)
def binomial_terms(n: int) -> tuple[tuple[int, int, int, int, int], ...]:
    """All (m1, m2, j1, j2, weight) with weight = C(n,m1)C(m1,j1)C(n,m2)C(m2,j2) 2^(m1+m2-j1-j2)."""
    if n < 0:
        raise DomainError(f"n must be >= 0, got {n}")
    single = single_terms(n)
    return tuple(
        (m1, m2, j1, j2, w1 * w2)
        for (m1, j1, w1) in single
        for (m2, j2, w2) in single
    )


@lru_cache(maxsize=64)
def single_terms(n: int) -> tuple[tuple[int, int, int], ...]:
    """All (m, j, weight) with weight = C(n,m) C(m,j) 2^(m-j), m = 0..n, j = 0..m."""
    if n < 0:
        raise DomainError(f"n must be >= 0, got {n}")
    return tuple(
        (m, j, math.comb(n, m) * math.comb(m, j) * 2 ** (m - j))
        for m in range(n + 1)
        for j in range(m + 1)
    )


def coeff_B1_B2(n: int, alpha: float, kind: WalkKind | str = WalkKind.STANDARD) -> tuple[float, float]:
    """Scalar values of the two binomial sums that normalise the odd-dimensional formulas.

    For the standard walk B1 is the plain four-index weight sum; for the
    undershooting and overshooting walks it is the two-index sum with the
    extra factor 1/(m + j + alpha + 1) (summation from m = 0).  B2 is shared.
    """
    kind = WalkKind.parse(kind)
    if not 0.0 < alpha < 1.0:
        raise DomainError(f"alpha must lie in (0, 1), got {alpha}")
    b2 = math.fsum(
        w / ((m1 + j1 + alpha + 1) * (m2 + j2 + alpha + 1))
        for (m1, m2, j1, j2, w) in binomial_terms(n)
    )
    if kind is WalkKind.STANDARD:
        b1 = math.fsum(float(w) for (*_, w) in binomial_terms(n))
    else:
        b1 = math.fsum(w / (m + j + alpha + 1) for (m, j, w) in single_terms(n))
    return b1, b2


def overshoot_constant(n: int, alpha: float, parity: Parity) -> float:
    """Prefactor c of the overshooting-walk transform.

    Equals cos(pi alpha / 2) times E|u_1|^alpha for the marginal u_1 of a
    uniform point on the sphere.
    """
    if not 0.0 < alpha < 1.0:
        raise DomainError(f"alpha must lie in (0, 1), got {alpha}")
    half = 1.5 if parity is Parity.ODD else 1.0
    num = math.cos(alpha * math.pi / 2) * math.gamma(2 - alpha) * math.gamma((1 + alpha) / 2) * math.gamma(half + n)
    den = (1 - alpha) * math.sqrt(math.pi) * math.gamma(1 - alpha) * math.gamma(half + alpha / 2 + n)
    return num / den


def projection_constant(n: int, parity: Parity) -> float:
    """Normalisation c_n of the marginal kernel (1 - u^2)^((d-3)/2) on [-1, 1]."""
    if n < 0:
        raise DomainError(f"n must be >= 0, got {n}")
    if parity is Parity.ODD:
        return math.gamma(n + 1.5) / (math.sqrt(math.pi) * math.gamma(n + 1))
    return math.gamma(n + 1) / (math.sqrt(math.pi) * math.gamma(n + 0.5))


def kernel_exponent(params: ModelParams) -> float:
    """Exponent (d - 3)/2 of the one-coordinate marginal of the uniform direction."""
    return (params.dim - 3) / 2.0


@dataclass(frozen=True)
class CoefficientSet:
    B1: float
    B2: float
    c_over: float
    c_proj: float
    terms: tuple


def coefficients(params: ModelParams) -> CoefficientSet:
    b1, b2 = coeff_B1_B2(params.n, params.alpha, params.kind)
    return CoefficientSet(
        B1=b1,
        B2=b2,
        c_over=overshoot_constant(params.n, params.alpha, params.parity),
        c_proj=projection_constant(params.n, params.parity),
        terms=binomial_terms(params.n),
    )
