"""Closed-form capability indices for unilateral and asymmetric tolerances.

Covers the classical bilateral family (Cp, Cpk, Cpm, Cpmk), the legacy
one-sided indices (Kane, Chan-Cheng-Spiring, Vannmann), the unilateral
family parameterized by an asymmetry ratio k, and the Chen-Pearn family
for asymmetric bilateral tolerances that the unilateral family reduces to.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

from .errors import DomainError


class Side(str, Enum):
    UPPER = "upper"
    LOWER = "lower"


@dataclass(frozen=True)
class ToleranceSpec:
    """One-sided tolerance: target, the single limit, and asymmetry ratio k.

    k >= 1 states how much less serious a drift away from the limit is
    considered compared to a drift toward it.  k = 1 is the symmetric
    boundary case.
    """

    target: float
    side: Side
    limit: float
    k: float = 1.0

    def __post_init__(self) -> None:
        if self.k < 1.0:
            raise DomainError(f"asymmetry ratio k must be >= 1, got {self.k}")
        if self.side is Side.UPPER and not self.limit > self.target:
            raise DomainError("upper tolerance requires limit > target")
        if self.side is Side.LOWER and not self.limit < self.target:
            raise DomainError("lower tolerance requires limit < target")

    @property
    def width(self) -> float:
        """Distance from target to the tolerance limit (U-T or T-L)."""
        return abs(self.limit - self.target)

    def penalized_deviation(self, mu: float) -> float:
        """Effective deviation A*: the serious direction counts fully, the
        other direction is discounted by k.  Zero exactly at mu = target
        (both max() branches vanish; no tie-break needed)."""
        if self.side is Side.UPPER:
            return max(mu - self.target, (self.target - mu) / self.k)
        return max((mu - self.target) / self.k, self.target - mu)


@dataclass(frozen=True)
class ProcessParams:
    """Normal process: mean mu and standard deviation sigma > 0."""

    mu: float
    sigma: float

    def __post_init__(self) -> None:
        if not self.sigma > 0:
            raise DomainError(f"sigma must be positive, got {self.sigma}")


@dataclass(frozen=True)
class BilateralSpec:
    """Two-sided tolerance interval [lower, upper] with interior target."""

    lower: float
    upper: float
    target: float

    def __post_init__(self) -> None:
        if not self.lower < self.target < self.upper:
            raise DomainError("bilateral spec requires lower < target < upper")

    @property
    def d(self) -> float:
        """Half-length of the tolerance interval."""
        return (self.upper - self.lower) / 2

    @property
    def d_u(self) -> float:
        return self.upper - self.target

    @property
    def d_l(self) -> float:
        return self.target - self.lower

    @property
    def d_star(self) -> float:
        """min(d_u, d_l), the binding half-tolerance."""
        return min(self.d_u, self.d_l)

    def penalized_deviation(self, mu: float) -> float:
        """A* = max(d*(mu-T)/d_u, d*(T-mu)/d_l)."""
        return max(
            self.d_star * (mu - self.target) / self.d_u,
            self.d_star * (self.target - mu) / self.d_l,
        )


@dataclass(frozen=True)
class IndexParams:
    """(u, v) couple; (0,0), (1,0), (0,1), (1,1) give the four named indices."""

    u: float = 0.0
    v: float = 0.0

    def __post_init__(self) -> None:
        if self.u < 0 or self.v < 0:
            raise DomainError("index parameters u, v must be >= 0")


CP_COUPLE = IndexParams(0.0, 0.0)
CPK_COUPLE = IndexParams(1.0, 0.0)
CPM_COUPLE = IndexParams(0.0, 1.0)
CPMK_COUPLE = IndexParams(1.0, 1.0)

NAMED_COUPLES = {
    "cp": CP_COUPLE,
    "cpk": CPK_COUPLE,
    "cpm": CPM_COUPLE,
    "cpmk": CPMK_COUPLE,
}


@dataclass(frozen=True)
class IndexReport:
    """The four unilateral indices for one side, with their building blocks.

    Invariants: cpk_side = (1-alpha)*cpu_or_cpl,
    cpm_side = cpu_or_cpl/sqrt(1+delta^2), cpmk_side = (1-alpha)*cpm_side.
    """

    side: Side
    cpu_or_cpl: float
    cpk_side: float
    cpm_side: float
    cpmk_side: float
    alpha: float
    delta: float
    a_star: float


def _clamped(value: float, clamp: bool) -> float:
    return max(0.0, value) if clamp else value


def classical_indices(
    p: ProcessParams, b: BilateralSpec, clamp: bool = False
) -> dict[str, float]:
    """Classical bilateral family Cp, Cpk, Cpm, Cpmk.

    Raw values are returned by default; clamp=True floors Cpk and Cpmk
    at zero (Kane's convention).
    """
    spread = math.sqrt(p.sigma**2 + (p.mu - b.target) ** 2)
    near = min(b.upper - p.mu, p.mu - b.lower)
    return {
        "cp": (b.upper - b.lower) / (6 * p.sigma),
        "cpk": _clamped(near / (3 * p.sigma), clamp),
        "cpm": (b.upper - b.lower) / (6 * spread),
        "cpmk": _clamped(near / (3 * spread), clamp),
    }


def unilateral_index(
    p: ProcessParams, t: ToleranceSpec, ip: IndexParams, clamp: bool = False
) -> float:
    """General unilateral index (width - u*A*) / (3*sqrt(sigma^2 + v*A*^2))."""
    a_star = t.penalized_deviation(p.mu)
    value = (t.width - ip.u * a_star) / (
        3 * math.sqrt(p.sigma**2 + ip.v * a_star**2)
    )
    return _clamped(value, clamp)


def unilateral_report(p: ProcessParams, t: ToleranceSpec) -> IndexReport:
    """All four unilateral indices plus alpha, delta and A* for one side."""
    a_star = t.penalized_deviation(p.mu)
    alpha = a_star / t.width
    delta = a_star / p.sigma
    cpu = t.width / (3 * p.sigma)
    cpm = cpu / math.sqrt(1 + delta**2)
    return IndexReport(
        side=t.side,
        cpu_or_cpl=cpu,
        cpk_side=(1 - alpha) * cpu,
        cpm_side=cpm,
        cpmk_side=(1 - alpha) * cpm,
        alpha=alpha,
        delta=delta,
        a_star=a_star,
    )


class LegacyFamily(str, Enum):
    KANE_CPU_CPL = "kane"
    KANE_STAR = "kane_star"
    CHAN_CPM_STAR = "chan_cpm_star"
    VANNMANN_CPMK_SIDE = "vannmann_cpmk"
    VANNMANN_CPA = "vannmann_cpa"
    VANNMANN_CPV = "vannmann_cpv"


def legacy_index(
    p: ProcessParams,
    t: ToleranceSpec,
    family: LegacyFamily,
    u: float = 0.0,
    v: float = 0.0,
) -> float:
    """Legacy one-sided indices.  Kane-style indices clamp at zero; the
    Vannmann (u, v) families return raw values."""
    mu, sigma = p.mu, p.sigma
    target = t.target
    dev = abs(mu - target)
    quad_spread = 3 * math.sqrt(sigma**2 + v * dev**2)
    full_spread = 3 * math.sqrt(sigma**2 + dev**2)
    upper = t.side is Side.UPPER

    if family is LegacyFamily.KANE_CPU_CPL:
        raw = (t.limit - mu) if upper else (mu - t.limit)
        return max(0.0, raw / (3 * sigma))
    if family is LegacyFamily.KANE_STAR:
        return max(0.0, (t.width - dev) / (3 * sigma))
    if family is LegacyFamily.CHAN_CPM_STAR:
        return t.width / full_spread
    if family is LegacyFamily.VANNMANN_CPMK_SIDE:
        raw = (t.limit - mu) if upper else (mu - t.limit)
        return raw / full_spread
    if family is LegacyFamily.VANNMANN_CPA:
        raw = (t.limit - mu) if upper else (mu - t.limit)
        return (raw - u * dev) / quad_spread
    if family is LegacyFamily.VANNMANN_CPV:
        return (t.width - u * dev) / quad_spread
    raise DomainError(f"unknown legacy family: {family}")


def chen_pearn_index(
    p: ProcessParams, b: BilateralSpec, ip: IndexParams, clamp: bool = False
) -> float:
    """Chen-Pearn asymmetric-tolerance index (d* - u*A*)/(3*sqrt(sigma^2 + v*A^2))
    with A = d*A*/d*."""
    a_star = b.penalized_deviation(p.mu)
    a = b.d * a_star / b.d_star
    value = (b.d_star - ip.u * a_star) / (3 * math.sqrt(p.sigma**2 + ip.v * a**2))
    return _clamped(value, clamp)


def embed_bilateral(t: ToleranceSpec) -> BilateralSpec:
    """Interpret the ratio k as an implied second limit: for an upper
    tolerance, a virtual lower limit with T - L = k(U - T) (and mirrored
    for a lower tolerance).  Under this embedding the unilateral index
    at (u, v) equals the Chen-Pearn index at (u, 4v/(1+k)^2)."""
    if t.side is Side.UPPER:
        return BilateralSpec(
            lower=t.target - t.k * (t.limit - t.target),
            upper=t.limit,
            target=t.target,
        )
    return BilateralSpec(
        lower=t.limit,
        upper=t.target + t.k * (t.target - t.limit),
        target=t.target,
    )


def reduced_v(v: float, k: float) -> float:
    """The v parameter after embedding: 4v/(1+k)^2."""
    return 4.0 * v / (1.0 + k) ** 2


def mean_position_from_ratio(h: float, t: ToleranceSpec) -> float:
    """Invert the ratio h = Cpk_side / Cp_side into the implied process mean,
    assuming the mean lies between the target and the limit.

    h = 1 puts the mean on the target, h = 0 on the tolerance limit.
    """
    if not 0.0 <= h <= 1.0:
        raise DomainError(f"ratio h must be in [0, 1], got {h}")
    if t.side is Side.UPPER:
        return t.limit - h * (t.limit - t.target)
    return t.limit + h * (t.target - t.limit)
