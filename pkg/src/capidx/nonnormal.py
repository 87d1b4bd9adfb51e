"""Percentile-based indices for non-normal processes and Shore's two-branch
quantile approximation.

The indices replace the mean by the median M and the natural variation
3*sigma by (U_p - M) or (M - L_p), where U_p and L_p are the 99.865th and
0.135th percentiles.  Shore's method identifies a closed-form quantile
curve from the complete moments of Z = ln(Y) (lower half) and the partial
moments of Y (upper half), giving far more stable extreme percentiles than
raw order statistics on moderate samples.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import Sequence

import numpy as np

from .errors import DegenerateFitError, DomainError
from .indices import IndexParams, Side, ToleranceSpec

UPPER_PCT = 0.99865
LOWER_PCT = 0.00135


@dataclass(frozen=True)
class PercentileSummary:
    """Median and extreme percentiles of a (possibly non-normal) process."""

    median: float
    upper_pct: float
    lower_pct: float

    def __post_init__(self) -> None:
        if not self.lower_pct < self.median < self.upper_pct:
            raise DomainError("require lower_pct < median < upper_pct")


@dataclass(frozen=True)
class ShoreFit:
    """Coefficients of Shore's quantile curve, fit from one sample.

    Lower branch (p < 1/2): Q_p = a1 * (p/(1-p))^b1.
    Upper branch (p >= 1/2): Q_p = a2 * ln(p/(1-p)) + b2.
    A usable monotone fit needs b1 > 0 and a2 > 0.
    """

    a1: float
    b1: float
    a2: float
    b2: float
    median: float
    n: int

    @property
    def degenerate(self) -> bool:
        return not (self.b1 > 0 and self.a2 > 0)


def nonnormal_unilateral_index(
    ps: PercentileSummary, t: ToleranceSpec, ip: IndexParams, clamp: bool = False
) -> float:
    """Percentile-based unilateral index.

    The half-spread toward the tolerance limit, (U_p - M)/3 or (M - L_p)/3,
    stands in for sigma; the median stands in for the mean everywhere else.
    """
    if t.side is Side.UPPER:
        spread = (ps.upper_pct - ps.median) / 3.0
    else:
        spread = (ps.median - ps.lower_pct) / 3.0
    if not spread > 0:
        raise DomainError("degenerate dispersion: extreme percentile on the "
                          "wrong side of the median")
    a_star = t.penalized_deviation(ps.median)
    value = (t.width - ip.u * a_star) / (
        3.0 * math.sqrt(spread**2 + ip.v * a_star**2)
    )
    return max(0.0, value) if clamp else value


def sample_median(sample: Sequence[float]) -> float:
    """Median; even samples average the two central order statistics."""
    return float(np.median(np.asarray(sample, dtype=float)))


def shore_fit(sample: Sequence[float]) -> ShoreFit:
    """Fit Shore's quantile coefficients from a sample of positive values.

    The branch moments are plug-in estimates over exactly half the sample
    mass: the lower n/2 order statistics feed the log-moments of the lower
    branch, the upper n/2 feed the partial moments of the upper branch.
    For odd n the central observation contributes half its 1/n mass to
    each branch.  (Splitting on "y >= median" instead breaks the moment
    identities whenever the median is tied, and does not reproduce
    published fits.)
    """
    y = np.sort(np.asarray(sample, dtype=float))
    n = y.size
    if n < 4:
        raise DomainError(f"shore_fit needs at least 4 observations, got {n}")
    if np.any(y <= 0):
        raise DomainError("shore_fit requires strictly positive observations")

    median = sample_median(y)
    # Mass weights of each order statistic in the lower branch (total 1/2).
    w_low = np.zeros(n)
    w_low[: n // 2] = 1.0
    if n % 2:
        w_low[n // 2] = 0.5
    w_up = 1.0 - w_low

    logs = np.log(y)
    mu1 = float(np.sum(w_low * logs)) / n
    mu2 = float(np.sum(w_low * logs**2)) / n
    m1 = float(np.sum(w_up * y)) / n
    m2 = float(np.sum(w_up * y**2)) / n

    rad_b1 = 0.5 * mu2 - mu1**2
    if not rad_b1 > 0:
        raise DegenerateFitError("zero or negative radicand in the lower-branch "
                                 "coefficient (sample has no lower-half spread)")
    b1 = 1.7099 * math.sqrt(rad_b1)
    a1 = math.exp(2.0 * (mu1 + 0.6931 * b1))

    rad_a2 = m2 - 2.0 * m1**2
    if not rad_a2 > 0:
        raise DegenerateFitError("zero or negative radicand in the upper-branch "
                                 "coefficient (sample has no upper-half spread)")
    # a2 enters the partial-moment identities quadratically:
    # M2 - 2*M1^2 = 0.6840 * a2^2.
    a2 = math.sqrt(rad_a2 / 0.6840)
    b2 = 2.0 * (m1 - 0.6931 * a2)
    return ShoreFit(a1=a1, b1=b1, a2=a2, b2=b2, median=median, n=n)


def shore_quantile(fit: ShoreFit, p: float) -> float:
    """Evaluate the fitted quantile curve at probability p.

    The two branches meet the data through different moments and are not
    continuous at p = 1/2 in general; each query uses strictly the branch
    its p dictates.
    """
    if not 0.0 < p < 1.0:
        raise DomainError(f"probability must be in (0, 1), got {p}")
    odds = p / (1.0 - p)
    if p < 0.5:
        return fit.a1 * odds**fit.b1
    return fit.a2 * math.log(odds) + fit.b2


class QuantileMethod(str, Enum):
    SHORE = "shore"
    EMPIRICAL = "empirical"


def summarize_sample(
    sample: Sequence[float], method: QuantileMethod = QuantileMethod.SHORE
) -> PercentileSummary:
    """Median plus the 0.135/99.865 percentiles by the chosen method.

    Empirical percentiles use linear interpolation between order
    statistics; on samples far smaller than ~1/0.00135 they collapse to
    the extreme observations.
    """
    y = np.asarray(sample, dtype=float)
    if y.size < 4:
        raise DomainError(f"need at least 4 observations, got {y.size}")
    if method is QuantileMethod.SHORE:
        fit = shore_fit(y)
        return PercentileSummary(
            median=fit.median,
            upper_pct=shore_quantile(fit, UPPER_PCT),
            lower_pct=shore_quantile(fit, LOWER_PCT),
        )
    return PercentileSummary(
        median=sample_median(y),
        upper_pct=float(np.quantile(y, UPPER_PCT)),
        lower_pct=float(np.quantile(y, LOWER_PCT)),
    )
