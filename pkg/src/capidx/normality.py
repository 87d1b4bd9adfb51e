"""Chi-square goodness-of-fit screen against a plug-in normal.

Advisory preprocessing for the estimate workflow: equal-width histogram
classes, expected counts from N(xbar, s_{n-1}), adjacent classes merged
until every expected count reaches 5, degrees of freedom = classes - 3
(two estimated parameters).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy.stats import chi2, norm

from .errors import DomainError


@dataclass(frozen=True)
class NormalityResult:
    statistic: float
    dof: int
    p_value: float
    bins_used: int
    conclusive: bool


def chi_square_normality_test(
    sample: Sequence[float], bins: int | None = None
) -> NormalityResult:
    """Goodness-of-fit p-value of the sample against a fitted normal.

    bins defaults to ceil(sqrt(n)).  If merging leaves fewer than four
    classes the screen cannot allocate a positive degree of freedom and
    the result is flagged inconclusive (p_value = nan).
    """
    x = np.asarray(sample, dtype=float)
    n = x.size
    if n < 20:
        raise DomainError(f"normality screen needs n >= 20, got {n}")
    s = x.std(ddof=1)
    if not s > 0:
        raise DomainError("degenerate sample: zero standard deviation")
    if bins is None:
        bins = int(np.ceil(np.sqrt(n)))
    if bins < 2:
        raise DomainError("need at least 2 histogram classes")

    edges = np.linspace(x.min(), x.max(), bins + 1)
    observed, _ = np.histogram(x, edges)
    cdf = norm.cdf(edges, loc=x.mean(), scale=s)
    cdf[0], cdf[-1] = 0.0, 1.0  # open-ended extreme classes
    expected = n * np.diff(cdf)

    merged_obs: list[float] = []
    merged_exp: list[float] = []
    acc_o = acc_e = 0.0
    for o, e in zip(observed, expected):
        acc_o += o
        acc_e += e
        if acc_e >= 5.0:
            merged_obs.append(acc_o)
            merged_exp.append(acc_e)
            acc_o = acc_e = 0.0
    if acc_e > 0 and merged_exp:
        merged_obs[-1] += acc_o
        merged_exp[-1] += acc_e

    k = len(merged_exp)
    if k < 4:
        return NormalityResult(
            statistic=float("nan"),
            dof=0,
            p_value=float("nan"),
            bins_used=k,
            conclusive=False,
        )
    obs = np.array(merged_obs)
    exp = np.array(merged_exp)
    stat = float(np.sum((obs - exp) ** 2 / exp))
    dof = k - 3
    return NormalityResult(
        statistic=stat,
        dof=dof,
        p_value=float(chi2.sf(stat, dof)),
        bins_used=k,
        conclusive=True,
    )
