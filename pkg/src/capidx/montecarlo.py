"""Seeded Monte Carlo oracle for the estimator sampling distributions.

The simulator is the one route to the truth that shares nothing with the
analytic machinery: normal variates come from a counter-based Philox
stream through the inverse normal CDF, and the estimator is assembled
from raw sample statistics exactly as defined.  Fixed seed means
bit-identical results.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
from scipy.special import ndtri

from .errors import DomainError
from .estimators import EstimatorContext, Variant
from .indices import BilateralSpec, IndexParams, Side, ToleranceSpec

_CHUNK = 1 << 16


@dataclass(frozen=True)
class SimConfig:
    replications: int
    seed: int
    ctx: EstimatorContext
    ip: IndexParams

    def __post_init__(self) -> None:
        if self.replications < 1000:
            raise DomainError("comparison runs need at least 1000 replications")


@dataclass
class SimResult:
    empirical_mean: float
    empirical_second_moment: float
    se_mean: float
    se_second_moment: float
    histogram: list[tuple[float, float, float]]  # (bin_lo, bin_hi, mass)
    replications: int
    seed: int

    def to_json(self, **kwargs) -> str:
        payload = {
            "empirical_mean": self.empirical_mean,
            "empirical_second_moment": self.empirical_second_moment,
            "se_mean": self.se_mean,
            "se_second_moment": self.se_second_moment,
            "replications": self.replications,
            "seed": self.seed,
            "histogram": [list(b) for b in self.histogram],
        }
        return json.dumps(payload, **kwargs)


@lru_cache(maxsize=16)
def _sample_statistics(
    n: int, mu: float, sigma: float, replications: int, seed: int
) -> tuple[np.ndarray, np.ndarray]:
    """Per-replication (sample mean, sum of squared deviations).

    Generated chunk by chunk from a single Philox stream; the chunk size is
    fixed so results are independent of how the work is scheduled.  Cached
    because many estimator variants share the same underlying samples.
    """
    gen = np.random.Generator(np.random.Philox(seed))
    xbar = np.empty(replications)
    ss = np.empty(replications)
    done = 0
    while done < replications:
        m = min(_CHUNK, replications - done)
        draws = mu + sigma * ndtri(gen.random((m, n)))
        xb = draws.mean(axis=1)
        xbar[done : done + m] = xb
        ss[done : done + m] = np.sum((draws - xb[:, None]) ** 2, axis=1)
        done += m
    xbar.setflags(write=False)
    ss.setflags(write=False)
    return xbar, ss


def _estimator_values(cfg: SimConfig) -> np.ndarray:
    ctx, ip = cfg.ctx, cfg.ip
    p = ctx.process
    xbar, ss = _sample_statistics(ctx.n, p.mu, p.sigma, cfg.replications, cfg.seed)
    s2 = ss / (ctx.n if ctx.variant is Variant.DIV_N else ctx.n - 1)
    spec = ctx.spec
    if isinstance(spec, ToleranceSpec):
        if spec.side is Side.UPPER:
            a_star = np.maximum(xbar - spec.target, (spec.target - xbar) / spec.k)
        else:
            a_star = np.maximum((xbar - spec.target) / spec.k, spec.target - xbar)
        numer = spec.width - ip.u * a_star
        a_quad = a_star
    else:
        assert isinstance(spec, BilateralSpec)
        a_star = np.maximum(
            spec.d_star * (xbar - spec.target) / spec.d_u,
            spec.d_star * (spec.target - xbar) / spec.d_l,
        )
        numer = spec.d_star - ip.u * a_star
        a_quad = spec.d * a_star / spec.d_star
    return numer / (3.0 * np.sqrt(s2 + ip.v * a_quad**2))


def simulate_estimator(cfg: SimConfig, bins: int = 200) -> SimResult:
    """Simulate the estimator's sampling distribution under cfg."""
    values = _estimator_values(cfg)
    nrep = cfg.replications
    mean = float(values.mean())
    squares = values**2
    second = float(squares.mean())
    counts, edges = np.histogram(values, bins=bins)
    masses = counts / nrep
    return SimResult(
        empirical_mean=mean,
        empirical_second_moment=second,
        se_mean=float(values.std(ddof=1) / math.sqrt(nrep)),
        se_second_moment=float(squares.std(ddof=1) / math.sqrt(nrep)),
        histogram=[
            (float(lo), float(hi), float(m))
            for lo, hi, m in zip(edges[:-1], edges[1:], masses)
        ],
        replications=nrep,
        seed=cfg.seed,
    )


@dataclass
class Verdict:
    z_mean: float
    z_second_moment: float
    passed: bool
    ks_distance: float | None = None
    details: dict = field(default_factory=dict)


def compare_to_analytics(
    res: SimResult,
    analytic_mean: float,
    analytic_second: float,
    analytic_cdf=None,
    z_limit: float = 3.0,
) -> Verdict:
    """Score simulation against analytic moments: pass iff both z-scores are
    within z_limit.  With an analytic CDF, also report the sup distance
    between it and the histogram CDF at the bin edges."""
    if not (res.se_mean > 0 and res.se_second_moment > 0):
        raise DomainError("standard errors must be positive for a comparison")
    z_mean = (res.empirical_mean - analytic_mean) / res.se_mean
    z_second = (res.empirical_second_moment - analytic_second) / res.se_second_moment
    ks = None
    if analytic_cdf is not None:
        cum = 0.0
        ks = 0.0
        for _, hi, mass in res.histogram:
            cum += mass
            ks = max(ks, abs(cum - analytic_cdf(hi)))
    return Verdict(
        z_mean=float(z_mean),
        z_second_moment=float(z_second),
        passed=bool(abs(z_mean) <= z_limit and abs(z_second) <= z_limit),
        ks_distance=ks,
        details={
            "analytic_mean": analytic_mean,
            "analytic_second_moment": analytic_second,
        },
    )
