"""Exact sampling densities and moments of the natural capability-index
estimators.

The estimator of a unilateral index replaces (mu, sigma^2) by the sample
mean and either S_n^2 (divide by n) or S_{n-1}^2.  Writing
K = n*S_n^2/sigma^2 ~ chi^2(n-1) independent of Y = (sqrt(n)*A-hat/sigma)^2,
the estimator is (B - u*sqrt(Y)) / (3*sqrt(K + v*Y)) with B the
standardized distance to the limit.  Densities follow by conditioning on Y
(one-dimensional quadrature); raw moments follow from a hypergeometric
double series, with fast closed forms for the (0,0) and (1,0) couples.

The two variants are algebraically linked:
estimator_{n-1}(u, v) = sqrt((n-1)/n) * estimator_n(u, v*(n-1)/n),
which is how every n-1 quantity here is computed.
"""

from __future__ import annotations

import io
import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable, Sequence, Union

import numpy as np
from numpy.polynomial.legendre import leggauss

from .errors import ConvergenceError, DomainError, MomentExistenceError
from .indices import (
    BilateralSpec,
    IndexParams,
    ProcessParams,
    Side,
    ToleranceSpec,
    chen_pearn_index,
    unilateral_index,
)
from .special import (
    DEFAULT_SERIES,
    SeriesControl,
    chi2_pdf,
    gauss_2f1,
    normal_cdf,
    normal_pdf,
)

_SQRT_2PI = math.sqrt(2.0 * math.pi)


class Variant(str, Enum):
    """Which divisor the variance estimator uses."""

    DIV_N = "n"
    DIV_N_MINUS_1 = "n-1"


SpecLike = Union[ToleranceSpec, BilateralSpec]


@dataclass(frozen=True)
class EstimatorContext:
    """Everything the sampling distribution of an estimator depends on."""

    n: int
    process: ProcessParams
    spec: SpecLike
    variant: Variant = Variant.DIV_N

    def __post_init__(self) -> None:
        if self.n < 4:
            raise DomainError(f"sample size must be >= 4, got {self.n}")

    @property
    def delta(self) -> float:
        """Standardized mean offset sqrt(n)*(mu - T)/sigma."""
        return (
            math.sqrt(self.n)
            * (self.process.mu - self.spec.target)
            / self.process.sigma
        )

    @property
    def lam(self) -> float:
        return self.delta**2

    @property
    def b(self) -> float:
        """B_u or B_l: standardized target-to-limit distance (one-sided spec)."""
        t = self._tolerance()
        return math.sqrt(self.n) * t.width / self.process.sigma

    @property
    def d_cap(self) -> float:
        """D = sqrt(n)*d/sigma (bilateral spec)."""
        return math.sqrt(self.n) * self._bilateral().d / self.process.sigma

    @property
    def d_star_cap(self) -> float:
        """D* = sqrt(n)*d*/sigma (bilateral spec)."""
        return math.sqrt(self.n) * self._bilateral().d_star / self.process.sigma

    def _tolerance(self) -> ToleranceSpec:
        if not isinstance(self.spec, ToleranceSpec):
            raise DomainError("operation requires a one-sided ToleranceSpec")
        return self.spec

    def _bilateral(self) -> BilateralSpec:
        if not isinstance(self.spec, BilateralSpec):
            raise DomainError("operation requires a BilateralSpec")
        return self.spec


def population_index(ctx: EstimatorContext, ip: IndexParams) -> float:
    """The population value the estimator targets."""
    if isinstance(ctx.spec, ToleranceSpec):
        return unilateral_index(ctx.process, ctx.spec, ip)
    return chen_pearn_index(ctx.process, ctx.spec, ip)


# ---------------------------------------------------------------------------
# Closed forms for the (0, 0) couple (chi-distribution scale family).


def _cpu_value(ctx: EstimatorContext) -> float:
    if isinstance(ctx.spec, ToleranceSpec):
        return ctx.spec.width / (3.0 * ctx.process.sigma)
    return ctx.spec.d_star / (3.0 * ctx.process.sigma)


def _divisor(ctx: EstimatorContext) -> int:
    return ctx.n if ctx.variant is Variant.DIV_N else ctx.n - 1


def density_cpu_hat(x: float, ctx: EstimatorContext) -> float:
    """Density of the potential-capability estimator (couple (0,0))."""
    if x <= 0.0:
        return 0.0
    c = _cpu_value(ctx)
    n, m = ctx.n, _divisor(ctx)
    log_f = (
        ((n - 1) / 2.0) * math.log(m)
        - math.lgamma((n - 1) / 2.0)
        - ((n - 3) / 2.0) * math.log(2.0)
        - math.log(c)
        + n * math.log(c / x)
        - (m / 2.0) * (c / x) ** 2
    )
    return math.exp(log_f)


def moments_cpu_hat(r: int, ctx: EstimatorContext) -> float:
    """Exact r-th raw moment of the potential-capability estimator."""
    if r == 0:
        return 1.0
    if r < 0:
        raise DomainError("moment order must be >= 0")
    n, m = ctx.n, _divisor(ctx)
    if r >= n - 1:
        raise MomentExistenceError(f"moment of order {r} requires r < n-1 = {n - 1}")
    c = _cpu_value(ctx)
    ratio = math.exp(math.lgamma((n - 1 - r) / 2.0) - math.lgamma((n - 1) / 2.0))
    return (m / 2.0) ** (r / 2.0) * ratio * c**r


def bias_factor(n: int, variant: Variant = Variant.DIV_N_MINUS_1) -> float:
    """b_f (variant n-1) or c_f (variant n): the reciprocal of the relative
    bias of the (0,0) estimator, sqrt(2/m) * Gamma((n-1)/2)/Gamma((n-2)/2)."""
    m = n - 1 if variant is Variant.DIV_N_MINUS_1 else n
    return math.sqrt(2.0 / m) * math.exp(
        math.lgamma((n - 1) / 2.0) - math.lgamma((n - 2) / 2.0)
    )


def mean_variance_cpu_hat(ctx: EstimatorContext) -> tuple[float, float]:
    """(mean, variance) of the potential-capability estimator."""
    mean = moments_cpu_hat(1, ctx)
    second = moments_cpu_hat(2, ctx)
    return mean, second - mean**2


# ---------------------------------------------------------------------------
# Density of Y, the squared standardized penalized deviation.


class YSide(str, Enum):
    UPPER = "upper"
    LOWER = "lower"
    ASYMMETRIC = "asymmetric"


@dataclass(frozen=True)
class YDensityParams:
    """Parameters of the Y density: side, noncentrality delta, and either
    the ratio k (one-sided) or the tolerance geometry (asymmetric)."""

    side: YSide
    delta: float
    k: float = 1.0
    d_u: float = 1.0
    d_l: float = 1.0
    d: float = 1.0

    def weights(self) -> tuple[float, float]:
        """(w_plus, w_minus): coefficients of the two half-normal pieces.
        Y = max(w_plus*Z, -w_minus*Z)^2 ... expressed through the inverse
        slopes that appear in the density."""
        if self.side is YSide.UPPER:
            return 1.0, self.k
        if self.side is YSide.LOWER:
            return self.k, 1.0
        return self.d_u / self.d, self.d_l / self.d


def y_density(y, p: YDensityParams):
    """Density of Y = (sqrt(n) * A-hat / sigma)^2 (scaled by d/d* in the
    asymmetric case); zero for y <= 0.  Vectorized over y."""
    wp, wm = p.weights()
    y = np.asarray(y, dtype=float)
    out = np.zeros_like(y)
    pos = y > 0
    ry = np.sqrt(y[pos])
    out[pos] = (
        wp * normal_pdf(wp * ry - p.delta) + wm * normal_pdf(wm * ry + p.delta)
    ) / (2.0 * ry)
    if out.ndim == 0:
        return float(out)
    return out


def _y_params(ctx: EstimatorContext) -> YDensityParams:
    if isinstance(ctx.spec, ToleranceSpec):
        side = YSide.UPPER if ctx.spec.side is Side.UPPER else YSide.LOWER
        return YDensityParams(side=side, delta=ctx.delta, k=ctx.spec.k)
    b = ctx.spec
    return YDensityParams(
        side=YSide.ASYMMETRIC, delta=ctx.delta, d_u=b.d_u, d_l=b.d_l, d=b.d
    )


# ---------------------------------------------------------------------------
# General quadrature kernel shared by the unilateral and asymmetric densities.

_GL_CACHE: dict[int, tuple[np.ndarray, np.ndarray]] = {}


def _gl01(npts: int) -> tuple[np.ndarray, np.ndarray]:
    if npts not in _GL_CACHE:
        x, w = leggauss(npts)
        _GL_CACHE[npts] = (0.5 * (x + 1.0), 0.5 * w)
    return _GL_CACHE[npts]


def _kernel_integral(
    x: float,
    n: int,
    ustar: float,
    v: float,
    big_b: float,
    ydens: Callable[[np.ndarray], np.ndarray],
    npts: int,
) -> float:
    # Conditioning integral over t after the substitutions t = s^2 (x > 0,
    # removes the 1/sqrt(t) edge of the Y density) and t = 1/w^2 (x < 0,
    # compactifies the (1, inf) range).
    kx = (big_b / (ustar + 3.0 * x * math.sqrt(v))) ** 2
    s, w = _gl01(npts)
    if x > 0:
        t = s * s
        jac = 2.0 * s
    else:
        t = 1.0 / (s * s)
        jac = 2.0 / s**3
    q = (big_b - ustar * np.sqrt(t * kx)) / (3.0 * x)
    arg = q * q - v * t * kx
    with np.errstate(over="ignore", invalid="ignore"):
        vals = chi2_pdf(arg, n - 1) * ydens(t * kx) * (2.0 * kx / x) * q * q
    vals = np.where(np.isfinite(vals), vals, 0.0)
    total = float(np.sum(w * vals * jac))
    # The + 0.0 turns a -0.0 from the negative branch into a plain 0.0.
    return (total if x > 0 else -total) + 0.0


def _kernel_density(
    x: float,
    n: int,
    ustar: float,
    v: float,
    big_b: float,
    ydens: Callable[[np.ndarray], np.ndarray],
) -> float:
    if x == 0.0:
        return 0.0
    if x < 0.0:
        if ustar == 0.0:
            return 0.0
        if v > 0.0 and x <= -ustar / (3.0 * math.sqrt(v)):
            return 0.0
    prev = _kernel_integral(x, n, ustar, v, big_b, ydens, 128)
    for npts in (256, 512, 1024):
        cur = _kernel_integral(x, n, ustar, v, big_b, ydens, npts)
        if abs(cur - prev) <= max(1e-10, 1e-8 * abs(cur)):
            return cur
        prev = cur
    raise ConvergenceError(
        f"density quadrature did not stabilize at x={x} "
        f"(n={n}, u={ustar}, v={v}, B={big_b})"
    )


def support_lower_bound(ip: IndexParams) -> float:
    """Infimum of the estimator's support (same for both variants)."""
    if ip.u == 0.0:
        return 0.0
    if ip.v == 0.0:
        return -math.inf
    return -ip.u / (3.0 * math.sqrt(ip.v))


def _variant_scaled(
    density_div_n: Callable[[float, IndexParams], float],
    x: float,
    ctx: EstimatorContext,
    ip: IndexParams,
) -> float:
    # f_{n-1}^{(u,v)}(x) = (1/c) f_n^{(u, v(n-1)/n)}(x/c), c = sqrt((n-1)/n).
    c = math.sqrt((ctx.n - 1) / ctx.n)
    ip_n = IndexParams(ip.u, ip.v * (ctx.n - 1) / ctx.n)
    return density_div_n(x / c, ip_n) / c


def density_unilateral(x: float, ctx: EstimatorContext, ip: IndexParams) -> float:
    """Density of the unilateral-index estimator at x, for any (u, v) couple
    and either variant."""
    ctx._tolerance()
    if ip.u == 0.0 and ip.v == 0.0:
        return density_cpu_hat(x, ctx)

    def div_n(xx: float, iip: IndexParams) -> float:
        if iip.u == 0.0 and iip.v == 0.0:
            return density_cpu_hat(
                xx, EstimatorContext(ctx.n, ctx.process, ctx.spec, Variant.DIV_N)
            )
        params = _y_params(ctx)
        return _kernel_density(
            xx, ctx.n, iip.u, iip.v, ctx.b, lambda y: y_density(y, params)
        )

    if ctx.variant is Variant.DIV_N_MINUS_1:
        return _variant_scaled(div_n, x, ctx, ip)
    return div_n(x, ip)


def density_general_asymmetric(
    x: float, ctx: EstimatorContext, ip: IndexParams
) -> float:
    """Density of the Chen-Pearn asymmetric-index estimator at x."""
    b = ctx._bilateral()
    if ip.u == 0.0 and ip.v == 0.0:
        return density_cpu_hat(x, ctx)

    def div_n(xx: float, iip: IndexParams) -> float:
        if iip.u == 0.0 and iip.v == 0.0:
            return density_cpu_hat(
                xx, EstimatorContext(ctx.n, ctx.process, ctx.spec, Variant.DIV_N)
            )
        params = _y_params(ctx)
        h = iip.u * b.d_star / b.d
        return _kernel_density(
            xx, ctx.n, h, iip.v, ctx.d_star_cap, lambda y: y_density(y, params)
        )

    if ctx.variant is Variant.DIV_N_MINUS_1:
        return _variant_scaled(div_n, x, ctx, ip)
    return div_n(x, ip)


# ---------------------------------------------------------------------------
# Moments via the hypergeometric double series.


def _hyp_weight(
    a: float, b: float, c: float, z: float, ctl: SeriesControl
) -> float:
    # Gamma(c-a)*Gamma(b)/Gamma(c) * 2F1(a, b; c; z).  At z = 1 the Gauss
    # summation collapses the product to Gamma(b)*Gamma(c-a-b)/Gamma(c-b),
    # which is how the v = 0 couples reduce to pure gamma-ratio moments.
    if z == 1.0:
        if c - a - b <= 0:
            raise MomentExistenceError(
                "series weight diverges at z=1 (requires r < n-1)"
            )
        return math.exp(math.lgamma(b) + math.lgamma(c - a - b) - math.lgamma(c - b))
    return math.exp(
        math.lgamma(c - a) + math.lgamma(b) - math.lgamma(c)
    ) * gauss_2f1(a, b, c, z, ctl)


@dataclass
class SeriesDiagnostics:
    """Truncation info from the last moment-series evaluation."""

    terms_used: int = 0


def _raw_moment_series(
    r: int,
    n: int,
    delta: float,
    big_b: float,
    u: float,
    c1: float,
    z1: float,
    c2: float,
    z2: float,
    ctl: SeriesControl,
    diag: SeriesDiagnostics | None,
) -> float:
    lam = delta**2
    j_floor = lam + 50.0
    total = 0.0
    max_j = 0
    for i in range(r + 1):
        if u == 0.0 and i > 0:
            break
        coef = ((-u) ** i if i > 0 else 1.0) * math.comb(r, i) * (
            big_b / math.sqrt(2.0)
        ) ** (r - i)
        jsum = 0.0
        w = 1.0  # delta^j * 2^(j/2) / j!
        consec = 0
        j = 0
        while True:
            if w != 0.0:
                a_ = r / 2.0
                b_ = (1.0 + i + j) / 2.0
                c_ = (n + i + j) / 2.0
                gam = c1**i * _hyp_weight(a_, b_, c_, z1, ctl) + (
                    -1.0
                ) ** j * c2**i * _hyp_weight(a_, b_, c_, z2, ctl)
                term = w * gam
            else:
                term = 0.0
            jsum += term
            if abs(term) <= 1e-14 * abs(jsum) and j > j_floor:
                consec += 1
                if consec >= 5:
                    break
            else:
                consec = 0
            j += 1
            if j >= 20000:
                raise ConvergenceError(
                    f"moment series did not converge (r={r}, n={n}, delta={delta})"
                )
            w *= delta * math.sqrt(2.0) / j
        max_j = max(max_j, j)
        total += coef * math.exp(-lam / 2.0) / (2.0 * math.sqrt(math.pi)) * jsum
    if diag is not None:
        diag.terms_used = max_j
    return total / 3.0**r


def _check_moment_order(r: int, n: int) -> None:
    if r < 0:
        raise DomainError("moment order must be >= 0")
    if r >= n - 1:
        raise MomentExistenceError(f"moment of order {r} requires r < n-1 = {n - 1}")


def moment_unilateral(
    r: int,
    ctx: EstimatorContext,
    ip: IndexParams,
    ctl: SeriesControl = DEFAULT_SERIES,
    diag: SeriesDiagnostics | None = None,
) -> float:
    """Exact r-th raw moment of the unilateral-index estimator."""
    t = ctx._tolerance()
    _check_moment_order(r, ctx.n)
    if r == 0:
        return 1.0
    v_eff = ip.v if ctx.variant is Variant.DIV_N else ip.v * (ctx.n - 1) / ctx.n
    k = t.k
    if t.side is Side.UPPER:
        c1, z1 = 1.0, 1.0 - v_eff
        c2, z2 = 1.0 / k, 1.0 - v_eff / k**2
    else:
        c1, z1 = 1.0 / k, 1.0 - v_eff / k**2
        c2, z2 = 1.0, 1.0 - v_eff
    value = _raw_moment_series(
        r, ctx.n, ctx.delta, ctx.b, ip.u, c1, z1, c2, z2, ctl, diag
    )
    if ctx.variant is Variant.DIV_N_MINUS_1:
        value *= ((ctx.n - 1) / ctx.n) ** (r / 2.0)
    return value


def moment_asymmetric(
    r: int,
    ctx: EstimatorContext,
    ip: IndexParams,
    ctl: SeriesControl = DEFAULT_SERIES,
    diag: SeriesDiagnostics | None = None,
) -> float:
    """Exact r-th raw moment of the Chen-Pearn asymmetric-index estimator."""
    b = ctx._bilateral()
    _check_moment_order(r, ctx.n)
    if r == 0:
        return 1.0
    v_eff = ip.v if ctx.variant is Variant.DIV_N else ip.v * (ctx.n - 1) / ctx.n
    c1, z1 = b.d_star / b.d_u, 1.0 - (b.d / b.d_u) ** 2 * v_eff
    c2, z2 = b.d_star / b.d_l, 1.0 - (b.d / b.d_l) ** 2 * v_eff
    value = _raw_moment_series(
        r, ctx.n, ctx.delta, ctx.d_star_cap, ip.u, c1, z1, c2, z2, ctl, diag
    )
    if ctx.variant is Variant.DIV_N_MINUS_1:
        value *= ((ctx.n - 1) / ctx.n) ** (r / 2.0)
    return value


def closed_form_cpku_moments(ctx: EstimatorContext) -> tuple[float, float]:
    """Explicit mean and second moment of the (1,0)-couple estimator.

    Serves both as a fast path and as the independent oracle for the
    series.  The lower side maps onto the upper side by delta -> -delta.
    """
    t = ctx._tolerance()
    n = ctx.n
    if n < 4:
        raise DomainError("need n >= 4")
    k = t.k
    delta = ctx.delta if t.side is Side.UPPER else -ctx.delta
    sigma = ctx.process.sigma
    width = t.width

    cf = bias_factor(n, Variant.DIV_N)
    a_star = max(delta, -delta / k) * sigma / math.sqrt(n)
    cpku = (width - a_star) / (3.0 * sigma)

    tail = abs(delta) * normal_cdf(-abs(delta)) - math.exp(-delta**2 / 2.0) / _SQRT_2PI
    mean = (cpku + (1.0 + 1.0 / k) / (3.0 * math.sqrt(n)) * tail) / cf

    # (1/(2*delta))*(1 - 2*Phi(-delta)) -> phi(0) as delta -> 0.
    if abs(delta) < 1e-8:
        odd_term = float(normal_pdf(0.0))
    else:
        odd_term = (1.0 - 2.0 * normal_cdf(-delta)) / (2.0 * delta)
    second = (
        n
        / (n - 3.0)
        * (
            cpku**2
            + 2.0 * width * (1.0 + 1.0 / k) / (9.0 * sigma * math.sqrt(n)) * tail
            + (1.0 + k**-2) / (18.0 * n)
            + delta * (1.0 - k**-2) / (9.0 * n) * (-tail + odd_term)
        )
    )
    if ctx.variant is Variant.DIV_N_MINUS_1:
        scale = (n - 1.0) / n
        mean *= math.sqrt(scale)
        second *= scale
    return mean, second


# ---------------------------------------------------------------------------
# Density curves.


@dataclass
class DensityCurve:
    """Sampled density with provenance metadata.

    Grid points inside the exclusion window around x = 0 (where the
    integrand degenerates numerically and the density is effectively 0)
    are reported with f = 0; the window size is recorded in meta.
    """

    xs: list[float]
    fs: list[float]
    domain_lo: float
    domain_hi: float
    meta: dict = field(default_factory=dict)

    def to_csv(self, target) -> None:
        """Write two-column CSV (x, f) with a header comment echoing meta."""

        def _write(fh) -> None:
            items = " ".join(f"{k}={v}" for k, v in sorted(self.meta.items()))
            fh.write(f"# {items}\n")
            fh.write("x,f\n")
            for x, f in zip(self.xs, self.fs):
                fh.write(f"{x:.12g},{f:.12g}\n")

        if isinstance(target, (str, bytes)) or hasattr(target, "__fspath__"):
            with open(target, "w") as fh:
                _write(fh)
        else:
            _write(target)


EXCLUSION_WINDOW = 1e-6


def density_curve(
    ctx: EstimatorContext,
    ip: IndexParams,
    x_lo: float,
    x_hi: float,
    points: int = 201,
) -> DensityCurve:
    """Evaluate the appropriate estimator density on a uniform grid."""
    if points < 2 or not x_lo < x_hi:
        raise DomainError("invalid density grid")
    dens = (
        density_unilateral
        if isinstance(ctx.spec, ToleranceSpec)
        else density_general_asymmetric
    )
    xs = np.linspace(x_lo, x_hi, points)
    fs = [
        0.0 if abs(x) < EXCLUSION_WINDOW else dens(float(x), ctx, ip) for x in xs
    ]
    meta = {
        "n": ctx.n,
        "mu": ctx.process.mu,
        "sigma": ctx.process.sigma,
        "variant": ctx.variant.value,
        "u": ip.u,
        "v": ip.v,
        "exclusion_window": EXCLUSION_WINDOW,
    }
    if isinstance(ctx.spec, ToleranceSpec):
        meta.update(
            side=ctx.spec.side.value,
            limit=ctx.spec.limit,
            target=ctx.spec.target,
            k=ctx.spec.k,
        )
    else:
        meta.update(
            lower=ctx.spec.lower, upper=ctx.spec.upper, target=ctx.spec.target
        )
    return DensityCurve(
        xs=[float(x) for x in xs],
        fs=[float(f) for f in fs],
        domain_lo=x_lo,
        domain_hi=x_hi,
        meta=meta,
    )
