"""FastAPI service exposing the capability-index toolkit.

The CLI is a thin client of this app (in-process by default); running it
under uvicorn serves the same API to remote clients.
"""

from __future__ import annotations

import math

from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse

from . import __version__
from .errors import ConvergenceError, DomainError
from .estimators import (
    EstimatorContext,
    IndexParams,
    SeriesDiagnostics,
    Variant,
    closed_form_cpku_moments,
    density_curve,
    moment_unilateral,
)
from .indices import (
    NAMED_COUPLES,
    LegacyFamily,
    ProcessParams,
    Side,
    ToleranceSpec,
    legacy_index,
    unilateral_report,
)
from .montecarlo import SimConfig, compare_to_analytics, simulate_estimator
from .nonnormal import (
    PercentileSummary,
    QuantileMethod,
    ShoreFit,
    nonnormal_unilateral_index,
    sample_median,
    shore_fit,
    shore_quantile,
    summarize_sample,
    LOWER_PCT,
    UPPER_PCT,
)
from .normality import chi_square_normality_test
from .schemas import (
    DensityRequest,
    DensityResponse,
    EstimateRequest,
    EstimateResponse,
    EstimatorRequest,
    IndexReportModel,
    IndexRequest,
    IndexResponse,
    MomentsRequest,
    MomentsResponse,
    NormalityModel,
    ShoreFitModel,
    ShoreFitRequest,
    ShoreFitResponse,
    SimulateRequest,
    SimulateResponse,
    VerdictModel,
)

app = FastAPI(title="capidx", version=__version__)


@app.exception_handler(DomainError)
async def _domain_error(request: Request, exc: DomainError) -> JSONResponse:
    return JSONResponse(status_code=400, content={"detail": str(exc), "error": "domain"})


@app.exception_handler(ConvergenceError)
async def _convergence_error(request: Request, exc: ConvergenceError) -> JSONResponse:
    return JSONResponse(
        status_code=400, content={"detail": str(exc), "error": "convergence"}
    )


@app.get("/health")
def health() -> dict:
    return {"status": "ok", "version": __version__}


def _tolerance(side: str, limit: float, target: float, k: float) -> ToleranceSpec:
    return ToleranceSpec(target=target, side=Side(side), limit=limit, k=k)


def _clamped_report(report, clamp: bool) -> IndexReportModel:
    f = (lambda x: max(0.0, x)) if clamp else (lambda x: x)
    return IndexReportModel(
        side=report.side.value,
        cp_side=f(report.cpu_or_cpl),
        cpk_side=f(report.cpk_side),
        cpm_side=f(report.cpm_side),
        cpmk_side=f(report.cpmk_side),
        alpha=report.alpha,
        delta=report.delta,
        a_star=report.a_star,
    )


@app.post("/index", response_model=IndexResponse)
def index_report(req: IndexRequest) -> IndexResponse:
    spec = _tolerance(req.side, req.limit, req.target, req.k)
    from .indices import IndexParams as IP, unilateral_index

    has_moments = req.mu is not None and req.sigma is not None
    has_percentiles = (
        req.median is not None
        and req.lower_pct is not None
        and req.upper_pct is not None
    )
    if has_moments == has_percentiles:
        raise DomainError(
            "supply either (mu, sigma) or (median, lower_pct, upper_pct)"
        )

    explicit = (
        IP(req.u or 0.0, req.v or 0.0)
        if (req.u is not None or req.v is not None)
        else None
    )
    if has_percentiles:
        ps = PercentileSummary(
            median=req.median, lower_pct=req.lower_pct, upper_pct=req.upper_pct
        )
        value = (
            nonnormal_unilateral_index(ps, spec, explicit, clamp=req.clamp)
            if explicit
            else None
        )
        return IndexResponse(
            version=__version__,
            params=req.model_dump(),
            report=_nonnormal_report(ps, spec, req.clamp),
            value=value,
            legacy=None,
        )

    process = ProcessParams(mu=req.mu, sigma=req.sigma)
    report = unilateral_report(process, spec)

    value = None
    if explicit is not None:
        value = unilateral_index(process, spec, explicit, clamp=req.clamp)

    legacy = None
    if req.include_legacy:
        legacy = {
            fam.value: legacy_index(process, spec, fam)
            for fam in (
                LegacyFamily.KANE_CPU_CPL,
                LegacyFamily.KANE_STAR,
                LegacyFamily.CHAN_CPM_STAR,
                LegacyFamily.VANNMANN_CPMK_SIDE,
            )
        }
    return IndexResponse(
        version=__version__,
        params=req.model_dump(),
        report=_clamped_report(report, req.clamp),
        value=value,
        legacy=legacy,
    )


def _shore_model(fit: ShoreFit) -> ShoreFitModel:
    return ShoreFitModel(
        a1=fit.a1, b1=fit.b1, a2=fit.a2, b2=fit.b2, median=fit.median, n=fit.n
    )


@app.post("/shore-fit", response_model=ShoreFitResponse)
def shore_fit_endpoint(req: ShoreFitRequest) -> ShoreFitResponse:
    fit = shore_fit(req.sample)
    return ShoreFitResponse(
        version=__version__,
        params={"n": len(req.sample)},
        fit=_shore_model(fit),
        lower_pct=shore_quantile(fit, LOWER_PCT),
        upper_pct=shore_quantile(fit, UPPER_PCT),
    )


def _nonnormal_report(
    ps: PercentileSummary, spec: ToleranceSpec, clamp: bool
) -> IndexReportModel:
    from .indices import IndexParams as IP

    a_star = spec.penalized_deviation(ps.median)
    alpha = a_star / spec.width
    if spec.side is Side.UPPER:
        spread = (ps.upper_pct - ps.median) / 3.0
    else:
        spread = (ps.median - ps.lower_pct) / 3.0
    delta = a_star / spread
    vals = {
        name: nonnormal_unilateral_index(ps, spec, ip, clamp=clamp)
        for name, ip in NAMED_COUPLES.items()
    }
    return IndexReportModel(
        side=spec.side.value,
        cp_side=vals["cp"],
        cpk_side=vals["cpk"],
        cpm_side=vals["cpm"],
        cpmk_side=vals["cpmk"],
        alpha=alpha,
        delta=delta,
        a_star=a_star,
    )


@app.post("/estimate", response_model=EstimateResponse)
def estimate(req: EstimateRequest) -> EstimateResponse:
    sample = req.sample
    n = len(sample)
    median = sample_median(sample)

    normality = None
    use_nonnormal = req.force_nonnormal
    if not use_nonnormal:
        if n < 20:
            raise DomainError(
                "sample too small for the normality screen (n < 20); "
                "pass force_nonnormal to skip it"
            )
        result = chi_square_normality_test(sample)
        normality = NormalityModel(
            statistic=None if math.isnan(result.statistic) else result.statistic,
            dof=result.dof,
            p_value=None if math.isnan(result.p_value) else result.p_value,
            bins_used=result.bins_used,
            conclusive=result.conclusive,
        )
        if not result.conclusive:
            raise DomainError(
                "normality screen inconclusive (too few usable classes); "
                "pass force_nonnormal to proceed"
            )
        use_nonnormal = result.p_value < req.alpha

    indices: dict[str, IndexReportModel] = {}
    if use_nonnormal:
        fit = shore_fit(sample) if req.method == "shore" else None
        ps = summarize_sample(sample, QuantileMethod(req.method))
        for k in req.k_values:
            spec = _tolerance(req.side, req.limit, req.target, k)
            indices[_fmt_k(k)] = _nonnormal_report(ps, spec, req.clamp)
        return EstimateResponse(
            version=__version__,
            params=req.model_dump(),
            n=n,
            path="nonnormal",
            normality=normality,
            median=median,
            shore=_shore_model(fit) if fit else None,
            lower_pct=ps.lower_pct,
            upper_pct=ps.upper_pct,
            indices=indices,
        )

    import numpy as np

    arr = np.asarray(sample, dtype=float)
    mu_hat = float(arr.mean())
    sigma_hat = float(arr.std(ddof=0 if req.variant == "n" else 1))
    if not sigma_hat > 0:
        raise DomainError("degenerate sample: zero standard deviation")
    process = ProcessParams(mu=mu_hat, sigma=sigma_hat)
    for k in req.k_values:
        spec = _tolerance(req.side, req.limit, req.target, k)
        indices[_fmt_k(k)] = _clamped_report(
            unilateral_report(process, spec), req.clamp
        )
    return EstimateResponse(
        version=__version__,
        params=req.model_dump(),
        n=n,
        path="normal",
        normality=normality,
        median=median,
        mu_hat=mu_hat,
        sigma_hat=sigma_hat,
        indices=indices,
    )


def _fmt_k(k: float) -> str:
    return f"{k:g}"


def _estimator_ctx(req: EstimatorRequest) -> tuple[EstimatorContext, IndexParams]:
    spec = _tolerance(req.side, req.limit, req.target, req.k)
    ctx = EstimatorContext(
        n=req.n,
        process=ProcessParams(mu=req.mu, sigma=req.sigma),
        spec=spec,
        variant=Variant(req.variant),
    )
    if req.index is not None:
        ip = NAMED_COUPLES[req.index]
    elif req.u is not None or req.v is not None:
        ip = IndexParams(req.u or 0.0, req.v or 0.0)
    else:
        raise DomainError("specify either a named index or the (u, v) couple")
    return ctx, ip


@app.post("/moments", response_model=MomentsResponse)
def moments(req: MomentsRequest) -> MomentsResponse:
    ctx, ip = _estimator_ctx(req)
    diag = SeriesDiagnostics()
    value = moment_unilateral(req.r, ctx, ip, diag=diag)
    return MomentsResponse(
        version=__version__,
        params=req.model_dump(),
        r=req.r,
        value=value,
        terms_used=diag.terms_used,
    )


@app.post("/density", response_model=DensityResponse)
def density(req: DensityRequest) -> DensityResponse:
    ctx, ip = _estimator_ctx(req)
    curve = density_curve(ctx, ip, req.x_min, req.x_max, req.points)
    return DensityResponse(
        version=__version__,
        params=req.model_dump(),
        xs=curve.xs,
        fs=curve.fs,
        domain_lo=curve.domain_lo,
        domain_hi=curve.domain_hi,
        meta=curve.meta,
    )


@app.post("/simulate", response_model=SimulateResponse)
def simulate(req: SimulateRequest) -> SimulateResponse:
    ctx, ip = _estimator_ctx(req)
    cfg = SimConfig(replications=req.replications, seed=req.seed, ctx=ctx, ip=ip)
    res = simulate_estimator(cfg, bins=req.bins)
    verdict = None
    if req.check:
        analytic_mean = moment_unilateral(1, ctx, ip)
        analytic_second = moment_unilateral(2, ctx, ip)
        v = compare_to_analytics(res, analytic_mean, analytic_second)
        verdict = VerdictModel(
            z_mean=v.z_mean,
            z_second_moment=v.z_second_moment,
            passed=v.passed,
            analytic_mean=analytic_mean,
            analytic_second_moment=analytic_second,
        )
    return SimulateResponse(
        version=__version__,
        params=req.model_dump(),
        empirical_mean=res.empirical_mean,
        empirical_second_moment=res.empirical_second_moment,
        se_mean=res.se_mean,
        se_second_moment=res.se_second_moment,
        replications=res.replications,
        seed=res.seed,
        histogram=res.histogram,
        verdict=verdict,
    )
