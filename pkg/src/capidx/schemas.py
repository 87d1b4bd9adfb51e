"""Pydantic request/response models for the HTTP service."""

from __future__ import annotations

from typing import Literal, Optional

from pydantic import BaseModel, Field

SideName = Literal["upper", "lower"]
VariantName = Literal["n", "n-1"]
IndexName = Literal["cp", "cpk", "cpm", "cpmk"]


class IndexRequest(BaseModel):
    """Index report input: either process moments (mu, sigma) or a
    percentile summary (median, lower_pct, upper_pct)."""

    side: SideName
    limit: float
    target: float
    k: float = 1.0
    mu: Optional[float] = None
    sigma: Optional[float] = None
    median: Optional[float] = None
    lower_pct: Optional[float] = None
    upper_pct: Optional[float] = None
    u: Optional[float] = None
    v: Optional[float] = None
    clamp: bool = False
    include_legacy: bool = False


class IndexReportModel(BaseModel):
    side: SideName
    cp_side: float
    cpk_side: float
    cpm_side: float
    cpmk_side: float
    alpha: float
    delta: float
    a_star: float


class IndexResponse(BaseModel):
    version: str
    params: dict
    report: IndexReportModel
    value: Optional[float] = None  # set when an explicit (u, v) was requested
    legacy: Optional[dict[str, float]] = None


class ShoreFitRequest(BaseModel):
    sample: list[float] = Field(min_length=4)


class ShoreFitModel(BaseModel):
    a1: float
    b1: float
    a2: float
    b2: float
    median: float
    n: int


class ShoreFitResponse(BaseModel):
    version: str
    params: dict
    fit: ShoreFitModel
    lower_pct: float
    upper_pct: float


class EstimateRequest(BaseModel):
    sample: list[float] = Field(min_length=4)
    side: SideName
    limit: float
    target: float
    k_values: list[float] = Field(default_factory=lambda: [1.0], min_length=1)
    variant: VariantName = "n-1"
    method: Literal["shore", "empirical"] = "shore"
    alpha: float = 0.05
    force_nonnormal: bool = False
    clamp: bool = False


class NormalityModel(BaseModel):
    statistic: Optional[float]
    dof: int
    p_value: Optional[float]
    bins_used: int
    conclusive: bool


class EstimateResponse(BaseModel):
    version: str
    params: dict
    n: int
    path: Literal["normal", "nonnormal"]
    normality: Optional[NormalityModel] = None
    median: float
    mu_hat: Optional[float] = None
    sigma_hat: Optional[float] = None
    shore: Optional[ShoreFitModel] = None
    lower_pct: Optional[float] = None
    upper_pct: Optional[float] = None
    indices: dict[str, IndexReportModel]  # keyed by the asymmetry ratio k


class EstimatorRequest(BaseModel):
    """Shared shape of the analytic/simulation estimator endpoints."""

    side: SideName
    limit: float
    target: float
    k: float = 1.0
    n: int = Field(ge=4)
    mu: float
    sigma: float = Field(gt=0)
    variant: VariantName = "n"
    index: Optional[IndexName] = None
    u: Optional[float] = None
    v: Optional[float] = None


class MomentsRequest(EstimatorRequest):
    r: int = Field(ge=1)


class MomentsResponse(BaseModel):
    version: str
    params: dict
    r: int
    value: float
    terms_used: int


class DensityRequest(EstimatorRequest):
    x_min: float
    x_max: float
    points: int = Field(default=201, ge=2)


class DensityResponse(BaseModel):
    version: str
    params: dict
    xs: list[float]
    fs: list[float]
    domain_lo: float
    domain_hi: float
    meta: dict


class SimulateRequest(EstimatorRequest):
    replications: int = Field(default=100000, ge=1000)
    seed: int = 0
    check: bool = False
    bins: int = Field(default=200, ge=1)


class VerdictModel(BaseModel):
    z_mean: float
    z_second_moment: float
    passed: bool
    analytic_mean: float
    analytic_second_moment: float


class SimulateResponse(BaseModel):
    version: str
    params: dict
    empirical_mean: float
    empirical_second_moment: float
    se_mean: float
    se_second_moment: float
    replications: int
    seed: int
    histogram: list[tuple[float, float, float]]
    verdict: Optional[VerdictModel] = None
