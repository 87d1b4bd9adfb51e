"""Closed-form index families: hand oracles, algebraic identities,
legacy reductions and the asymmetric-tolerance embedding."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.optimize import brentq

from capidx.errors import DomainError
from capidx.indices import (
    NAMED_COUPLES,
    BilateralSpec,
    IndexParams,
    LegacyFamily,
    ProcessParams,
    Side,
    ToleranceSpec,
    chen_pearn_index,
    classical_indices,
    embed_bilateral,
    legacy_index,
    mean_position_from_ratio,
    reduced_v,
    unilateral_index,
    unilateral_report,
)

FIG2_SPEC = ToleranceSpec(target=0.0, side=Side.UPPER, limit=6.0, k=3.0)


def _upper(limit=6.0, target=0.0, k=3.0) -> ToleranceSpec:
    return ToleranceSpec(target=target, side=Side.UPPER, limit=limit, k=k)


class TestDomainTypes:
    def test_tolerance_validation(self):
        with pytest.raises(DomainError):
            ToleranceSpec(target=0.0, side=Side.UPPER, limit=6.0, k=0.5)
        with pytest.raises(DomainError):
            ToleranceSpec(target=6.0, side=Side.UPPER, limit=6.0)
        with pytest.raises(DomainError):
            ToleranceSpec(target=0.0, side=Side.LOWER, limit=1.0)
        # k = 1 is the allowed symmetric boundary.
        ToleranceSpec(target=0.0, side=Side.UPPER, limit=6.0, k=1.0)

    def test_process_validation(self):
        with pytest.raises(DomainError):
            ProcessParams(mu=0.0, sigma=0.0)
        with pytest.raises(DomainError):
            ProcessParams(mu=0.0, sigma=-1.0)

    def test_bilateral_validation(self):
        with pytest.raises(DomainError):
            BilateralSpec(lower=0.0, upper=1.0, target=2.0)
        b = BilateralSpec(lower=-9.0, upper=3.0, target=0.0)
        assert b.d == 6.0 and b.d_u == 3.0 and b.d_l == 9.0 and b.d_star == 3.0

    def test_index_params_validation(self):
        with pytest.raises(DomainError):
            IndexParams(-0.1, 0.0)
        with pytest.raises(DomainError):
            IndexParams(0.0, -1.0)

    def test_penalized_deviation_tie_at_target(self):
        # At mu = T both max() branches vanish; A* = 0 exactly.
        assert FIG2_SPEC.penalized_deviation(0.0) == 0.0


class TestClassicalIndices:
    def test_centered_unit_capability(self):
        b = BilateralSpec(lower=-3.0, upper=3.0, target=0.0)
        out = classical_indices(ProcessParams(mu=0.0, sigma=1.0), b)
        assert all(v == pytest.approx(1.0, rel=1e-14) for v in out.values())

    def test_mean_on_limit(self):
        b = BilateralSpec(lower=-3.0, upper=3.0, target=0.0)
        out = classical_indices(ProcessParams(mu=3.0, sigma=0.7), b)
        assert out["cpk"] == pytest.approx(0.0, abs=1e-14)

    def test_hand_oracle(self):
        b = BilateralSpec(lower=0.0, upper=12.0, target=6.0)
        out = classical_indices(ProcessParams(mu=8.0, sigma=1.0), b)
        assert out["cp"] == pytest.approx(2.0, rel=1e-14)
        assert out["cpk"] == pytest.approx(4.0 / 3.0, rel=1e-14)
        assert out["cpm"] == pytest.approx(2.0 / math.sqrt(5.0), rel=1e-14)
        assert out["cpmk"] == pytest.approx(4.0 / (3.0 * math.sqrt(5.0)), rel=1e-14)

    def test_clamp(self):
        b = BilateralSpec(lower=-3.0, upper=3.0, target=0.0)
        p = ProcessParams(mu=5.0, sigma=1.0)
        assert classical_indices(p, b)["cpk"] < 0
        assert classical_indices(p, b, clamp=True)["cpk"] == 0.0


class TestUnilateralIndex:
    def test_at_target_all_couples_equal(self):
        p = ProcessParams(mu=0.0, sigma=2.0)
        for ip in NAMED_COUPLES.values():
            assert unilateral_index(p, FIG2_SPEC, ip) == pytest.approx(1.0, rel=1e-14)

    def test_mean_on_limit_zeroes_u_couples(self):
        p = ProcessParams(mu=6.0, sigma=2.0)
        assert unilateral_index(p, FIG2_SPEC, NAMED_COUPLES["cpk"]) == 0.0
        assert unilateral_index(p, FIG2_SPEC, NAMED_COUPLES["cpmk"]) == 0.0

    def test_discounted_drift_hand_oracle(self):
        # mu = -3: A* = max(-3, 3/3) = 1, Cpku = (6 - 1)/6.
        p = ProcessParams(mu=-3.0, sigma=2.0)
        got = unilateral_index(p, FIG2_SPEC, NAMED_COUPLES["cpk"])
        assert got == pytest.approx(5.0 / 6.0, rel=1e-14)

    def test_report_hand_oracle(self):
        report = unilateral_report(ProcessParams(mu=2.0, sigma=2.0), FIG2_SPEC)
        assert report.alpha == pytest.approx(1.0 / 3.0, rel=1e-14)
        assert report.cpu_or_cpl == pytest.approx(1.0, rel=1e-14)
        assert report.cpk_side == pytest.approx(2.0 / 3.0, rel=1e-14)
        assert report.cpm_side == pytest.approx(1.0 / math.sqrt(2.0), rel=1e-14)
        assert report.cpmk_side == pytest.approx((2.0 / 3.0) / math.sqrt(2.0), rel=1e-14)

    def test_lower_side_mirror(self):
        lower = ToleranceSpec(target=0.0, side=Side.LOWER, limit=-6.0, k=3.0)
        upper_report = unilateral_report(ProcessParams(mu=2.0, sigma=2.0), FIG2_SPEC)
        lower_report = unilateral_report(ProcessParams(mu=-2.0, sigma=2.0), lower)
        for attr in ("cpu_or_cpl", "cpk_side", "cpm_side", "cpmk_side", "alpha"):
            assert getattr(lower_report, attr) == pytest.approx(
                getattr(upper_report, attr), rel=1e-14
            )

    def test_report_matches_couples(self):
        rng = np.random.default_rng(3)
        for _ in range(200):
            t = _upper(k=float(rng.uniform(1, 10)))
            p = ProcessParams(mu=float(rng.uniform(-8, 8)), sigma=float(rng.uniform(0.1, 4)))
            rep = unilateral_report(p, t)
            assert rep.cpu_or_cpl == pytest.approx(
                unilateral_index(p, t, NAMED_COUPLES["cp"]), rel=1e-13
            )
            assert rep.cpk_side == pytest.approx(
                unilateral_index(p, t, NAMED_COUPLES["cpk"]), rel=1e-13, abs=1e-13
            )
            assert rep.cpm_side == pytest.approx(
                unilateral_index(p, t, NAMED_COUPLES["cpm"]), rel=1e-13
            )
            assert rep.cpmk_side == pytest.approx(
                unilateral_index(p, t, NAMED_COUPLES["cpmk"]), rel=1e-13, abs=1e-13
            )
            # Structural identities of the report.
            assert rep.cpk_side == pytest.approx(
                (1 - rep.alpha) * rep.cpu_or_cpl, rel=1e-13, abs=1e-13
            )
            assert rep.cpm_side == pytest.approx(
                rep.cpu_or_cpl / math.sqrt(1 + rep.delta**2), rel=1e-13
            )

    def test_clamp(self):
        p = ProcessParams(mu=20.0, sigma=1.0)
        raw = unilateral_index(p, FIG2_SPEC, NAMED_COUPLES["cpk"])
        assert raw < 0
        assert unilateral_index(p, FIG2_SPEC, NAMED_COUPLES["cpk"], clamp=True) == 0.0


class TestAlgebraicProperties:
    @given(
        frac=st.floats(-1, 1),
        sigma=st.floats(0.05, 5),
        k=st.floats(1, 20),
        width=st.floats(0.1, 12),
    )
    @settings(max_examples=300, deadline=None)
    def test_ordering_and_product(self, frac, sigma, k, width):
        # The ordering chain concerns processes whose penalized deviation
        # stays within the tolerance width (alpha <= 1); the mean is drawn
        # from mu in [T - k*width, T + width] accordingly.  The product
        # identity below is unconditional.
        mu = frac * width if frac >= 0 else frac * k * width
        t = ToleranceSpec(target=0.0, side=Side.UPPER, limit=width, k=k)
        rep = unilateral_report(ProcessParams(mu=mu, sigma=sigma), t)
        assert rep.cpu_or_cpl >= rep.cpk_side - 1e-12
        assert rep.cpk_side >= rep.cpmk_side - 1e-12
        assert rep.cpu_or_cpl >= rep.cpm_side - 1e-12
        assert rep.cpm_side >= rep.cpmk_side - 1e-12
        lhs = rep.cpmk_side * rep.cpu_or_cpl
        rhs = rep.cpk_side * rep.cpm_side
        assert lhs == pytest.approx(rhs, rel=1e-12, abs=1e-12)

    def test_condition_maximum_at_target(self):
        # All four indices coincide and are maximal at mu = T.
        sigma = 1.5
        at_target = unilateral_report(ProcessParams(0.0, sigma), FIG2_SPEC)
        assert at_target.cpk_side == at_target.cpu_or_cpl
        assert at_target.cpmk_side == at_target.cpu_or_cpl
        for eps in (1e-3, 0.5, 2.0):
            for mu in (eps, -eps):
                rep = unilateral_report(ProcessParams(mu, sigma), FIG2_SPEC)
                for attr in ("cpk_side", "cpm_side", "cpmk_side"):
                    assert getattr(rep, attr) < at_target.cpu_or_cpl

    def test_condition_affine_between_target_and_limit(self):
        # Cpk_side is affine in mu on [T, U] and hits 0 at mu = U.
        p0 = unilateral_index(ProcessParams(0.0, 2.0), FIG2_SPEC, NAMED_COUPLES["cpk"])
        p6 = unilateral_index(ProcessParams(6.0, 2.0), FIG2_SPEC, NAMED_COUPLES["cpk"])
        assert p6 == 0.0
        for mu in np.linspace(0, 6, 13):
            got = unilateral_index(
                ProcessParams(float(mu), 2.0), FIG2_SPEC, NAMED_COUPLES["cpk"]
            )
            assert got == pytest.approx(p0 + (p6 - p0) * mu / 6.0, rel=1e-13, abs=1e-13)

    def test_condition_k_independent_toward_limit(self):
        # For mu >= T (upper side) the value does not depend on k; mirror below.
        for mu in (0.0, 1.0, 4.0, 7.0):
            vals = {
                unilateral_index(
                    ProcessParams(mu, 2.0), _upper(k=k), IndexParams(1.0, 1.0)
                )
                for k in (1.0, 2.0, 5.0, 50.0)
            }
            assert len(vals) == 1
        lower = lambda k: ToleranceSpec(target=0.0, side=Side.LOWER, limit=-6.0, k=k)
        vals = {
            unilateral_index(ProcessParams(-2.0, 2.0), lower(k), IndexParams(1.0, 1.0))
            for k in (1.0, 3.0, 9.0)
        }
        assert len(vals) == 1

    def test_middle_third_and_fourth(self):
        # Cpm_side = 1 with mu > T forces mu - T < (U - T)/3; the (1,1)
        # couple analogously forces mu - T < (U - T)/4.  Located by root
        # finding in mu for several sigma.
        width = 6.0
        for sigma, ip, frac in [
            (0.5, NAMED_COUPLES["cpm"], 1 / 3),
            (1.5, NAMED_COUPLES["cpm"], 1 / 3),
            (0.5, NAMED_COUPLES["cpmk"], 1 / 4),
            (1.2, NAMED_COUPLES["cpmk"], 1 / 4),
        ]:
            f = lambda mu: unilateral_index(
                ProcessParams(mu, sigma), _upper(limit=width), ip
            ) - 1.0
            assert f(0.0) > 0 > f(width * frac)
            root = brentq(f, 0.0, width * frac)
            assert 0.0 < root < width * frac


class TestLegacyIndices:
    P = ProcessParams(mu=2.0, sigma=2.0)

    def test_kane_cpu_hand_oracle(self):
        got = legacy_index(self.P, _upper(), LegacyFamily.KANE_CPU_CPL)
        assert got == pytest.approx((6.0 - 2.0) / 6.0, rel=1e-14)

    def test_kane_clamps(self):
        p = ProcessParams(mu=9.0, sigma=1.0)
        assert legacy_index(p, _upper(), LegacyFamily.KANE_CPU_CPL) == 0.0
        assert legacy_index(p, _upper(), LegacyFamily.KANE_STAR) == 0.0

    def test_kane_star_hand_oracle(self):
        got = legacy_index(ProcessParams(1.0, 2.0), _upper(), LegacyFamily.KANE_STAR)
        assert got == pytest.approx((6.0 - 1.0) / 6.0, rel=1e-14)

    def test_fig1_values(self):
        # C_pa-family at the U=6, T=0, sigma=2 setting.
        at_target = legacy_index(
            ProcessParams(0.0, 2.0), _upper(), LegacyFamily.VANNMANN_CPA, u=0, v=4
        )
        assert at_target == pytest.approx(1.0, rel=1e-14)
        got = legacy_index(self.P, _upper(), LegacyFamily.VANNMANN_CPA, u=0, v=1)
        assert got == pytest.approx(4.0 / (3.0 * math.sqrt(8.0)), rel=1e-14)

    def test_reduction_identities(self):
        rng = np.random.default_rng(11)
        for _ in range(300):
            t = _upper(limit=float(rng.uniform(1, 10)))
            p = ProcessParams(
                mu=float(rng.uniform(-3, t.limit)), sigma=float(rng.uniform(0.2, 3))
            )
            cpa = lambda u, v: legacy_index(p, t, LegacyFamily.VANNMANN_CPA, u=u, v=v)
            cpv = lambda u, v: legacy_index(p, t, LegacyFamily.VANNMANN_CPV, u=u, v=v)
            assert cpa(0, 0) == pytest.approx(
                (t.limit - p.mu) / (3 * p.sigma), rel=1e-13
            )
            assert max(0.0, cpa(0, 0)) == pytest.approx(
                legacy_index(p, t, LegacyFamily.KANE_CPU_CPL), rel=1e-13, abs=1e-15
            )
            assert cpa(0, 1) == pytest.approx(
                legacy_index(p, t, LegacyFamily.VANNMANN_CPMK_SIDE), rel=1e-13
            )
            assert max(0.0, cpv(1, 0)) == pytest.approx(
                legacy_index(p, t, LegacyFamily.KANE_STAR), rel=1e-13, abs=1e-15
            )
            assert cpv(0, 1) == pytest.approx(
                legacy_index(p, t, LegacyFamily.CHAN_CPM_STAR), rel=1e-13
            )


class TestChenPearn:
    def test_at_target(self):
        b = BilateralSpec(lower=-9.0, upper=3.0, target=0.0)
        p = ProcessParams(mu=0.0, sigma=1.0)
        for u in (0.0, 1.0):
            got = chen_pearn_index(p, b, IndexParams(u, 0.0))
            assert got == pytest.approx(b.d_star / 3.0, rel=1e-14)

    def test_hand_oracle(self):
        # d=6, d*=3, A*=max(3*1/3, -3/9)=1, A=6*1/3=2:
        # (3 - 1)/(3*sqrt(1 + 4)) = 2/(3*sqrt(5)).
        b = BilateralSpec(lower=-9.0, upper=3.0, target=0.0)
        got = chen_pearn_index(ProcessParams(1.0, 1.0), b, IndexParams(1.0, 1.0))
        assert got == pytest.approx(2.0 / (3.0 * math.sqrt(5.0)), rel=1e-14)

    @given(
        mu=st.floats(-5, 5),
        sigma=st.floats(0.05, 4),
        width=st.floats(0.1, 10),
        k=st.floats(1, 15),
        u=st.sampled_from([0.0, 1.0]),
        v=st.floats(0, 4),
    )
    @settings(max_examples=300, deadline=None)
    def test_reduction_identity(self, mu, sigma, width, k, u, v):
        # Embedding an upper tolerance with ratio k as a bilateral spec with
        # D_l = k*D_u turns the unilateral (u, v) index into the asymmetric
        # index at (u, 4v/(1+k)^2).
        t = ToleranceSpec(target=0.0, side=Side.UPPER, limit=width, k=k)
        p = ProcessParams(mu=mu, sigma=sigma)
        lhs = unilateral_index(p, t, IndexParams(u, v))
        rhs = chen_pearn_index(p, embed_bilateral(t), IndexParams(u, reduced_v(v, k)))
        assert lhs == pytest.approx(rhs, rel=1e-12, abs=1e-12)

    def test_embed_lower_side(self):
        t = ToleranceSpec(target=0.0, side=Side.LOWER, limit=-4.0, k=2.5)
        b = embed_bilateral(t)
        assert b.lower == -4.0 and b.upper == 10.0 and b.target == 0.0
        p = ProcessParams(mu=-1.3, sigma=0.8)
        lhs = unilateral_index(p, t, IndexParams(1.0, 2.0))
        rhs = chen_pearn_index(p, b, IndexParams(1.0, reduced_v(2.0, 2.5)))
        assert lhs == pytest.approx(rhs, rel=1e-12)


class TestMeanPosition:
    def test_halfway(self):
        assert mean_position_from_ratio(0.5, _upper()) == pytest.approx(3.0)

    def test_boundaries(self):
        assert mean_position_from_ratio(1.0, _upper()) == 0.0
        assert mean_position_from_ratio(0.0, _upper()) == 6.0

    def test_lower_side(self):
        t = ToleranceSpec(target=0.0, side=Side.LOWER, limit=-6.0, k=2.0)
        assert mean_position_from_ratio(0.5, t) == pytest.approx(-3.0)

    def test_round_trip(self):
        t = _upper()
        for h in (0.1, 0.35, 0.9):
            mu = mean_position_from_ratio(h, t)
            rep = unilateral_report(ProcessParams(mu, 1.7), t)
            assert rep.cpk_side / rep.cpu_or_cpl == pytest.approx(h, rel=1e-13)

    def test_domain(self):
        with pytest.raises(DomainError):
            mean_position_from_ratio(1.5, _upper())
        with pytest.raises(DomainError):
            mean_position_from_ratio(-0.1, _upper())
