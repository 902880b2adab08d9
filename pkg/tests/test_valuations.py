import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from bundle_auction_lab.valuations import (
    ValuationDistribution,
    make_piecewise_linear,
    make_uniform,
    sample,
    sample_one,
    validate_smoothness,
)

from oracles import ks_statistic, simpson_between_knots


def ramp():
    # f(v) = 0.5 + v on [0, 1]; already normalized.
    return make_piecewise_linear((0.0, 1.0), (0.5, 1.5))


@st.composite
def distributions(draw):
    m = draw(st.floats(0.5, 4.0))
    n_interior = draw(st.integers(0, 4))
    fracs = sorted(
        draw(
            st.lists(
                st.floats(0.05, 0.95),
                min_size=n_interior,
                max_size=n_interior,
                unique=True,
            )
        )
    )
    if any(b - a < 0.02 for a, b in zip(fracs[:-1], fracs[1:])):
        fracs = [f for i, f in enumerate(fracs) if i == 0 or f - fracs[i - 1] >= 0.02]
    knots = [0.0] + [round(f * m, 12) for f in fracs] + [m]
    dens = draw(
        st.lists(st.floats(0.05, 10.0), min_size=len(knots), max_size=len(knots))
    )
    return make_piecewise_linear(knots, dens)


class TestConstruction:
    def test_uniform_pdf_cdf_mean(self):
        u = make_uniform(1.0)
        assert u.pdf(0.3) == 1.0
        assert u.cdf(0.5) == 0.5
        assert make_uniform(2.0).mean == pytest.approx(1.0, abs=1e-12)

    def test_uniform_rejects_bad_upper_bound(self):
        with pytest.raises(ValueError):
            make_uniform(0.0)
        with pytest.raises(ValueError):
            make_uniform(-1.0)

    def test_ramp_is_left_alone_and_has_exact_mean(self):
        r = ramp()
        assert r.norm_factor == pytest.approx(1.0, abs=1e-12)
        # analytic: integral of v*(0.5 + v) over [0,1] = 1/4 + 1/3 = 7/12
        assert r.mean == pytest.approx(7.0 / 12.0, abs=1e-12)

    def test_normalization_rescales_and_reports_factor(self):
        d = make_piecewise_linear((0.0, 1.0), (2.0, 2.0))
        assert d.norm_factor == pytest.approx(0.5, abs=1e-15)
        assert d.pdf(0.25) == pytest.approx(1.0, abs=1e-12)
        assert d == make_uniform(1.0)

    def test_construction_errors(self):
        with pytest.raises(ValueError):
            make_piecewise_linear((0.0, 1.0), (1.0, 0.0))
        with pytest.raises(ValueError):
            make_piecewise_linear((0.5, 0.2), (1.0, 1.0))
        with pytest.raises(ValueError):
            make_piecewise_linear((), ())
        with pytest.raises(ValueError):
            make_piecewise_linear((0.0, 1.0), (1.0, 1.0), upper_bound=2.0)
        with pytest.raises(ValueError):
            ValuationDistribution(1.0, (0.0, 1.0), (0.25, 0.25))  # integral 0.25

    def test_first_knot_must_be_zero(self):
        with pytest.raises(ValueError):
            make_piecewise_linear((0.1, 1.0), (1.0, 1.0))


class TestEvaluation:
    def test_support_bounds(self):
        u = make_uniform(1.0)
        assert u.pdf(-0.1) == 0.0
        assert u.pdf(1.1) == 0.0
        assert u.cdf(2.0) == 1.0
        assert u.cdf(-0.5) == 0.0

    def test_ramp_cdf_value(self):
        # F(0.5) = 0.5*0.5 + 0.25/2 = 0.375
        assert ramp().cdf(0.5) == pytest.approx(0.375, abs=1e-12)

    def test_cdf_matches_simpson_of_pdf(self):
        for d in (make_uniform(2.0), ramp(),
                  make_piecewise_linear((0, 0.3, 1.2, 2.0), (1, 4, 0.2, 1))):
            for v in (0.1, 0.45, 1.0, d.upper_bound):
                v = min(v, d.upper_bound)
                knots = [k for k in d.knots if k < v] + [v]
                ref = simpson_between_knots(d.pdf, knots)
                assert d.cdf(v) == pytest.approx(ref, abs=1e-10)

    def test_vectorized_matches_scalar(self):
        d = ramp()
        xs = np.linspace(-0.2, 1.2, 29)
        assert np.allclose(d.pdf(xs), [d.pdf(float(x)) for x in xs])
        assert np.allclose(d.cdf(xs), [d.cdf(float(x)) for x in xs])


class TestSampling:
    def test_quantile_uniform_identity(self):
        assert make_uniform(1.0).quantile(0.25) == pytest.approx(0.25, abs=1e-9)

    def test_quantile_ramp_inverts_cdf_example(self):
        # F(0.5) = 0.375 from the CDF example above.
        assert ramp().quantile(0.375) == pytest.approx(0.5, abs=1e-9)

    def test_quantile_rejects_bad_u(self):
        with pytest.raises(ValueError):
            make_uniform(1.0).quantile(1.5)

    def test_bulk_sampler_agrees_with_bisection(self):
        d = make_piecewise_linear((0, 0.3, 1.2, 2.0), (1, 4, 0.2, 1))
        us = np.linspace(0.001, 0.999, 101)
        fast = d._quantile_array(us)
        slow = np.array([d.quantile(float(u)) for u in us])
        assert np.max(np.abs(fast - slow)) < 1e-9

    def test_sample_one_uses_rng_stream(self):
        d = ramp()
        rng = np.random.default_rng(5)
        x = sample_one(d, rng)
        rng2 = np.random.default_rng(5)
        assert x == pytest.approx(d.quantile(float(rng2.random())), abs=1e-12)

    @pytest.mark.parametrize("dist_builder", [
        lambda: make_uniform(1.0),
        ramp,
        lambda: make_piecewise_linear((0, 0.5, 2.0), (3.0, 0.3, 1.0)),
    ])
    def test_kolmogorov_smirnov(self, dist_builder):
        d = dist_builder()
        xs = sample(d, 10**5, np.random.default_rng(1234))
        assert ks_statistic(xs, d.cdf) < 0.01


class TestSmoothness:
    def test_uniform_passes_tight_delta(self):
        rep = validate_smoothness(make_uniform(1.0), 0.9)
        assert rep.passes and rep.violations == ()
        assert rep.min_density == rep.max_density == 1.0

    def test_ramp_fails_when_delta_above_min_density(self):
        rep = validate_smoothness(ramp(), 0.6)
        assert not rep.passes
        assert any("min density" in v for v in rep.violations)

    def test_ramp_passes_smaller_delta(self):
        rep = validate_smoothness(ramp(), 0.4)
        assert rep.passes
        assert rep.min_density == pytest.approx(0.5)
        assert rep.max_density == pytest.approx(1.5)

    def test_delta_domain(self):
        for bad in (0.0, 1.0, -0.2, 1.3):
            with pytest.raises(ValueError):
                validate_smoothness(make_uniform(1.0), bad)

    def test_passes_iff_no_violations(self):
        for delta in (0.05, 0.3, 0.49, 0.6, 0.8):
            rep = validate_smoothness(ramp(), delta)
            assert rep.passes == (len(rep.violations) == 0)


@settings(max_examples=40, deadline=None)
@given(distributions())
def test_distribution_invariants(d):
    m = d.upper_bound
    assert d.cdf(0.0) == 0.0
    assert d.cdf(m) == 1.0
    grid = np.linspace(0.0, m, 1000)
    vals = d.cdf(grid)
    assert np.all(np.diff(vals) >= 0.0)
    # density integrates to 1 (Simpson aligned to the knots is exact here)
    assert simpson_between_knots(d.pdf, d.knots) == pytest.approx(1.0, abs=1e-8)
    # mean equals the Simpson integral of v * pdf(v)
    ref_mean = simpson_between_knots(lambda v: v * d.pdf(v), d.knots)
    assert d.mean == pytest.approx(ref_mean, abs=1e-8)


@settings(max_examples=15, deadline=None)
@given(distributions(), st.integers(0, 2**32 - 1))
def test_sampler_stays_in_support(d, seed):
    xs = sample(d, 256, np.random.default_rng(seed))
    assert np.all(xs >= 0.0) and np.all(xs <= d.upper_bound)
