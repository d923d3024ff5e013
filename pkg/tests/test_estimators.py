import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from tailfit.errors import ConfigurationError, DomainError, IllConditionedError, NumericError
from tailfit.estimators import (
    Power,
    RegressionConfig,
    Uniform,
    attach_response,
    build_design,
    dedh,
    design_columns,
    format_weight,
    hill,
    parse_weight,
    pickands,
    wls_estimate,
    wls_fit,
)
from tailfit.models import OrderedSample, StrictPareto, TrigSeries, sample, stream
from tailfit.simulation import quantile_grid_sample

from conftest import cofactor_inverse

FOUR = OrderedSample([1.0, 2.0, 4.0, 8.0])
LN2 = math.log(2.0)


class TestBaselinesHandValues:
    def test_hill(self):
        # (log 8 + log 4) / 2 - log 2
        assert hill(FOUR, 2) == pytest.approx(1.5 * LN2, rel=1e-12)
        assert hill(FOUR, 1) == pytest.approx(LN2, rel=1e-12)

    def test_pickands(self):
        # (X4 - X3) / (X3 - X1) = 4 / 3
        assert pickands(FOUR, 1) == pytest.approx(math.log2(4.0 / 3.0), rel=1e-12)

    def test_dedh(self):
        # excesses (2 ln2, ln2): M1 = 1.5 ln2, M2 = 2.5 ln2^2, 1 - M1^2/M2 = 0.1
        assert dedh(FOUR, 2) == pytest.approx(1.5 * LN2 + 1.0 - 5.0, rel=1e-12)

    def test_k_bounds(self):
        for fn, bad in ((hill, 4), (dedh, 4), (pickands, 2), (hill, 0)):
            with pytest.raises(DomainError):
                fn(FOUR, bad)

    def test_nonpositive_threshold(self):
        with pytest.raises(NumericError):
            hill(OrderedSample([-1.0, 0.0, 2.0, 3.0]), 2)

    def test_dedh_degenerate(self):
        with pytest.raises(NumericError):
            dedh(OrderedSample([1.0, 2.0, 2.0, 2.0]), 2)
        # a single excess gives M1^2 == M2
        with pytest.raises(NumericError):
            dedh(OrderedSample([1.0, 2.0, 3.0, 6.0]), 1)

    def test_pickands_degenerate(self):
        with pytest.raises(NumericError):
            pickands(OrderedSample([1.0, 1.0, 1.0, 1.0]), 1)


class TestBaselineInvariance:
    @pytest.fixture
    def smp(self):
        return sample(StrictPareto(1.0), 2000, stream(11))

    @pytest.mark.parametrize("c", [1e-3, 0.5, 7.0, 1e6])
    def test_hill_scale(self, smp, c):
        assert hill(smp.scaled(c), 100) == pytest.approx(hill(smp, 100), rel=1e-12)

    @pytest.mark.parametrize("c", [1e-3, 7.0])
    def test_pickands_scale_and_shift(self, smp, c):
        base = pickands(smp, 100)
        assert pickands(smp.scaled(c), 100) == pytest.approx(base, rel=1e-11)
        assert pickands(OrderedSample(smp.values + 3.0), 100) == pytest.approx(base, rel=1e-9)

    def test_dedh_scale(self, smp):
        assert dedh(smp.scaled(9.0), 100) == pytest.approx(dedh(smp, 100), rel=1e-11)


class TestWeights:
    def test_parse_and_format(self):
        assert parse_weight("uniform") == Uniform()
        assert parse_weight("pow:0.002,1") == Power(0.002, 1.0)
        assert parse_weight("pow:0.5") == Power(0.5, 1.0)
        assert format_weight(Power(0.002, 1.0)) == "pow:0.002,1.0"
        assert parse_weight(format_weight(Power(0.3, 2.5))) == Power(0.3, 2.5)

    @pytest.mark.parametrize("text", ["", "pow:", "pow:a,b", "exp:1", "pow:1,2,3", "pow:-1,1"])
    def test_bad(self, text):
        with pytest.raises(ConfigurationError):
            parse_weight(text)

    def test_values(self):
        np.testing.assert_allclose(Power(1 / 500, 1)(np.array([0.5, 0.1])), [0.001, 0.0002])
        np.testing.assert_array_equal(Uniform()(np.array([0.2, 0.3])), [1.0, 1.0])


class TestConfig:
    @pytest.mark.parametrize("a,b", [(0.0, 0.4), (0.4, 0.4), (0.5, 0.4), (0.1, 1.0)])
    def test_bad_bounds(self, a, b):
        with pytest.raises(ConfigurationError):
            RegressionConfig(a, b)

    @pytest.mark.parametrize("p", [0, -1, 1.5, True])
    def test_bad_ptilde(self, p):
        with pytest.raises(ConfigurationError):
            RegressionConfig(p_tilde=p)

    def test_bad_response(self):
        with pytest.raises(ConfigurationError):
            RegressionConfig(response="mid")


class TestDesign:
    def test_small_grid(self):
        d = build_design(10, RegressionConfig(0.25, 0.65, 1, Uniform()))
        assert (d.j_lo, d.j_hi, d.rows) == (3, 6, 4)
        np.testing.assert_allclose(d.s, [0.3, 0.4, 0.5, 0.6], rtol=1e-15)

    def test_reference_grid(self):
        d = build_design(5000, RegressionConfig())
        assert (d.j_lo, d.j_hi, d.rows) == (5, 2000, 1996)

    def test_too_few_rows(self):
        with pytest.raises(ConfigurationError):
            build_design(10, RegressionConfig(0.25, 0.3, 3, Uniform()))

    def test_columns(self):
        x = design_columns(np.array([0.25]), 2)
        np.testing.assert_allclose(x[0], [math.log(4.0), 1.0, 0.0, -2.0], atol=1e-15)

    def test_gram_matches_float(self):
        d = build_design(500, RegressionConfig(0.01, 0.4, 2))
        x = d.x_cols
        np.testing.assert_allclose(np.asarray(d.gram, float), x.T @ (d.w[:, None] * x), rtol=1e-12)

    def test_read_only(self):
        d = build_design(100, RegressionConfig(0.05, 0.5))
        with pytest.raises(ValueError):
            d.w[0] = 0.0


class TestAttachResponse:
    def test_step_rule(self):
        vals = np.arange(1.0, 11.0)  # X_{i,10} = i
        d = attach_response(build_design(10, RegressionConfig(0.25, 0.65, 1, Uniform())),
                            OrderedSample(vals))
        # j = 3 -> X_{7,10} = 7
        assert d.y[0] == pytest.approx(math.log(7.0), rel=1e-15)
        np.testing.assert_allclose(d.y, np.log([7.0, 6.0, 5.0, 4.0]), rtol=1e-15)

    def test_jth_largest_rule(self):
        vals = np.arange(1.0, 11.0)
        cfg = RegressionConfig(0.25, 0.65, 1, Uniform(), "jth_largest")
        d = attach_response(build_design(10, cfg), OrderedSample(vals))
        np.testing.assert_allclose(d.y, np.log([8.0, 7.0, 6.0, 5.0]), rtol=1e-15)

    def test_nonpositive_value(self):
        vals = np.array([-3.0, -2.0, -1.0, 0.0, 1.0, 2.0, 3.0, 4.0, 5.0, 6.0])
        design = build_design(10, RegressionConfig(0.25, 0.65, 1, Uniform()))
        with pytest.raises(NumericError, match=r"X_\(4,10\)"):
            attach_response(design, OrderedSample(vals))

    def test_size_mismatch(self):
        with pytest.raises(ConfigurationError):
            attach_response(build_design(10, RegressionConfig(0.25, 0.65, 1, Uniform())),
                            OrderedSample(np.arange(1.0, 12.0)))

    def test_unattached_fit(self):
        with pytest.raises(ConfigurationError):
            wls_fit(build_design(10, RegressionConfig(0.25, 0.65, 1, Uniform())))


def _noiseless_fit(alpha, theta, p_tilde, n, weight):
    model = TrigSeries(alpha, theta)
    design = build_design(n, RegressionConfig(0.01, 0.45, p_tilde, weight))
    return wls_fit(design.with_response(model.log_upper_quantile(design.s)))


class TestExactRecovery:
    @given(
        alpha=st.floats(0.2, 20.0),
        theta=st.lists(st.floats(-0.5, 0.5), min_size=1, max_size=3),
        extra=st.integers(0, 2),
        weighted=st.booleans(),
    )
    @settings(max_examples=100, deadline=None)
    def test_recovers_alpha_and_theta(self, alpha, theta, extra, weighted):
        p = len(theta) - 1
        p_tilde = max(p, 1) + extra
        fit = _noiseless_fit(alpha, tuple(theta), p_tilde, 1000,
                             Power(0.002, 1.0) if weighted else Uniform())
        assert abs(fit.alpha_hat - alpha) <= 1e-9
        padded = np.zeros(p_tilde + 1)
        padded[:len(theta)] = theta
        np.testing.assert_allclose(fit.theta_hat, padded, atol=1e-8)

    @pytest.mark.parametrize("response", ["step", "jth_largest"])
    def test_quantile_grid_sample(self, response):
        model = TrigSeries(1.5, (0.2, 0.05))
        cfg = RegressionConfig(0.2, 0.8, 2, Uniform(), response)
        fit = wls_estimate(quantile_grid_sample(model, 400, response), cfg)
        assert fit.alpha_hat == pytest.approx(1.5, abs=1e-9)


@pytest.fixture(scope="module")
def pareto_5000():
    return sample(StrictPareto(1.0), 5000, stream(3))


class TestInvariance:
    @pytest.fixture
    def smp(self, pareto_5000):
        return pareto_5000

    @pytest.mark.parametrize("c", [7.0, 1e-4, 500.0])
    def test_weight_scale(self, smp, c):
        w = Power(0.002, 1.0)
        base = wls_estimate(smp, RegressionConfig(weight=w))
        scaled = wls_estimate(smp, RegressionConfig(weight=w.scaled(c)))
        assert abs(scaled.alpha_hat - base.alpha_hat) <= 1e-12 * abs(base.alpha_hat)
        np.testing.assert_allclose(scaled.theta_hat, base.theta_hat, rtol=1e-11, atol=1e-13)

    def test_uniform_scale(self, smp):
        base = wls_estimate(smp, RegressionConfig(weight=Uniform()))
        scaled = wls_estimate(smp, RegressionConfig(weight=Uniform().scaled(7.0)))
        assert abs(scaled.alpha_hat - base.alpha_hat) <= 1e-12 * abs(base.alpha_hat)

    @pytest.mark.parametrize("c", [0.01, 3.0, 1e5])
    def test_data_scale(self, smp, c):
        cfg = RegressionConfig(p_tilde=2)
        base = wls_estimate(smp, cfg)
        scaled = wls_estimate(smp.scaled(c), cfg)
        assert abs(scaled.alpha_hat - base.alpha_hat) <= 1e-12 * abs(base.alpha_hat)
        assert scaled.theta_hat[0] == pytest.approx(base.theta_hat[0] + math.log(c), abs=1e-10)


class TestCofactorOracle:
    @pytest.mark.parametrize("n,a,b,p_tilde,weight", [
        (20, 0.1, 0.6, 1, Uniform()),
        (20, 0.05, 0.6, 2, Power(0.002, 1.0)),
        (24, 0.125, 0.5, 2, Power(1.0, 2.0)),
        (8, 0.125, 0.75, 1, Power(3.0, 0.5)),
    ])
    def test_matches_oracle(self, rng, n, a, b, p_tilde, weight):
        cfg = RegressionConfig(a, b, p_tilde, weight)
        design = build_design(n, cfg)
        assert design.rows <= 12
        for _ in range(10):
            smp = OrderedSample(np.exp(rng.standard_normal(n)))
            d = attach_response(design, smp)
            x, w, y = d.x_cols, d.w, d.y
            beta = cofactor_inverse(x.T @ (w[:, None] * x)) @ (x.T @ (w * y))
            fit = wls_fit(d)
            np.testing.assert_allclose(fit.coefficients, beta, rtol=1e-9, atol=1e-9)

    def test_ill_conditioned(self):
        # five nearly coincident rows cannot separate four cosine terms
        design = build_design(1000, RegressionConfig(0.1, 0.104, 3, Uniform()))
        d = design.with_response(np.zeros(design.rows))
        with pytest.raises(IllConditionedError) as info:
            wls_fit(d)
        assert info.value.condition_estimate > 1e12
