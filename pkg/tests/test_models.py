import math

import numpy as np
import pytest
from scipy import special, stats

import priorsample as ps
from priorsample import models
from priorsample.models import (
    BetaBernoulliModel,
    ConstantModel,
    GaussianGaussianModel,
    UniformGaussianModel,
    oracle_prior_integrals,
)


def test_gaussian_fig1_posterior():
    m = GaussianGaussianModel(0, 1, 1, 1, 1)
    assert m.post_mean == pytest.approx(0.5, rel=1e-15)
    assert m.post_var == pytest.approx(0.5, rel=1e-15)


def test_gaussian_fig2_posterior():
    m = GaussianGaussianModel(0, 1, 1, 10**4, 1)
    assert m.post_mean == pytest.approx(1e4 / (1e4 + 1), rel=1e-14)
    assert m.post_var == pytest.approx(1 / 10001, rel=1e-14)


def test_gaussian_dominant_prior():
    m = GaussianGaussianModel(0.0, 0.01, 1, 1, 1)
    assert abs(m.post_mean) < 0.001


def test_gaussian_cdf_populated(gg):
    assert gg.analytic_posterior_cdf(0.5, 0) == pytest.approx(0.5)
    assert gg.analytic_marginal_moments(0) == pytest.approx((0.5, 0.5))


def test_beta_no_data_is_prior():
    m = BetaBernoulliModel(1, 1, 0, 0)
    x = np.linspace(0, 1, 11)
    np.testing.assert_allclose(m.posterior_cdf(x), x, atol=1e-15)


def test_beta_conjugate_update():
    m = BetaBernoulliModel(1, 1, 2, 2)
    assert (m.post_alpha, m.post_beta) == (3, 1)
    assert m.post_mean == 0.75


def test_beta_loglik_endpoints():
    m = BetaBernoulliModel(1, 1, 2, 3)
    ll = m.log_lik(np.array([0.0, 1.0, 0.5]))
    assert ll[0] == -np.inf and ll[1] == -np.inf
    assert ll[2] == pytest.approx(3 * math.log(0.5))
    # no failures recorded: theta = 1 is fine, no NaN from 0 * log 0
    ll = BetaBernoulliModel(1, 1, 2, 2).log_lik(np.array([1.0]))
    assert ll[0] == 0.0


def test_beta_rejects_bad_counts():
    with pytest.raises(ValueError):
        models.make_beta_bernoulli(1, 1, 3, 2)


# -- oracle integrals ---------------------------------------------------------

def test_oracle_constant_likelihood():
    k = 2.5
    m = ConstantModel(1, math.log(k))
    r = oracle_prior_integrals(m, upper=0.3)
    assert r.f == pytest.approx(k, rel=1e-9)
    assert r.f2 == pytest.approx(k * k, rel=1e-9)
    assert r.f2A == pytest.approx(k * k * stats.norm.cdf(0.3), rel=1e-9)


def test_oracle_gaussian_convolution(gg):
    r = oracle_prior_integrals(gg)
    # Pi0(f) is the N(0, 2) density at x = 1
    assert r.f == pytest.approx(stats.norm.pdf(1.0, 0.0, math.sqrt(2.0)), rel=1e-9)
    # f**2 = N(theta; x, 1/2) / (2 sqrt(pi)), so Pi0(f**2) = N(x; 0, 3/2) / (2 sqrt(pi))
    assert r.f2 == pytest.approx(stats.norm.pdf(1.0, 0.0, math.sqrt(1.5)) / (2 * math.sqrt(math.pi)), rel=1e-9)


def test_oracle_beta_integral():
    for s, t in [(0, 0), (2, 2), (3, 7), (10, 12)]:
        r = oracle_prior_integrals(BetaBernoulliModel(1, 1, s, t))
        assert r.f == pytest.approx(special.beta(s + 1, t - s + 1), rel=1e-9)
        assert r.f2 == pytest.approx(special.beta(2 * s + 1, 2 * (t - s) + 1), rel=1e-9)


def test_oracle_sharp_gaussian_closed_form():
    m = GaussianGaussianModel(0, 1, 1, 10**4, 1)
    s = m.lik_sd
    r = oracle_prior_integrals(m)
    assert r.f == pytest.approx(stats.norm.pdf(1, 0, math.sqrt(1 + s * s)), rel=1e-8)


@pytest.mark.parametrize("model", [
    GaussianGaussianModel(0, 1, 1, 1, 1),
    GaussianGaussianModel(0.3, 2, 0.5, 7, -1),
    BetaBernoulliModel(2, 3, 4, 9),
    UniformGaussianModel(-1, 3, 1, 100, 1),
    ConstantModel(),
])
@pytest.mark.parametrize("upper", [-1.0, 0.0, 0.4, 0.9, 2.0])
def test_oracle_cauchy_schwarz(model, upper):
    r = oracle_prior_integrals(model, upper)
    assert r.f2 >= r.f * r.f * (1 - 1e-9)
    assert r.f2 >= r.f2A * (1 - 1e-12)
    assert 0 <= r.fA <= r.f * (1 + 1e-12)


def test_oracle_rejects_non_bundled_model():
    spec = ps.ModelSpec(1, lambda k, g: g.random((k, 1)), lambda th: np.zeros(th.shape[0]))
    with pytest.raises(TypeError):
        oracle_prior_integrals(spec)


@pytest.mark.parametrize("name,model", [
    ("gaussian", models.make_gaussian_gaussian()),
    ("beta", models.make_beta_bernoulli(1, 1, 2, 2)),
    ("uniform", models.make_uniform_gaussian()),
    ("constant", models.make_constant()),
])
def test_bundled_models_ks(name, model, cdf_of):
    ks = [ps.ks_distance(ps.lips(model, 10**5, s), cdf_of(model)) for s in range(10)]
    assert np.median(ks) < 0.05


# -- latent expansion ---------------------------------------------------------

def test_latent_chain_matches_direct(cdf_of):
    spec = models.expand_latent(models.gaussian_chain(x=1.0))
    assert spec.dim == 2 and spec.param_dims == 1
    post = ps.lips(spec, 10**5, 0).marginal(range(spec.param_dims))
    direct = models.make_gaussian_gaussian(0, 1, math.sqrt(2), 1, 1.0)
    assert ps.ks_distance(post, cdf_of(direct)) < 0.05


def _base_gaussian():
    return models.make_gaussian_gaussian(0, 1, 1, 1, 1.0)


def test_latent_irrelevant_y_equals_base():
    base = _base_gaussian()
    lat = models.LatentExpansionModel(
        1, 1,
        base_prior=lambda k, g: g.standard_normal((k, 1)),
        latent_sampler=lambda th, g: g.standard_normal(th.shape),
        conditional_log_likelihood=lambda th, y: base.log_likelihood(th),
    )
    a = ps.lips(models.expand_latent(lat), 5000, 2)
    b = ps.lips(base, 5000, 2)
    assert np.array_equal(a.marginal([0]).draws, b.draws)
    assert a.weights.tobytes() == b.weights.tobytes()


def test_latent_degenerate_equals_base():
    base = _base_gaussian()
    lat = models.LatentExpansionModel(
        1, 1,
        base_prior=lambda k, g: g.standard_normal((k, 1)),
        latent_sampler=lambda th, g: th.copy(),
        conditional_log_likelihood=lambda th, y: base.log_likelihood(y),
    )
    a = ps.lips(models.expand_latent(lat), 5000, 2)
    b = ps.lips(base, 5000, 2)
    assert a.weights.tobytes() == b.weights.tobytes()
    assert ps.posterior_probability(a, ps.half_line(0.5)) == ps.posterior_probability(b, ps.half_line(0.5))


# -- registry -----------------------------------------------------------------

def test_build_model_aliases_and_errors():
    m = models.build_model("gaussian-gaussian", {"x": 2.0, "t": 3})
    assert m.source.xbar == 2.0 and m.source.t == 3
    with pytest.raises(KeyError):
        models.build_model("nope")
    with pytest.raises(KeyError):
        models.build_model("beta-bernoulli", {"xbar": 1})
    assert models.build_model("latent-gaussian-chain", {"x": 0.5}).param_dims == 1


def test_oracle_d2_sharp_beta_closed_form():
    # Pi0(f^2) / Pi0(f)^2 = B(2s+1, 2(t-s)+1) / B(s+1, t-s+1)^2; the raw integrals underflow here
    m = BetaBernoulliModel(1, 1, 300, 1000)
    expect = special.betaln(601, 1401) - 2 * special.betaln(301, 701)
    assert models.oracle_d2(m) == pytest.approx(expect, rel=1e-9)


def test_oracle_gaussian_sharp_ratio_closed_form():
    for t in (10, 1000, 10**6):
        m = GaussianGaussianModel(t=t)
        s = m.lik_sd
        expect = (stats.norm.pdf(1, 0, math.sqrt(1 + s * s / 2)) / (2 * math.sqrt(math.pi) * s)
                  / stats.norm.pdf(1, 0, math.sqrt(1 + s * s)) ** 2)
        assert math.exp(models.oracle_d2(m)) == pytest.approx(expect, rel=1e-8)
