import math
import warnings

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import stats

import priorsample as ps
from priorsample import diagnostics as dg
from priorsample import models
from priorsample.types import DrawBatch, TotalUnderflow

# Quadrature oracle for prior N(0, 1), likelihood N(1; theta, 1):
# log(Pi0(f^2) / Pi0(f)^2), frozen from models.oracle_d2 and the closed form.
D2_GAUSS_X1 = 0.31050770289255736
# n Var limit for A = (-inf, 0.5]; Pi1(A) = 1/2 so it reduces to exp(D2) / 4.
AVAR_GAUSS_HALF = 0.34102937618897405


def test_frozen_oracles_match_quadrature(gg):
    assert models.oracle_d2(gg) == pytest.approx(D2_GAUSS_X1, rel=1e-9)
    assert models.oracle_asymptotic_variance(gg, 0.5) == pytest.approx(AVAR_GAUSS_HALF, rel=1e-9)
    closed = math.log(stats.norm.pdf(1, 0, math.sqrt(1.5)) / (2 * math.sqrt(math.pi))) \
        - 2 * math.log(stats.norm.pdf(1, 0, math.sqrt(2)))
    assert closed == pytest.approx(D2_GAUSS_X1, rel=1e-12)


# -- ess ----------------------------------------------------------------------

def test_ess_examples():
    assert dg.ess(np.full(100, 0.01)) == pytest.approx(100, rel=1e-13)
    assert dg.ess([1.0, 0.0, 0.0]) == 1.0
    assert dg.ess([0.5, 0.25, 0.25]) == pytest.approx(8 / 3, rel=1e-15)


# -- d2_hat -------------------------------------------------------------------

def test_d2_constant_is_zero():
    assert dg.d2_hat(np.zeros(1000)) == pytest.approx(0.0, abs=1e-12)


def test_d2_gaussian(gg):
    post = ps.lips(gg, 10**6, 0)
    assert abs(dg.d2_hat(post.log_likelihoods) - D2_GAUSS_X1) < 0.02


@settings(max_examples=60, deadline=None)
@given(st.lists(st.floats(-50, 50), min_size=2, max_size=100), st.floats(-1e3, 1e3))
def test_d2_shift_invariant(ll, shift):
    assert dg.d2_hat(np.asarray(ll) + shift) == pytest.approx(dg.d2_hat(ll), abs=1e-9)


def test_d2_is_log_n_over_ess():
    ll = np.random.default_rng(0).standard_normal(500) * 3
    assert dg.d2_hat(ll) == math.log(500) - math.log(dg.ess(ps.normalize_weights(ll)))


def test_d2_total_underflow():
    with pytest.raises(TotalUnderflow):
        dg.d2_hat([-np.inf] * 3)


# -- variance bound -----------------------------------------------------------

def test_variance_bound_examples():
    assert dg.variance_bound(0.0) == 2.0
    assert dg.variance_bound(math.log(2)) == pytest.approx(4.0, rel=1e-15)
    assert dg.variance_bound(D2_GAUSS_X1) == pytest.approx(2.728, abs=1e-3)
    with pytest.raises(ValueError):
        dg.variance_bound(-0.1)


# -- asymptotic variance ------------------------------------------------------

def test_avar_whole_and_empty_set(gg):
    post = ps.lips(gg, 10**4, 0)
    n = post.n
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        assert dg.asymptotic_variance_hat(post.log_likelihoods, np.ones(n, bool)) == pytest.approx(0.0, abs=1e-12)
        assert dg.asymptotic_variance_hat(post.log_likelihoods, np.zeros(n, bool)) == 0.0


def test_avar_gaussian_matches_quadrature(gg):
    post = ps.lips(gg, 10**6, 0)
    v = dg.asymptotic_variance_hat(post.log_likelihoods, ps.half_line(0.5)(post.draws))
    assert v == pytest.approx(AVAR_GAUSS_HALF, rel=0.05)


def test_avar_shift_invariant(gg):
    post = ps.lips(gg, 5000, 1)
    mask = post.draws[:, 0] <= 0.2
    a = dg.asymptotic_variance_hat(post.log_likelihoods, mask)
    b = dg.asymptotic_variance_hat(post.log_likelihoods + 123.0, mask)
    assert a == pytest.approx(b, rel=1e-10)


def test_avar_below_bound(gg, bb):
    for model in (gg, bb):
        post = ps.lips(model, 10**5, 3)
        bound = dg.variance_bound(dg.d2_hat(post.log_likelihoods))
        for a in np.linspace(-1, 2, 13):
            v = dg.asymptotic_variance_hat(post.log_likelihoods, post.draws[:, 0] <= a)
            assert v <= bound * 1.1


def test_avar_clamps_negative_with_warning(monkeypatch):
    monkeypatch.setattr(dg, "variance_numerator", lambda ll, m: -1e-3)
    with pytest.warns(dg.NegativeVarianceWarning):
        assert dg.asymptotic_variance_hat([0.0, 0.0], [True, False]) == 0.0


def test_numerator_nonnegative_in_replications(gg, bb):
    rng = np.random.default_rng(1)
    results = []
    for r in range(200):
        model = gg if r % 2 else bb
        post = ps.lips(model, 500, ps.Stream(r, (9,)))
        a = rng.uniform(-0.5, 1.5) if model is gg else rng.uniform(0, 1)
        results.append(dg.variance_numerator(post.log_likelihoods, post.draws[:, 0] <= a) >= 0)
    assert np.mean(results) >= 0.99


# -- replication study --------------------------------------------------------

def test_replication_constant_model_binomial(const):
    # LIPS is plain frequency counting when f is constant: n Var = p (1 - p)
    v = dg.replication_variance_study(const, 1000, ps.half_line(0.0), 500, 0, workers=4)
    assert v == pytest.approx(0.25, rel=0.2)


def test_replication_gaussian_near_oracle(gg):
    v = dg.replication_variance_study(gg, 2000, ps.half_line(0.5), 1000, 0, workers=4)
    assert v == pytest.approx(AVAR_GAUSS_HALF, rel=0.2)
    assert v <= dg.variance_bound(D2_GAUSS_X1) * 1.1


def test_replication_independent_of_workers(gg):
    a = dg.replicate_lips(gg, 500, ps.half_line(0.5), 40, 3, workers=1)
    b = dg.replicate_lips(gg, 500, ps.half_line(0.5), 40, 3, workers=6)
    assert a[0].tobytes() == b[0].tobytes()


def test_replication_needs_30_reps(gg):
    with pytest.raises(ValueError):
        dg.replication_variance_study(gg, 100, ps.half_line(0.0), 10, 0)


# -- ks distance --------------------------------------------------------------

def test_ks_quantile_construction():
    n = 1000
    x = stats.norm.ppf((np.arange(1, n + 1) - 0.5) / n)
    post = ps.UnweightedPosterior(DrawBatch(x), np.arange(n))
    assert dg.ks_distance(post, stats.norm.cdf) <= 0.5 / n + 1e-12


def test_ks_point_mass_at_median():
    post = ps.weigh(DrawBatch(np.array([0.0])), [0.0])
    assert dg.ks_distance(post, stats.norm.cdf) == 0.5


def test_ks_invariant_under_increasing_map(gg, cdf_of):
    post = ps.lips(gg, 3000, 0)
    d = dg.ks_distance(post, cdf_of(gg))
    mapped = ps.weigh(DrawBatch(np.exp(post.draws)), post.log_likelihoods)
    d2 = dg.ks_distance(mapped, lambda y: gg.analytic_posterior_cdf(np.log(y), 0))
    assert d2 == pytest.approx(d, abs=1e-12)


def test_ks_handles_ties_and_zero_weights():
    draws = np.array([0.0, 0.0, 1.0, 5.0])
    post = ps.weigh(DrawBatch(draws), [0.0, 0.0, 0.0, -np.inf])
    cdf = lambda x: np.clip(np.asarray(x) / 2 + 0.25, 0, 1)
    # ECDF jumps to 2/3 at 0 and to 1 at 1; cdf(0) = 0.25, cdf(1) = 0.75
    assert dg.ks_distance(post, cdf) == pytest.approx(max(2 / 3 - 0.25, 0.25, 1 - 0.75, 0.75 - 2 / 3))


def test_ks_fig1(gg, cdf_of):
    assert dg.ks_distance(ps.slips(gg, 10**4, 10**4, 7), cdf_of(gg)) < 0.05


# -- report -------------------------------------------------------------------

def test_report_invariants(gg, cdf_of):
    post = ps.lips(gg, 10**4, 0)
    rep = dg.diagnose(post, [ps.half_line(0.5), ps.half_line(0.0)], cdf_of(gg))
    assert rep.variance_bound == pytest.approx(2 * math.exp(rep.d2_hat), rel=1e-12)
    assert 1 <= rep.ess <= rep.n
    assert len(rep.per_set_variance) == 2 and rep.per_set_variance[0]["set"] == "theta[0] <= 0.5"
    doc = rep.to_dict()
    assert set(doc) == {"ess", "d2_hat", "variance_bound", "per_set_variance", "ks", "n"}
    assert 0 <= doc["ks"] < 0.05


# -- high-information sweep ---------------------------------------------------

def _closed_form_ratio(t, xbar=1.0):
    s = 1 / math.sqrt(t)
    return (stats.norm.pdf(xbar, 0, math.sqrt(1 + s * s / 2)) / (2 * math.sqrt(math.pi) * s)
            / stats.norm.pdf(xbar, 0, math.sqrt(1 + s * s)) ** 2)


def test_sweep_tracks_quadrature_oracle():
    grid = [10, 100, 1000, 10_000]
    rows = dg.high_information_sweep(models.gaussian_family(), grid, 10**6, 0)
    for row in rows:
        oracle = math.exp(models.oracle_d2(models.GaussianGaussianModel(t=int(row["t"]))))
        assert oracle == pytest.approx(_closed_form_ratio(row["t"]), rel=1e-8)
        assert row["ratio"] == pytest.approx(oracle, rel=0.15)
        assert row["ess_frac"] == pytest.approx(1 / row["ratio"], rel=1e-12)


def test_sweep_stable_under_doubling_n():
    family = models.gaussian_family()
    reps = [dg.high_information_sweep(family, [100], 10**5, ps.Stream(r, (7,)))[0]["d2_hat"] for r in range(10)]
    se = float(np.std(reps, ddof=1))
    a = dg.high_information_sweep(family, [100], 10**5, 0)[0]["d2_hat"]
    b = dg.high_information_sweep(family, [100], 2 * 10**5, 0)[0]["d2_hat"]
    assert abs(a - b) < se


def test_sweep_ratio_inverse_to_prior_density():
    # halving the flat prior's density at the MLE doubles the ratio
    narrow = dg.high_information_sweep(lambda t: models.make_uniform_gaussian(-1, 3, 1, int(t), 1.0), [1000], 10**6, 0)
    wide = dg.high_information_sweep(lambda t: models.make_uniform_gaussian(-3, 5, 1, int(t), 1.0), [1000], 10**6, 0)
    assert wide[0]["ratio"] / narrow[0]["ratio"] == pytest.approx(2.0, rel=0.2)
    o_n = math.exp(models.oracle_d2(models.UniformGaussianModel(-1, 3, 1, 1000, 1.0)))
    o_w = math.exp(models.oracle_d2(models.UniformGaussianModel(-3, 5, 1, 1000, 1.0)))
    assert o_w / o_n == pytest.approx(2.0, rel=1e-6)


def test_sweep_reports_underflow_and_continues():
    def family(t):
        if t > 5:
            return ps.ModelSpec(1, lambda k, g: g.random((k, 1)), lambda th: np.full(th.shape[0], -np.inf))
        return models.make_gaussian_gaussian(t=int(t))

    rows = dg.high_information_sweep(family, [1, 10, 20], 1000, 0)
    assert rows[0]["error"] is None
    assert rows[1]["error"] and math.isnan(rows[2]["ratio"])


def test_sweep_grid_must_increase():
    with pytest.raises(ValueError):
        dg.high_information_sweep(models.gaussian_family(), [10, 5], 100, 0)
