"""Benchmark models with analytic posteriors, plus quadrature oracles.

Each parameter record (``GaussianGaussianModel`` and friends) knows its
prior density and scalar log-likelihood, which is what the quadrature
oracle integrates.  ``to_spec()`` turns a record into the array-based
:class:`~priorsample.types.ModelSpec` the samplers consume.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import asdict, dataclass
from typing import Callable, NamedTuple, Optional

import numpy as np
from scipy import integrate, special, stats

from .types import ModelSpec, PriorSampleError

LOG_2PI = math.log(2.0 * math.pi)


def rowwise(fn: Callable[[np.ndarray], float]) -> Callable[[np.ndarray], np.ndarray]:
    """Lift a per-vector log-likelihood to the array form ``ModelSpec`` expects."""

    def lifted(thetas: np.ndarray) -> np.ndarray:
        return np.array([fn(row) for row in np.atleast_2d(thetas)], dtype=float)

    return lifted


def _normal_loglik(xbar: float, theta: np.ndarray, sd: float) -> np.ndarray:
    # Far tails overflow z * z to inf, i.e. a log-likelihood of -inf: intended.
    with np.errstate(over="ignore"):
        z = (xbar - theta) / sd
        return -0.5 * LOG_2PI - math.log(sd) - 0.5 * z * z


@dataclass(frozen=True)
class GaussianGaussianModel:
    """Normal prior on a mean, ``t`` normal observations summarized by ``xbar``.

    The likelihood is the density of ``xbar ~ N(theta, obs_sd**2 / t)``.
    """

    prior_mean: float = 0.0
    prior_sd: float = 1.0
    obs_sd: float = 1.0
    t: int = 1
    xbar: float = 1.0

    def __post_init__(self):
        if self.prior_sd <= 0 or self.obs_sd <= 0:
            raise ValueError("standard deviations must be positive")
        if self.t < 1:
            raise ValueError(f"t must be >= 1, got {self.t}")

    @property
    def lik_sd(self) -> float:
        return self.obs_sd / math.sqrt(self.t)

    @property
    def post_var(self) -> float:
        return 1.0 / (1.0 / self.prior_sd**2 + self.t / self.obs_sd**2)

    @property
    def post_mean(self) -> float:
        return self.post_var * (self.prior_mean / self.prior_sd**2 + self.t * self.xbar / self.obs_sd**2)

    def log_lik(self, theta):
        return _normal_loglik(self.xbar, np.asarray(theta, dtype=float), self.lik_sd)

    def prior_pdf(self, theta):
        return stats.norm.pdf(theta, self.prior_mean, self.prior_sd)

    def prior_cdf(self, a: float) -> float:
        return float(stats.norm.cdf(a, self.prior_mean, self.prior_sd))

    def posterior_cdf(self, x, coord: int = 0):
        return stats.norm.cdf(x, self.post_mean, math.sqrt(self.post_var))

    def window(self) -> tuple[float, float, list[float]]:
        # The f and f**2 integrands are Gaussians narrower than the prior.
        lo = min(self.prior_mean, self.xbar) - 40.0 * self.prior_sd
        hi = max(self.prior_mean, self.xbar) + 40.0 * self.prior_sd
        return lo, hi, _peak_points(self.post_mean, math.sqrt(self.post_var)) + [self.xbar]

    def to_spec(self) -> ModelSpec:
        mu, sd = self.prior_mean, self.prior_sd

        def prior(count, gen):
            return mu + sd * gen.standard_normal((count, 1))

        def loglik(thetas):
            return self.log_lik(np.asarray(thetas)[:, 0])

        return ModelSpec(
            dim=1,
            prior_sampler=prior,
            log_likelihood=loglik,
            analytic_posterior_cdf=self.posterior_cdf,
            analytic_marginal_moments=lambda coord=0: (self.post_mean, self.post_var),
            name="gaussian-gaussian",
            params=asdict(self),
            source=self,
        )


@dataclass(frozen=True)
class BetaBernoulliModel:
    alpha: float = 1.0
    beta: float = 1.0
    successes: int = 0
    trials: int = 0

    def __post_init__(self):
        if self.alpha <= 0 or self.beta <= 0:
            raise ValueError("alpha and beta must be positive")
        if not 0 <= self.successes <= self.trials:
            raise ValueError("need 0 <= successes <= trials")

    @property
    def post_alpha(self) -> float:
        return self.alpha + self.successes

    @property
    def post_beta(self) -> float:
        return self.beta + self.trials - self.successes

    @property
    def post_mean(self) -> float:
        return self.post_alpha / (self.post_alpha + self.post_beta)

    @property
    def post_var(self) -> float:
        a, b = self.post_alpha, self.post_beta
        return a * b / ((a + b) ** 2 * (a + b + 1))

    def log_lik(self, theta):
        theta = np.asarray(theta, dtype=float)
        with np.errstate(divide="ignore"):
            return special.xlogy(self.successes, theta) + special.xlog1py(
                self.trials - self.successes, -theta
            )

    def prior_pdf(self, theta):
        return stats.beta.pdf(theta, self.alpha, self.beta)

    def prior_cdf(self, a: float) -> float:
        return float(stats.beta.cdf(a, self.alpha, self.beta))

    def posterior_cdf(self, x, coord: int = 0):
        return stats.beta.cdf(x, self.post_alpha, self.post_beta)

    def window(self) -> tuple[float, float, list[float]]:
        return 0.0, 1.0, _peak_points(self.post_mean, math.sqrt(self.post_var))

    def to_spec(self) -> ModelSpec:
        a, b = self.alpha, self.beta

        def prior(count, gen):
            return gen.beta(a, b, (count, 1))

        def loglik(thetas):
            return self.log_lik(np.asarray(thetas)[:, 0])

        return ModelSpec(
            dim=1,
            prior_sampler=prior,
            log_likelihood=loglik,
            analytic_posterior_cdf=self.posterior_cdf,
            analytic_marginal_moments=lambda coord=0: (self.post_mean, self.post_var),
            name="beta-bernoulli",
            params=asdict(self),
            source=self,
        )


@dataclass(frozen=True)
class UniformGaussianModel:
    """Flat prior on ``[lower, upper]`` with the Gaussian mean likelihood.

    Widening the interval lowers the prior density at the MLE, which is the
    knob the high-information checks turn.
    """

    lower: float = -1.0
    upper: float = 3.0
    obs_sd: float = 1.0
    t: int = 1
    xbar: float = 1.0

    def __post_init__(self):
        if not self.upper > self.lower:
            raise ValueError("need lower < upper")
        if self.obs_sd <= 0 or self.t < 1:
            raise ValueError("need obs_sd > 0 and t >= 1")

    @property
    def lik_sd(self) -> float:
        return self.obs_sd / math.sqrt(self.t)

    def _truncnorm(self):
        s = self.lik_sd
        return stats.truncnorm((self.lower - self.xbar) / s, (self.upper - self.xbar) / s, loc=self.xbar, scale=s)

    def log_lik(self, theta):
        return _normal_loglik(self.xbar, np.asarray(theta, dtype=float), self.lik_sd)

    def prior_pdf(self, theta):
        return stats.uniform.pdf(theta, self.lower, self.upper - self.lower)

    def prior_cdf(self, a: float) -> float:
        return float(stats.uniform.cdf(a, self.lower, self.upper - self.lower))

    def posterior_cdf(self, x, coord: int = 0):
        return self._truncnorm().cdf(x)

    def window(self) -> tuple[float, float, list[float]]:
        s = self.lik_sd
        lo = max(self.lower, self.xbar - 40.0 * s)
        hi = min(self.upper, self.xbar + 40.0 * s)
        if lo >= hi:
            lo, hi = self.lower, self.upper
        return lo, hi, _peak_points(self.xbar, s)

    def to_spec(self) -> ModelSpec:
        lo, hi = self.lower, self.upper

        def prior(count, gen):
            return gen.uniform(lo, hi, (count, 1))

        def loglik(thetas):
            return self.log_lik(np.asarray(thetas)[:, 0])

        tn = self._truncnorm()
        return ModelSpec(
            dim=1,
            prior_sampler=prior,
            log_likelihood=loglik,
            analytic_posterior_cdf=self.posterior_cdf,
            analytic_marginal_moments=lambda coord=0: (float(tn.mean()), float(tn.var())),
            name="uniform-gaussian",
            params=asdict(self),
            source=self,
        )


@dataclass(frozen=True)
class ConstantModel:
    """Standard normal prior with a likelihood that ignores the parameter."""

    dim: int = 1
    log_value: float = 0.0

    def log_lik(self, theta):
        return np.full(np.shape(theta), self.log_value, dtype=float)

    def prior_pdf(self, theta):
        return stats.norm.pdf(theta)

    def prior_cdf(self, a: float) -> float:
        return float(stats.norm.cdf(a))

    def posterior_cdf(self, x, coord: int = 0):
        return stats.norm.cdf(x)

    def window(self) -> tuple[float, float, list[float]]:
        return -40.0, 40.0, [0.0]

    def to_spec(self) -> ModelSpec:
        d, v = self.dim, self.log_value

        def prior(count, gen):
            return gen.standard_normal((count, d))

        def loglik(thetas):
            return np.full(np.asarray(thetas).shape[0], v, dtype=float)

        return ModelSpec(
            dim=d,
            prior_sampler=prior,
            log_likelihood=loglik,
            analytic_posterior_cdf=self.posterior_cdf,
            analytic_marginal_moments=lambda coord=0: (0.0, 1.0),
            name="constant",
            params=asdict(self),
            source=self,
        )


def make_gaussian_gaussian(prior_mean=0.0, prior_sd=1.0, obs_sd=1.0, t=1, xbar=1.0) -> ModelSpec:
    return GaussianGaussianModel(float(prior_mean), float(prior_sd), float(obs_sd), int(t), float(xbar)).to_spec()


def make_beta_bernoulli(alpha=1.0, beta=1.0, successes=0, trials=0) -> ModelSpec:
    return BetaBernoulliModel(float(alpha), float(beta), int(successes), int(trials)).to_spec()


def make_uniform_gaussian(lower=-1.0, upper=3.0, obs_sd=1.0, t=1, xbar=1.0) -> ModelSpec:
    return UniformGaussianModel(float(lower), float(upper), float(obs_sd), int(t), float(xbar)).to_spec()


def make_constant(dim=1, log_value=0.0) -> ModelSpec:
    return ConstantModel(int(dim), float(log_value)).to_spec()


def gaussian_family(prior_mean=0.0, prior_sd=1.0, obs_sd=1.0, xbar=1.0) -> Callable[[float], ModelSpec]:
    """``t -> ModelSpec`` with a fixed prior and ``t`` observations averaging ``xbar``."""

    def family(t):
        return make_gaussian_gaussian(prior_mean, prior_sd, obs_sd, int(t), xbar)

    return family


# -- latent expansion --------------------------------------------------------

@dataclass(frozen=True)
class LatentExpansionModel:
    """A model whose likelihood integrates over latent variables.

    ``base_prior(count, gen)`` draws ``(count, param_dims)`` parameters,
    ``latent_sampler(theta, gen)`` draws ``(count, latent_dims)`` latents given
    them, and ``conditional_log_likelihood(theta, y)`` scores the data given
    both.
    """

    param_dims: int
    latent_dims: int
    base_prior: Callable[[int, np.random.Generator], np.ndarray]
    latent_sampler: Callable[[np.ndarray, np.random.Generator], np.ndarray]
    conditional_log_likelihood: Callable[[np.ndarray, np.ndarray], np.ndarray]
    marginal_posterior_cdf: Optional[Callable] = None
    name: str = "latent"


def expand_latent(model: LatentExpansionModel) -> ModelSpec:
    """Sample ``(theta, y)`` jointly and score with the conditional likelihood.

    The returned spec has ``param_dims`` set; query it through
    ``posterior.marginal(range(param_dims))`` (or any set that ignores the
    latent coordinates).
    """
    p, q = model.param_dims, model.latent_dims

    def prior(count, gen):
        theta = np.asarray(model.base_prior(count, gen), dtype=float).reshape(count, p)
        y = np.asarray(model.latent_sampler(theta, gen), dtype=float).reshape(count, q)
        return np.hstack([theta, y])

    def loglik(draws):
        draws = np.asarray(draws)
        return model.conditional_log_likelihood(draws[:, :p], draws[:, p:])

    return ModelSpec(
        dim=p + q,
        prior_sampler=prior,
        log_likelihood=loglik,
        analytic_posterior_cdf=model.marginal_posterior_cdf,
        name=model.name,
        params={"param_dims": p, "latent_dims": q},
        param_dims=p,
        source=model,
    )


def gaussian_chain(x=1.0, prior_mean=0.0, prior_sd=1.0, latent_sd=1.0, obs_sd=1.0) -> LatentExpansionModel:
    """``theta ~ N(prior_mean, prior_sd)``, ``y | theta ~ N(theta, latent_sd)``, ``x | y ~ N(y, obs_sd)``.

    Integrating ``y`` out leaves a Gaussian likelihood with
    ``sd = hypot(latent_sd, obs_sd)``, which gives the analytic marginal.
    """
    direct = GaussianGaussianModel(prior_mean, prior_sd, math.hypot(latent_sd, obs_sd), 1, x)

    def base_prior(count, gen):
        return prior_mean + prior_sd * gen.standard_normal((count, 1))

    def latent(theta, gen):
        return theta + latent_sd * gen.standard_normal(theta.shape)

    def cond(theta, y):
        return _normal_loglik(x, y[:, 0], obs_sd)

    return LatentExpansionModel(1, 1, base_prior, latent, cond, direct.posterior_cdf, "latent-gaussian-chain")


# -- oracles -----------------------------------------------------------------

class OracleError(PriorSampleError, RuntimeError):
    """Quadrature did not reach the requested tolerance."""


class PriorIntegrals(NamedTuple):
    f: float
    f2: float
    f2A: float
    fA: float


ORACLE_RTOL = 1e-8


def _peak_points(center: float, width: float) -> list[float]:
    # Breakpoints at growing multiples of the integrand width keep adaptive
    # quadrature from stepping over a peak much narrower than the window.
    return [center + k * width for k in (-40, -10, -4, -1, 0, 1, 4, 10, 40)]


def _quad(fn, lo, hi, points, rtol):
    if hi <= lo:
        return 0.0
    pts = sorted({p for p in points if lo < p < hi}) or None
    with warnings.catch_warnings():
        warnings.simplefilter("error", integrate.IntegrationWarning)
        try:
            val, err = integrate.quad(fn, lo, hi, points=pts, epsabs=0.0, epsrel=rtol * 1e-2, limit=500)
        except integrate.IntegrationWarning as exc:
            raise OracleError(f"quadrature failed on [{lo}, {hi}]: {exc}") from exc
    if err > rtol * abs(val) and val != 0.0:
        raise OracleError(f"quadrature error {err:g} exceeds rtol {rtol:g} of {val:g}")
    return val


def _scaled_integrals(model, upper: Optional[float], rtol: float) -> tuple[PriorIntegrals, float]:
    """Prior integrals with ``f`` divided by its peak value, and the log peak."""
    rec = model.source if isinstance(model, ModelSpec) else model
    if rec is None or not hasattr(rec, "window"):
        raise TypeError("oracle needs a one-dimensional bundled model")
    lo, hi, pts = rec.window()
    grid = np.union1d(np.linspace(lo, hi, 2001), np.clip(pts, lo, hi))
    peak = float(np.max(rec.log_lik(grid)))
    if not np.isfinite(peak):
        peak = 0.0

    def integrand(power):
        def fn(th):
            ll = float(rec.log_lik(np.array([th]))[0])
            return float(rec.prior_pdf(th)) * math.exp(power * (ll - peak))

        return fn

    f = _quad(integrand(1), lo, hi, pts, rtol)
    f2 = _quad(integrand(2), lo, hi, pts, rtol)
    if upper is None:
        f2A, fA = f2, f
    else:
        top = min(hi, float(upper))
        f2A = _quad(integrand(2), lo, top, pts, rtol)
        fA = _quad(integrand(1), lo, top, pts, rtol)
    return PriorIntegrals(f, f2, f2A, fA), peak


def oracle_prior_integrals(model, upper: Optional[float] = None, rtol: float = ORACLE_RTOL) -> PriorIntegrals:
    """Prior expectations of ``f``, ``f**2``, ``f**2 1_A`` and ``f 1_A``.

    ``A`` is the half-line ``(-inf, upper]`` (the whole line when ``upper``
    is None).  Computed by adaptive quadrature against the prior density;
    independent of every sampler in the package.  Very peaked likelihoods
    can underflow here; the ratio oracles below avoid that.
    """
    r, peak = _scaled_integrals(model, upper, rtol)
    s1, s2 = math.exp(peak), math.exp(2 * peak)
    return PriorIntegrals(r.f * s1, r.f2 * s2, r.f2A * s2, r.fA * s1)


def oracle_d2(model, rtol: float = ORACLE_RTOL) -> float:
    """``log(Pi0(f^2) / Pi0(f)^2)`` by quadrature."""
    r, _ = _scaled_integrals(model, None, rtol)
    return math.log(r.f2) - 2.0 * math.log(r.f)


def oracle_asymptotic_variance(model, upper: float, rtol: float = ORACLE_RTOL) -> float:
    """Limit of ``n Var`` of the weighted estimate of ``P(theta <= upper)``."""
    r, _ = _scaled_integrals(model, upper, rtol)
    p = r.fA / r.f
    return (r.f2 * p * p + r.f2A * (1.0 - 2.0 * p)) / (r.f * r.f)


# -- registry used by the CLI ------------------------------------------------

MODELS = {
    "gaussian-gaussian": (make_gaussian_gaussian, {"prior_mean": 0.0, "prior_sd": 1.0, "obs_sd": 1.0, "t": 1, "xbar": 1.0}),
    "beta-bernoulli": (make_beta_bernoulli, {"alpha": 1.0, "beta": 1.0, "successes": 0, "trials": 0}),
    "uniform-gaussian": (make_uniform_gaussian, {"lower": -1.0, "upper": 3.0, "obs_sd": 1.0, "t": 1, "xbar": 1.0}),
    "constant": (make_constant, {"dim": 1, "log_value": 0.0}),
    "latent-gaussian-chain": (
        lambda **kw: expand_latent(gaussian_chain(**kw)),
        {"x": 1.0, "prior_mean": 0.0, "prior_sd": 1.0, "latent_sd": 1.0, "obs_sd": 1.0},
    ),
}

_ALIASES = {"x": "xbar"}


def build_model(model_id: str, params: Optional[dict] = None) -> ModelSpec:
    """Construct a bundled model from its id and a parameter map."""
    if model_id not in MODELS:
        raise KeyError(f"unknown model {model_id!r}; choose from {sorted(MODELS)}")
    factory, defaults = MODELS[model_id]
    kwargs = dict(defaults)
    for key, value in (params or {}).items():
        if key not in defaults and _ALIASES.get(key) in defaults:
            key = _ALIASES[key]
        if key not in defaults:
            raise KeyError(f"model {model_id!r} has no parameter {key!r}; known: {sorted(defaults)}")
        kwargs[key] = type(defaults[key])(value)
    return factory(**kwargs)
