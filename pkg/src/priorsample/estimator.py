"""scikit-learn style front end for the prior-sampling posteriors."""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_is_fitted

from . import core, diagnostics
from .rng import Stream
from .types import ModelSpec, WeightedPosterior
from .validation import check_count, check_positive

ALGORITHMS = ("lips", "laps", "slips")


class PriorPosteriorSampler(BaseEstimator):
    """Approximate a posterior by weighting, copying or resampling prior draws.

    Parameters
    ----------
    model : ModelSpec
        Prior sampler and log-likelihood. May also be passed to ``fit``.
    algorithm : {"lips", "laps", "slips"}
    n_draws : int
        Number of prior draws.
    c : float
        LAPS copies of the most likely draw.
    m : int or None
        SLIPS resample size; ``None`` means ``n_draws``.
    seed : int
    shards : int
        Worker shards for prior sampling; the result does not depend on it.
    max_copies : int
        LAPS output size cap.

    Attributes
    ----------
    weighted_ : WeightedPosterior
        The LIPS fit every algorithm starts from.
    posterior_ : WeightedPosterior or UnweightedPosterior
        The algorithm's output.
    weights_, log_likelihoods_ : ndarray
    ess_, d2_hat_ : float
    """

    def __init__(self, model=None, algorithm="lips", n_draws=10_000, c=100.0, m=None, seed=0,
                 shards=1, max_copies=core.DEFAULT_MAX_COPIES):
        self.model = model
        self.algorithm = algorithm
        self.n_draws = n_draws
        self.c = c
        self.m = m
        self.seed = seed
        self.shards = shards
        self.max_copies = max_copies

    def _validate_params(self):
        if self.algorithm not in ALGORITHMS:
            raise ValueError(f"algorithm must be one of {ALGORITHMS}, got {self.algorithm!r}")
        check_count(self.n_draws, "n_draws")
        check_count(self.shards, "shards")
        if self.algorithm == "laps":
            check_positive(self.c, "c")
        if self.algorithm == "slips" and self.m is not None:
            check_count(self.m, "m")

    def fit(self, X=None, y=None, model=None):
        """Draw, score and (per ``algorithm``) amplify or resample.

        ``X`` may be a :class:`ModelSpec`, overriding the constructor's.
        """
        self._validate_params()
        spec = model if model is not None else X if isinstance(X, ModelSpec) else self.model
        if not isinstance(spec, ModelSpec):
            raise TypeError("fit needs a ModelSpec, through model= or the constructor")
        root = Stream(int(self.seed))
        weighted = core.lips(spec, self.n_draws, root, self.shards)
        if self.algorithm == "lips":
            post = weighted
        elif self.algorithm == "laps":
            post = core.amplify(weighted, self.c, self.max_copies)
        else:
            post = core.resample(weighted, self.m if self.m is not None else self.n_draws, root)
        self.model_ = spec
        self.weighted_ = weighted
        self.posterior_ = post
        self.weights_ = weighted.weights
        self.log_likelihoods_ = weighted.log_likelihoods
        self.ess_ = diagnostics.ess(weighted.weights)
        self.d2_hat_ = diagnostics.d2_hat(weighted.log_likelihoods)
        return self

    def probability(self, indicator) -> float:
        """Posterior probability of a set under the fitted approximation."""
        check_is_fitted(self, "posterior_")
        return core.posterior_probability(self.posterior_, indicator)

    def expectation(self, g):
        check_is_fitted(self, "posterior_")
        return core.posterior_expectation(self.posterior_, g)

    def transform(self, X=None):
        """Return the posterior sample: ``(draws, weights)`` rows for LIPS, else draws."""
        check_is_fitted(self, "posterior_")
        post = self.posterior_
        if isinstance(post, WeightedPosterior):
            return np.column_stack([post.draws, post.weights])
        return post.draws

    def fit_transform(self, X=None, y=None, **fit_params):
        return self.fit(X, y, **fit_params).transform()

    def diagnose(self, sets=(), coordinate: int = 0) -> diagnostics.DiagnosticsReport:
        check_is_fitted(self, "posterior_")
        cdf = None
        if self.model_.analytic_posterior_cdf is not None:
            cdf = lambda x: self.model_.analytic_posterior_cdf(x, coordinate)  # noqa: E731
        return diagnostics.diagnose(self.weighted_, sets, cdf, self.posterior_, coordinate)
