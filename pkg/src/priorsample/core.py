"""Prior-sampling posterior approximations.

Three schemes share the first two steps, drawing ``n`` parameter vectors
from the prior and scoring each with the log-likelihood:

* :func:`lips` keeps the draws and weights them by normalized likelihood;
* :func:`laps` copies draw ``i`` ``ceil(c * f_i / max f)`` times;
* :func:`slips` resamples ``m`` draws with probability proportional to
  likelihood.

Everything runs in log space.  Only likelihood ratios matter, so any
likelihood known up to a parameter-free constant can be used as is.
"""

from __future__ import annotations

import math
from typing import Callable, Union

import numpy as np

from . import engine
from .rng import BLOCK_SIZE, PRIOR, RESAMPLE, Stream, as_stream
from .types import (
    CopyExplosion,
    DrawBatch,
    ModelSpec,
    TotalUnderflow,
    UnweightedPosterior,
    WeightedPosterior,
)
from .validation import (
    check_count,
    check_finite_values,
    check_log_likelihoods,
    check_mask,
    check_positive,
)

Posterior = Union[WeightedPosterior, UnweightedPosterior]

DEFAULT_MAX_COPIES = 50_000_000


def draw_prior(model: ModelSpec, n: int, rng) -> DrawBatch:
    """Draw ``n`` IID parameter vectors from the model's prior.

    ``rng`` is the run's root :class:`~priorsample.rng.Stream` (or an int
    seed).  The draws equal the ones :func:`lips` would make with the same
    root.
    """
    n = check_count(n, "n")
    prior = as_stream(rng).child(PRIOR)
    blocks = [engine._draw_block(model, prior, b, n) for b in range(math.ceil(n / BLOCK_SIZE))]
    info = prior.describe()
    info["n"] = n
    return DrawBatch(np.concatenate(blocks), info)


def evaluate_log_likelihood(model: ModelSpec, batch: DrawBatch) -> np.ndarray:
    """Log-likelihood of each draw, aligned with the batch order.

    Raises :class:`~priorsample.types.InvalidLikelihood` naming the first
    draw where the model returns NaN.
    """
    return engine.evaluate_blocks(model, batch.draws)


def _normalize(ll: np.ndarray) -> tuple[np.ndarray, float]:
    ll = check_log_likelihoods(ll)
    if ll.size == 0:
        raise ValueError("no log-likelihoods to normalize")
    top = ll.max()
    if top == -np.inf:
        raise TotalUnderflow()
    scaled = np.exp(ll - top)
    total = engine.reduce_sum(scaled)
    return scaled / total, float(top + np.log(total))


def normalize_weights(ll) -> np.ndarray:
    """Normalized weights ``exp(ll - logsumexp(ll))``.

    Shifting every entry of ``ll`` by the same constant leaves the result
    unchanged; ``-inf`` entries get weight exactly 0.
    """
    return _normalize(ll)[0]


def weigh(batch: DrawBatch, ll) -> WeightedPosterior:
    """Attach normalized likelihood weights to an existing batch."""
    ll = check_log_likelihoods(ll, batch.n)
    w, log_norm = _normalize(ll)
    return WeightedPosterior(batch, w, ll, log_norm)


def lips(model: ModelSpec, n: int, rng, shards: int = 1) -> WeightedPosterior:
    """Likelihood importance prior sampling: weighted prior draws."""
    n = check_count(n, "n")
    batch, ll = engine.run_sharded(model, n, shards, as_stream(rng))
    return weigh(batch, ll)


def copy_counts(ll, c: float) -> np.ndarray:
    """``ceil(c * exp(ll - max ll))`` per draw; ``-inf`` gets no copies."""
    c = check_positive(c, "c")
    ll = check_log_likelihoods(ll)
    top = ll.max()
    if top == -np.inf:
        raise TotalUnderflow()
    return np.ceil(c * np.exp(ll - top))


def amplify(post: WeightedPosterior, c: float, max_copies: int = DEFAULT_MAX_COPIES) -> UnweightedPosterior:
    """Turn a weighted posterior into copies, ``ceil(c * f_i / max f)`` of draw ``i``."""
    counts = copy_counts(post.log_likelihoods, c)
    total = float(counts.sum())
    if total > max_copies:
        raise CopyExplosion(int(total), max_copies, int(total) * post.batch.dim * 8)
    idx = np.repeat(np.arange(post.n), counts.astype(np.int64))
    return UnweightedPosterior(post.batch, idx)


def laps(
    model: ModelSpec,
    n: int,
    c: float,
    rng,
    shards: int = 1,
    max_copies: int = DEFAULT_MAX_COPIES,
) -> UnweightedPosterior:
    """Likelihood-amplified prior sampling.

    ``c`` counts copies of the single most likely draw; a draw with
    likelihood ratio ``r`` to the best one gets ``ceil(c * r)`` copies.
    """
    check_positive(c, "c")
    return amplify(lips(model, n, rng, shards), c, max_copies)


def multinomial_indices(weights, m: int, stream: Stream) -> np.ndarray:
    """Inverse-CDF multinomial resampling with sorted uniforms.

    Returns ``m`` source indices in non-decreasing order.  Ties on the
    cumulative weights go to the lowest index; zero-weight draws are never
    chosen.
    """
    m = check_count(m, "m")
    w = np.asarray(weights, dtype=float)
    cum = np.cumsum(w)
    if not cum[-1] > 0:
        raise TotalUnderflow()
    cum /= cum[-1]
    u = np.sort(stream.generator().random(m))
    return np.searchsorted(cum, u, side="right")


def resample(post: WeightedPosterior, m: int, rng) -> UnweightedPosterior:
    """Draw ``m`` members of ``post`` with replacement, proportional to weight.

    ``rng`` is the run root; the resampling stream is its ``RESAMPLE`` child,
    separate from the prior-draw stream.
    """
    idx = multinomial_indices(post.weights, m, as_stream(rng).child(RESAMPLE))
    return UnweightedPosterior(post.batch, idx)


def slips(model: ModelSpec, n: int, m: int, rng, shards: int = 1) -> UnweightedPosterior:
    """Selective likelihood-amplified prior sampling: LIPS then resample ``m``."""
    check_count(m, "m")
    root = as_stream(rng)
    return resample(lips(model, n, root, shards), m, root)


# -- queries -----------------------------------------------------------------

def half_line(upper: float, coord: int = 0) -> Callable[[np.ndarray], np.ndarray]:
    """Indicator of ``{theta : theta[coord] <= upper}``."""

    def indicator(theta: np.ndarray) -> np.ndarray:
        return theta[:, coord] <= upper

    indicator.descriptor = f"theta[{coord}] <= {upper!r}"
    return indicator


def box(lower, upper) -> Callable[[np.ndarray], np.ndarray]:
    """Indicator of the closed axis-aligned box ``lower <= theta <= upper``."""
    lo = np.asarray(lower, dtype=float)
    hi = np.asarray(upper, dtype=float)

    def indicator(theta: np.ndarray) -> np.ndarray:
        return np.all((theta >= lo) & (theta <= hi), axis=1)

    indicator.descriptor = f"box({lo.tolist()}, {hi.tolist()})"
    return indicator


def _membership(indicator, points: np.ndarray) -> np.ndarray:
    if callable(indicator):
        return check_mask(indicator(points), points.shape[0])
    return check_mask(indicator, points.shape[0])


def posterior_probability(post: Posterior, indicator) -> float:
    """Posterior mass of a set.

    ``indicator`` is either a boolean array aligned with the draws or a
    callable mapping the ``(n, d)`` draw array to one.  For unweighted
    posteriors the answer is the fraction of members inside the set.
    """
    points, mass = post.masses()
    inside = _membership(indicator, points)
    return engine.reduce_sum(mass * inside) / engine.reduce_sum(mass)


def posterior_expectation(post: Posterior, g: Callable[[np.ndarray], np.ndarray]):
    """Posterior mean of ``g``, which maps the ``(n, d)`` draws to ``(n,)`` or ``(n, k)``."""
    points, mass = post.masses()
    values = check_finite_values(g(points), "test function value")
    if values.shape[0] != points.shape[0]:
        raise ValueError(f"g returned {values.shape[0]} rows for {points.shape[0]} draws")
    total = engine.reduce_sum(mass)
    if values.ndim == 1:
        return engine.reduce_sum(mass * values) / total
    flat = values.reshape(values.shape[0], -1)
    out = np.array([engine.reduce_sum(mass * flat[:, j]) for j in range(flat.shape[1])]) / total
    return out.reshape(values.shape[1:])
