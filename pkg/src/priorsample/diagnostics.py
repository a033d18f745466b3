"""Accuracy diagnostics for likelihood-weighted prior samples.

The plug-in quantities all derive from the normalized weights ``w``:

* ``ess = 1 / sum(w**2)``;
* ``d2_hat = log(n * sum(w**2)) = log(n / ess)``, the plug-in Renyi
  divergence of order 2 between posterior and prior;
* ``variance_bound = 2 exp(d2)``, an upper bound on ``n Var`` of any
  weighted set-probability estimate.
"""

from __future__ import annotations

import json
import logging
import math
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass
from typing import Callable, Optional, Sequence

import numpy as np

from . import engine
from .core import Posterior, _membership, _normalize, lips
from .rng import REPLICATE, as_stream
from .types import ModelSpec, TotalUnderflow, WeightedPosterior
from .validation import check_count, check_mask

logger = logging.getLogger(__name__)


class NegativeVarianceWarning(RuntimeWarning):
    pass


def ess(weights) -> float:
    """Effective sample size ``1 / sum(w**2)`` of normalized weights."""
    w = np.asarray(weights, dtype=float)
    return 1.0 / engine.reduce_sum(w * w)


def d2_hat(ll) -> float:
    """Plug-in ``log(Pi0(f^2) / Pi0(f)^2)`` from log-likelihoods; shift invariant."""
    w, _ = _normalize(ll)
    return math.log(w.size) - math.log(ess(w))


def variance_bound(d2: float) -> float:
    if d2 < 0:
        raise ValueError(f"d2 must be non-negative, got {d2}")
    return 2.0 * math.exp(d2)


def _variance_terms(ll, in_A) -> tuple[float, float, float]:
    w, _ = _normalize(ll)
    inside = check_mask(in_A, w.size)
    n = w.size
    w2 = w * w
    total = engine.reduce_sum(w)
    p = engine.reduce_sum(w * inside) / total
    s2 = engine.reduce_sum(w2)
    s2A = engine.reduce_sum(w2 * inside)
    with np.errstate(divide="ignore"):
        log_r = math.log(n) + math.log(s2)
        log_rA = math.log(n) + np.log(s2A)
    return math.exp(log_r), float(np.exp(log_rA)), p


def variance_numerator(ll, in_A) -> float:
    """Unclamped plug-in ``n Var`` (the formula's numerator over ``Pi0(f)^2``)."""
    r, rA, p = _variance_terms(ll, in_A)
    return r * p * p + rA * (1.0 - 2.0 * p)


def asymptotic_variance_hat(ll, in_A) -> float:
    """Plug-in limit of ``n Var`` for the weighted estimate of ``P(A)``.

    Monte Carlo averages replace the prior expectations of ``f``, ``f**2``
    and ``f**2 1_A``, and the weighted estimate of ``P(A)`` replaces the
    true posterior probability.  Negative values (rounding only) are
    clamped to 0 with a :class:`NegativeVarianceWarning`.
    """
    v = variance_numerator(ll, in_A)
    if v < 0:
        warnings.warn(f"plug-in variance {v:g} clamped to 0", NegativeVarianceWarning, stacklevel=2)
        return 0.0
    return v


def replicate_lips(model: ModelSpec, n: int, A, reps: int, rng, workers: int = 1) -> tuple[np.ndarray, np.ndarray]:
    """Run ``reps`` independent LIPS fits; return ``P_hat(A)`` and ``d2_hat`` per run.

    Replicate ``r`` uses stream ``root.child(REPLICATE, r)``, so results do
    not depend on ``workers``.
    """
    reps = check_count(reps, "reps")
    root = as_stream(rng)

    def one(r):
        post = lips(model, n, root.child(REPLICATE, r))
        inside = _membership(A, post.draws)
        p = engine.reduce_sum(post.weights * inside) / engine.reduce_sum(post.weights)
        return p, math.log(post.n) - math.log(ess(post.weights))

    workers = max(1, min(workers, engine.max_workers()))
    if workers == 1:
        out = [one(r) for r in range(reps)]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            out = list(pool.map(one, range(reps)))
    arr = np.array(out)
    return arr[:, 0], arr[:, 1]


def replication_variance_study(model: ModelSpec, n: int, A, reps: int, rng, workers: int = 1) -> float:
    """``n`` times the sample variance of ``P_hat(A)`` over independent LIPS runs."""
    reps = check_count(reps, "reps", minimum=30)
    probs, _ = replicate_lips(model, n, A, reps, rng, workers)
    return n * float(np.var(probs, ddof=1))


def weighted_ecdf_distance(x: np.ndarray, mass: np.ndarray, cdf_values: Callable) -> float:
    order = np.argsort(x, kind="stable")
    xs = x[order]
    cum = np.cumsum(mass[order])
    cum = cum / cum[-1]
    # Collapse ties: keep the last cumulative value at each distinct point.
    last = np.r_[xs[1:] != xs[:-1], True]
    pts = xs[last]
    right = cum[last]
    left = np.r_[0.0, right[:-1]]
    F = np.asarray(cdf_values(pts), dtype=float)
    return float(max(np.max(np.abs(right - F)), np.max(np.abs(left - F))))


def ks_distance(post: Posterior, cdf: Callable, coordinate: int = 0) -> float:
    """Sup distance between the (weighted) ECDF of one coordinate and ``cdf``.

    Checked on both sides of every jump, which is where the supremum over
    half-lines is attained.
    """
    points, mass = post.masses()
    keep = mass > 0
    return weighted_ecdf_distance(points[keep, coordinate], mass[keep], cdf)


def _analytic_cdf(model: ModelSpec, coordinate: int):
    if model.analytic_posterior_cdf is None:
        return None
    return lambda x: model.analytic_posterior_cdf(x, coordinate)


@dataclass
class DiagnosticsReport:
    ess: float
    d2_hat: float
    variance_bound: float
    n: int
    per_set_variance: Optional[list] = None
    ks: Optional[float] = None

    def to_dict(self) -> dict:
        return asdict(self)

    def to_json(self, **kw) -> str:
        return json.dumps(self.to_dict(), **kw)


def diagnose(post: WeightedPosterior, sets: Sequence = (), cdf: Optional[Callable] = None,
             ks_posterior: Optional[Posterior] = None, coordinate: int = 0) -> DiagnosticsReport:
    """Collect the plug-in diagnostics of a LIPS fit into a report.

    ``sets`` are indicator callables (a ``descriptor`` attribute, if
    present, labels them).  The KS distance is measured on ``ks_posterior``
    when given (e.g. a SLIPS bag built from ``post``), else on ``post``.
    """
    e = ess(post.weights)
    d2 = max(math.log(post.n) - math.log(e), 0.0)
    per_set = None
    if sets:
        per_set = []
        for A in sets:
            inside = _membership(A, post.draws)
            label = getattr(A, "descriptor", repr(A))
            per_set.append({"set": label, "variance": asymptotic_variance_hat(post.log_likelihoods, inside)})
    ks = None
    if cdf is not None:
        ks = ks_distance(ks_posterior if ks_posterior is not None else post, cdf, coordinate)
    return DiagnosticsReport(e, d2, variance_bound(d2), post.n, per_set, ks)


def high_information_sweep(model_family: Callable[[float], ModelSpec], t_grid: Sequence[float], n: int,
                           rng, shards: int = 1) -> list[dict]:
    """Plug-in ``exp(d2_hat)`` as the likelihood sharpens with ``t``.

    Every ``t`` reuses the same root stream, so the prior draws are shared
    across the grid.  A batch where every likelihood underflows is
    recorded with its error and the sweep moves on.
    """
    grid = [float(t) for t in t_grid]
    if any(b <= a for a, b in zip(grid, grid[1:])):
        raise ValueError("t_grid must be strictly increasing")
    root = as_stream(rng)
    rows = []
    for t in t_grid:
        model = model_family(t)
        try:
            post = lips(model, n, root, shards)
        except TotalUnderflow as exc:
            logger.warning("t=%s: %s", t, exc)
            rows.append({"t": t, "d2_hat": float("nan"), "ratio": float("nan"), "ess_frac": float("nan"), "error": str(exc)})
            continue
        e = ess(post.weights)
        d2 = math.log(post.n) - math.log(e)
        rows.append({"t": t, "d2_hat": d2, "ratio": math.exp(d2), "ess_frac": e / post.n, "error": None})
    return rows
