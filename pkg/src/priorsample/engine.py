"""Sharded prior sampling and order-fixed reductions.

Work is cut into blocks of :data:`~priorsample.rng.BLOCK_SIZE` draws.  Block
``b`` is always generated from ``root.child(PRIOR, b)`` and its likelihoods
are always evaluated in one call, so the bytes produced do not depend on
how many shards (threads) the blocks are spread over.
"""

from __future__ import annotations

import logging
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .rng import BLOCK_SIZE, PRIOR, Stream, as_stream
from .types import DrawBatch, ModelSpec, ShardFailure
from .validation import check_count, check_log_likelihoods

logger = logging.getLogger(__name__)

MAX_WORKERS_ENV = "PRIORSAMPLE_MAX_WORKERS"


def max_workers() -> int:
    """Worker cap from ``PRIORSAMPLE_MAX_WORKERS``, else the CPU count."""
    raw = os.environ.get(MAX_WORKERS_ENV)
    if raw:
        try:
            cap = int(raw)
        except ValueError:
            raise ValueError(f"{MAX_WORKERS_ENV} must be an integer, got {raw!r}") from None
        return max(cap, 1)
    return os.cpu_count() or 1


# -- reduction ---------------------------------------------------------------

def _next_pow2(k: int) -> int:
    return 1 << max(k - 1, 0).bit_length()


def _tree_sum(a: np.ndarray, width: int) -> float:
    # Perfect binary tree over index order; zero padding is exact.
    buf = np.zeros(width)
    buf[: a.size] = a
    while buf.size > 1:
        buf = buf[0::2] + buf[1::2]
    return float(buf[0])


def reduce_sum(values, workers: int = 1) -> float:
    """Pairwise sum over a fixed binary tree on index order.

    With ``workers > 1`` aligned power-of-two subtrees are summed on
    separate threads and then combined with the same tree, which gives the
    same bits as the serial call.
    """
    a = np.asarray(values, dtype=float).reshape(-1)
    if a.size == 0:
        return 0.0
    width = _next_pow2(a.size)
    workers = max(1, min(int(workers), max_workers()))
    if workers == 1 or a.size < 2 * BLOCK_SIZE:
        return _tree_sum(a, width)
    chunk = max(_next_pow2(math.ceil(width / workers)), BLOCK_SIZE)
    starts = range(0, a.size, chunk)
    with ThreadPoolExecutor(max_workers=workers) as pool:
        leaves = list(pool.map(lambda s: _tree_sum(a[s : s + chunk], chunk), starts))
    return _tree_sum(np.asarray(leaves), width // chunk)


# -- sharding ----------------------------------------------------------------

@dataclass(frozen=True)
class Shard:
    shard_id: int
    offset: int
    length: int
    blocks: range


@dataclass(frozen=True)
class ShardPlan:
    n_total: int
    shard_count: int
    shards: tuple[Shard, ...]


def plan_shards(n: int, shards: int) -> ShardPlan:
    """Split ``ceil(n / BLOCK_SIZE)`` blocks into contiguous shard ranges.

    More shards than blocks degenerates to one block per shard.
    """
    n = check_count(n, "n")
    shards = check_count(shards, "shards")
    n_blocks = math.ceil(n / BLOCK_SIZE)
    k = min(shards, n_blocks)
    bounds = [(i * n_blocks) // k for i in range(k + 1)]
    out = []
    for i in range(k):
        b0, b1 = bounds[i], bounds[i + 1]
        off = b0 * BLOCK_SIZE
        out.append(Shard(i, off, min(b1 * BLOCK_SIZE, n) - off, range(b0, b1)))
    return ShardPlan(n, k, tuple(out))


def _draw_block(model: ModelSpec, prior: Stream, block: int, n: int) -> np.ndarray:
    count = min(BLOCK_SIZE, n - block * BLOCK_SIZE)
    theta = np.asarray(model.prior_sampler(count, prior.child(block).generator()), dtype=float)
    if theta.ndim == 1 and model.dim == 1:
        theta = theta[:, None]
    if theta.shape != (count, model.dim):
        raise ValueError(
            f"prior_sampler returned shape {theta.shape}, expected {(count, model.dim)}"
        )
    return theta


def evaluate_blocks(model: ModelSpec, draws: np.ndarray) -> np.ndarray:
    """Evaluate the log-likelihood block by block; NaN is reported by global index."""
    n = draws.shape[0]
    out = np.empty(n)
    for off in range(0, n, BLOCK_SIZE):
        ll = np.asarray(model.log_likelihood(draws[off : off + BLOCK_SIZE]), dtype=float).reshape(-1)
        if ll.shape[0] != min(BLOCK_SIZE, n - off):
            raise ValueError(f"log_likelihood returned {ll.shape[0]} values for a block of draws")
        out[off : off + ll.shape[0]] = ll
    check_log_likelihoods(out)
    return out


def draw_blocks(model: ModelSpec, n: int, stream) -> tuple[DrawBatch, np.ndarray]:
    """Serial form of :func:`run_sharded`, with ``stream`` as the run root."""
    return run_sharded(model, n, 1, stream)


def run_sharded(model: ModelSpec, n: int, shards: int, seed) -> tuple[DrawBatch, np.ndarray]:
    """Draw ``n`` prior samples and their log-likelihoods over ``shards`` workers.

    ``seed`` may be an integer or a :class:`~priorsample.rng.Stream` used as
    the run root.  The output is bit-identical for every shard count.
    """
    root = as_stream(seed)
    prior = root.child(PRIOR)
    plan = plan_shards(n, shards)

    def work(shard: Shard):
        thetas, lls = [], []
        for b in shard.blocks:
            theta = _draw_block(model, prior, b, n)
            thetas.append(theta)
            lls.append(np.asarray(model.log_likelihood(theta), dtype=float).reshape(-1))
            if lls[-1].shape[0] != theta.shape[0]:
                raise ValueError(
                    f"log_likelihood returned {lls[-1].shape[0]} values for {theta.shape[0]} draws"
                )
        return np.concatenate(thetas), np.concatenate(lls)

    results: list = [None] * plan.shard_count
    n_workers = min(plan.shard_count, max_workers())
    if n_workers == 1:
        for s in plan.shards:
            try:
                results[s.shard_id] = work(s)
            except Exception as exc:
                raise ShardFailure(s.shard_id, exc) from exc
    else:
        with ThreadPoolExecutor(max_workers=n_workers) as pool:
            futures = [(s, pool.submit(work, s)) for s in plan.shards]
            for s, fut in futures:
                try:
                    results[s.shard_id] = fut.result()
                except Exception as exc:
                    raise ShardFailure(s.shard_id, exc) from exc

    draws = np.concatenate([r[0] for r in results])
    ll = check_log_likelihoods(np.concatenate([r[1] for r in results]))
    info = prior.describe()
    info["n"] = int(n)
    logger.debug("drew %d samples over %d shards", n, plan.shard_count)
    return DrawBatch(draws, info), ll
