"""Domain types and exceptions shared by the samplers, engine and diagnostics."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Callable, Optional

import numpy as np


class PriorSampleError(Exception):
    """Base class for package errors."""


class TotalUnderflow(PriorSampleError, ArithmeticError):
    """Raised when no draw in a batch has positive likelihood."""

    def __init__(self, message: str = "no draw has positive likelihood"):
        super().__init__(message)


class InvalidLikelihood(PriorSampleError, ValueError):
    """A model or test function returned NaN (or +inf) for some draw."""

    def __init__(self, index: int, value: float, what: str = "log-likelihood"):
        self.index = int(index)
        self.value = value
        super().__init__(f"{what} is {value!r} at draw index {self.index}")


class CopyExplosion(PriorSampleError, MemoryError):
    """LAPS would create more copies than the configured cap."""

    def __init__(self, copies: int, cap: int, nbytes: int):
        self.copies = int(copies)
        self.cap = int(cap)
        self.nbytes = int(nbytes)
        super().__init__(
            f"LAPS needs {self.copies} copies ({self.nbytes} bytes of draws), "
            f"above the cap of {self.cap}; lower c or raise max_copies"
        )


class ShardFailure(PriorSampleError, RuntimeError):
    """A worker raised while producing its shard."""

    def __init__(self, shard_id: int, cause: BaseException):
        self.shard_id = int(shard_id)
        super().__init__(f"shard {self.shard_id} failed: {cause!r}")


def _frozen(a: np.ndarray) -> np.ndarray:
    if a.flags.writeable or not a.flags.c_contiguous:
        a = np.array(a, order="C", copy=True)
        a.setflags(write=False)
    return a


@dataclass(frozen=True)
class ModelSpec:
    """A prior sampler plus a log-likelihood, with optional analytic answers.

    ``prior_sampler(count, generator)`` returns a ``(count, dim)`` array and
    ``log_likelihood(thetas)`` maps a ``(k, dim)`` array to ``k`` values in
    ``[-inf, inf)``.  Both work on whole arrays; wrap scalar code with
    :func:`priorsample.models.rowwise`.

    ``param_dims`` marks a latent-expanded model: only the first
    ``param_dims`` coordinates are parameters, the rest are latent and are
    dropped by :meth:`marginal` queries.
    """

    dim: int
    prior_sampler: Callable[[int, np.random.Generator], np.ndarray]
    log_likelihood: Callable[[np.ndarray], np.ndarray]
    analytic_posterior_cdf: Optional[Callable[[np.ndarray, int], np.ndarray]] = None
    analytic_marginal_moments: Optional[Callable[[int], tuple[float, float]]] = None
    name: str = "model"
    params: dict = field(default_factory=dict)
    param_dims: Optional[int] = None
    source: Any = None

    def __post_init__(self):
        if int(self.dim) < 1:
            raise ValueError(f"dim must be >= 1, got {self.dim}")


@dataclass(frozen=True)
class DrawBatch:
    draws: np.ndarray
    seed_info: dict = field(default_factory=dict)

    def __post_init__(self):
        d = np.asarray(self.draws, dtype=float)
        if d.ndim == 1:
            d = d[:, None]
        if d.ndim != 2 or d.shape[0] < 1 or d.shape[1] < 1:
            raise ValueError(f"draws must be a non-empty (n, d) array, got shape {d.shape}")
        if not np.all(np.isfinite(d)):
            raise ValueError("draws must be finite")
        object.__setattr__(self, "draws", _frozen(d))

    @property
    def n(self) -> int:
        return self.draws.shape[0]

    @property
    def dim(self) -> int:
        return self.draws.shape[1]

    def __len__(self) -> int:
        return self.n


@dataclass(frozen=True)
class WeightedPosterior:
    """Prior draws with normalized likelihood weights.

    ``log_norm`` is ``logsumexp(log_likelihoods)``, so the raw normalizing
    sum of likelihoods is ``exp(log_norm)``.
    """

    batch: DrawBatch
    weights: np.ndarray
    log_likelihoods: np.ndarray
    log_norm: float

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=float)
        if w.shape != (self.batch.n,):
            raise ValueError(f"weights shape {w.shape} does not match {self.batch.n} draws")
        object.__setattr__(self, "weights", _frozen(w))
        ll = np.asarray(self.log_likelihoods, dtype=float)
        object.__setattr__(self, "log_likelihoods", _frozen(ll))

    @property
    def draws(self) -> np.ndarray:
        return self.batch.draws

    @property
    def n(self) -> int:
        return self.batch.n

    def masses(self) -> tuple[np.ndarray, np.ndarray]:
        return self.batch.draws, self.weights

    def marginal(self, coords) -> "WeightedPosterior":
        coords = np.atleast_1d(coords)
        sub = DrawBatch(self.batch.draws[:, coords], self.batch.seed_info)
        return WeightedPosterior(sub, self.weights, self.log_likelihoods, self.log_norm)


@dataclass(frozen=True)
class UnweightedPosterior:
    """An equally weighted bag of draws, stored as indices into a source batch."""

    source: DrawBatch
    indices: np.ndarray

    def __post_init__(self):
        idx = np.asarray(self.indices, dtype=np.int64)
        if idx.ndim != 1 or idx.size < 1:
            raise ValueError("an unweighted posterior needs at least one member")
        if idx.min() < 0 or idx.max() >= self.source.n:
            raise ValueError("indices fall outside the source batch")
        object.__setattr__(self, "indices", _frozen(idx))

    @property
    def size(self) -> int:
        return self.indices.size

    def __len__(self) -> int:
        return self.size

    @property
    def draws(self) -> np.ndarray:
        return self.source.draws[self.indices]

    def counts(self) -> np.ndarray:
        return np.bincount(self.indices, minlength=self.source.n)

    def frequencies(self) -> np.ndarray:
        return self.counts() / self.size

    def masses(self) -> tuple[np.ndarray, np.ndarray]:
        return self.source.draws, self.counts().astype(float)

    def marginal(self, coords) -> "UnweightedPosterior":
        coords = np.atleast_1d(coords)
        sub = DrawBatch(self.source.draws[:, coords], self.source.seed_info)
        return UnweightedPosterior(sub, self.indices)
