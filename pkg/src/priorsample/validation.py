"""Input checks shared by the functional API and the estimator."""

from __future__ import annotations

import numbers

import numpy as np

from .types import InvalidLikelihood


def check_count(value, name: str, minimum: int = 1) -> int:
    if isinstance(value, bool) or not isinstance(value, numbers.Integral):
        if isinstance(value, numbers.Real) and float(value).is_integer():
            value = int(value)
        else:
            raise TypeError(f"{name} must be an integer, got {value!r}")
    if value < minimum:
        raise ValueError(f"{name} must be >= {minimum}, got {value}")
    return int(value)


def check_positive(value, name: str) -> float:
    value = float(value)
    if not np.isfinite(value) or value <= 0:
        raise ValueError(f"{name} must be a positive finite number, got {value}")
    return value


def check_log_likelihoods(values, n: int | None = None, what: str = "log-likelihood") -> np.ndarray:
    """Coerce to a 1-D float array; NaN and +inf are rejected by index."""
    ll = np.asarray(values, dtype=float)
    if ll.ndim != 1:
        ll = ll.reshape(-1)
    if n is not None and ll.shape[0] != n:
        raise ValueError(f"expected {n} {what} values, got {ll.shape[0]}")
    bad = np.isnan(ll) | (ll == np.inf)
    if bad.any():
        i = int(np.flatnonzero(bad)[0])
        raise InvalidLikelihood(i, float(ll[i]), what)
    return ll


def check_finite_values(values, what: str) -> np.ndarray:
    """Reject NaN or infinite entries, reporting the first offending draw."""
    v = np.asarray(values, dtype=float)
    rows = v.reshape(v.shape[0], -1) if v.ndim else v.reshape(1, 1)
    bad = ~np.isfinite(rows).all(axis=1)
    if bad.any():
        i = int(np.flatnonzero(bad)[0])
        first = rows[i][~np.isfinite(rows[i])][0]
        raise InvalidLikelihood(i, float(first), what)
    return v


def check_weights(weights, atol: float = 1e-12) -> np.ndarray:
    w = np.asarray(weights, dtype=float)
    if w.ndim != 1 or w.size == 0:
        raise ValueError("weights must be a non-empty 1-D array")
    if not np.all(np.isfinite(w)) or w.min() < 0:
        raise ValueError("weights must be finite and non-negative")
    if abs(w.sum() - 1.0) > max(atol, 1e-12 * w.size):
        raise ValueError(f"weights must sum to 1, got {w.sum()!r}")
    return w


def check_mask(mask, n: int) -> np.ndarray:
    m = np.asarray(mask)
    if m.shape != (n,):
        raise ValueError(f"set membership must have shape ({n},), got {m.shape}")
    return m.astype(bool)
