"""Stateless numerical kernel: vector similarity and correlation statistics.

All arithmetic runs in 64-bit floats regardless of how embeddings are stored;
every function is pure and safe for concurrent use.
"""

from __future__ import annotations

from typing import Sequence

import numpy as np

from .errors import (
    DegenerateSeriesError,
    DimensionMismatchError,
    EmptyEnsembleError,
    OutOfRangeError,
    ZeroNormError,
)

# atanh diverges at |r| = 1; perfect correlations on tiny dev sets are clamped
# just inside the open interval instead of erroring.
_FISHER_CLAMP = 1.0 - 1e-15


def as_embedding(values: Sequence[float] | np.ndarray) -> np.ndarray:
    """Validate and return a 1-D float64 embedding vector."""
    arr = np.asarray(values, dtype=np.float64)
    if arr.ndim != 1 or arr.size == 0:
        raise DimensionMismatchError("embedding must be a nonempty 1-D vector")
    if not np.all(np.isfinite(arr)):
        raise DimensionMismatchError("embedding contains NaN or Inf")
    return arr


def cosine_similarity(u: Sequence[float] | np.ndarray, v: Sequence[float] | np.ndarray) -> float:
    """Cosine of the angle between u and v, clamped to [-1, 1].

    Raises DimensionMismatchError on unequal dims and ZeroNormError when either
    vector has zero L2 norm; a zero norm is never silently treated as 0.
    """
    a = as_embedding(u)
    b = as_embedding(v)
    if a.shape != b.shape:
        raise DimensionMismatchError(f"dims differ: {a.size} vs {b.size}")
    na = float(np.linalg.norm(a))
    nb = float(np.linalg.norm(b))
    if na == 0.0 or nb == 0.0:
        raise ZeroNormError("cosine similarity undefined for zero-norm vector")
    sim = float(np.dot(a, b)) / (na * nb)
    return max(-1.0, min(1.0, sim))


def concat_embeddings(parts: Sequence[np.ndarray]) -> np.ndarray:
    """Concatenate per-model embeddings into one ensemble vector, in order."""
    if len(parts) == 0:
        raise EmptyEnsembleError("ensemble concatenation needs at least one part")
    return np.concatenate([as_embedding(p) for p in parts])


def _check_pair(predicted: Sequence[float], gold: Sequence[float]) -> tuple[np.ndarray, np.ndarray]:
    x = np.asarray(predicted, dtype=np.float64)
    y = np.asarray(gold, dtype=np.float64)
    if x.ndim != 1 or y.ndim != 1 or x.size != y.size:
        raise DimensionMismatchError("score series must be 1-D and of equal length")
    if x.size < 2:
        raise DegenerateSeriesError("correlation needs at least 2 points")
    if not (np.all(np.isfinite(x)) and np.all(np.isfinite(y))):
        raise DimensionMismatchError("score series contain NaN or Inf")
    return x, y


def pearson(predicted: Sequence[float], gold: Sequence[float]) -> float:
    """Sample Pearson correlation coefficient of two equal-length series."""
    x, y = _check_pair(predicted, gold)
    xc = x - x.mean()
    yc = y - y.mean()
    sx = float(np.sqrt(np.dot(xc, xc)))
    sy = float(np.sqrt(np.dot(yc, yc)))
    if sx == 0.0 or sy == 0.0:
        raise DegenerateSeriesError("correlation undefined for a constant series")
    r = float(np.dot(xc, yc)) / (sx * sy)
    return max(-1.0, min(1.0, r))


def average_ranks(values: Sequence[float]) -> np.ndarray:
    """1-based ranks; ties receive the average of the ranks they span."""
    x = np.asarray(values, dtype=np.float64)
    order = np.argsort(x, kind="stable")
    ranks = np.empty(x.size, dtype=np.float64)
    i = 0
    while i < x.size:
        j = i
        while j + 1 < x.size and x[order[j + 1]] == x[order[i]]:
            j += 1
        # positions i..j share one value; ranks are 1-based
        ranks[order[i : j + 1]] = (i + j) / 2.0 + 1.0
        i = j + 1
    return ranks


def spearman(predicted: Sequence[float], gold: Sequence[float]) -> float:
    """Spearman rank correlation with fractional (average) ranks for ties."""
    x, y = _check_pair(predicted, gold)
    return pearson(average_ranks(x), average_ranks(y))


def fisher_z_average(correlations: Sequence[float]) -> float:
    """Average correlations through Fisher's z: tanh(mean(atanh(r_i))).

    Inputs equal to +-1 are clamped just inside (-1, 1); anything strictly
    outside [-1, 1] raises OutOfRangeError.
    """
    rs = np.asarray(correlations, dtype=np.float64)
    if rs.ndim != 1 or rs.size == 0:
        raise OutOfRangeError("need at least one correlation coefficient")
    if np.any(np.abs(rs) > 1.0) or not np.all(np.isfinite(rs)):
        raise OutOfRangeError("correlation coefficients must lie in [-1, 1]")
    clamped = np.clip(rs, -_FISHER_CLAMP, _FISHER_CLAMP)
    return float(np.tanh(np.mean(np.arctanh(clamped))))
