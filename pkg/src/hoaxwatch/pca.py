"""Fit, persist, and apply the linear dimension reduction for ensemble embeddings.

The projection is fitted by singular value decomposition of the centered
sample matrix; trailing near-zero-variance axes are kept, not rejected.
A fitted model is immutable and safe for concurrent transform calls.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

from .errors import DimensionMismatchError, InsufficientSamplesError

FORMAT_VERSION = 1


@dataclass(frozen=True)
class PCAModel:
    mean: np.ndarray                 # (d,)
    components: np.ndarray           # (k, d), rows orthonormal, variance-ordered
    explained_variance: np.ndarray   # (k,), non-increasing, (n-1) denominator
    ensemble_model_ids: tuple[str, ...] = field(default_factory=tuple)

    @property
    def source_dim(self) -> int:
        return int(self.mean.size)

    @property
    def n_components(self) -> int:
        return int(self.components.shape[0])


def _canonicalize_signs(components: np.ndarray) -> np.ndarray:
    """Force the largest-magnitude entry of each axis positive.

    Makes serialized models and tests reproducible across eigensolvers, which
    only determine each axis up to sign.
    """
    out = components.copy()
    for i in range(out.shape[0]):
        j = int(np.argmax(np.abs(out[i])))
        if out[i, j] < 0:
            out[i] = -out[i]
    return out


def fit_pca(
    samples: Sequence[np.ndarray] | np.ndarray,
    n_components: int,
    ensemble_model_ids: Sequence[str] = (),
) -> PCAModel:
    """Fit the top-k principal axes of a sample of equal-dim embeddings.

    Requires at least 2 samples and 1 <= k <= min(dim, n_samples - 1).
    Rank deficiency is not an error: trailing axes may carry ~0 variance.
    """
    try:
        x = np.asarray(samples, dtype=np.float64)
    except ValueError as exc:
        raise DimensionMismatchError("samples must share one dimension") from exc
    if x.ndim != 2:
        raise DimensionMismatchError("samples must share one dimension")
    n, d = x.shape
    if n < 2:
        raise InsufficientSamplesError(f"need >= 2 samples, got {n}")
    if not 1 <= n_components <= min(d, n - 1):
        raise InsufficientSamplesError(
            f"n_components must lie in [1, {min(d, n - 1)}], got {n_components}"
        )
    mean = x.mean(axis=0)
    centered = x - mean
    # SVD of the centered matrix: rows of vt are the principal axes,
    # singular values give variances under the (n-1) convention.
    _, s, vt = np.linalg.svd(centered, full_matrices=False)
    components = _canonicalize_signs(vt[:n_components])
    variance = (s[:n_components] ** 2) / (n - 1)
    return PCAModel(
        mean=mean,
        components=components,
        explained_variance=variance,
        ensemble_model_ids=tuple(ensemble_model_ids),
    )


def transform(model: PCAModel, x: np.ndarray) -> np.ndarray:
    """Project one embedding (or a batch, rows) into the reduced space."""
    arr = np.asarray(x, dtype=np.float64)
    if arr.shape[-1] != model.source_dim:
        raise DimensionMismatchError(
            f"embedding dim {arr.shape[-1]} != model source_dim {model.source_dim}"
        )
    return (arr - model.mean) @ model.components.T


def inverse_transform(model: PCAModel, y: np.ndarray) -> np.ndarray:
    """Map reduced coordinates back to the source space (lossy for k < d)."""
    arr = np.asarray(y, dtype=np.float64)
    if arr.shape[-1] != model.n_components:
        raise DimensionMismatchError(
            f"coordinate dim {arr.shape[-1]} != model n_components {model.n_components}"
        )
    return arr @ model.components + model.mean


def select_n_components(candidates: Mapping[int, float]) -> int:
    """Component count with the best dev score; ties go to the smallest k."""
    if not candidates:
        raise InsufficientSamplesError("component sweep is empty")
    return min(candidates, key=lambda k: (-candidates[k], k))


def _floats(values: np.ndarray) -> list[float]:
    # 17 significant digits round-trip any IEEE double exactly
    return [float(f"{v:.17g}") for v in np.asarray(values, dtype=np.float64).ravel()]


def save_pca(model: PCAModel, path: str) -> None:
    doc = {
        "format_version": FORMAT_VERSION,
        "source_dim": model.source_dim,
        "n_components": model.n_components,
        "ensemble_model_ids": list(model.ensemble_model_ids),
        "mean": _floats(model.mean),
        "components": _floats(model.components),  # row-major
        "explained_variance": _floats(model.explained_variance),
    }
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(doc, fh)
        fh.write("\n")


def load_pca(path: str) -> PCAModel:
    with open(path, encoding="utf-8") as fh:
        doc = json.load(fh)
    if doc.get("format_version") != FORMAT_VERSION:
        raise DimensionMismatchError(
            f"unsupported projection file version {doc.get('format_version')!r}"
        )
    d = int(doc["source_dim"])
    k = int(doc["n_components"])
    components = np.asarray(doc["components"], dtype=np.float64).reshape(k, d)
    return PCAModel(
        mean=np.asarray(doc["mean"], dtype=np.float64),
        components=components,
        explained_variance=np.asarray(doc["explained_variance"], dtype=np.float64),
        ensemble_model_ids=tuple(doc.get("ensemble_model_ids", ())),
    )
