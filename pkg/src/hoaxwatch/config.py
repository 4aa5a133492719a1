"""One-file JSON configuration with flag overrides.

Precedence, highest first: command-line flags, config file, built-in
defaults. The config carries every threshold the pipeline exposes, so a run
is fully described by (config, fixtures).
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field, replace
from datetime import datetime, timedelta

from .gateway import ProviderConfig, RetryPolicy
from .hoaxdb import DEFAULT_MIN_SIMILARITY, DEFAULT_TOP_K
from .osn import DEFAULT_DATE_FLOOR, OsnClientConfig, parse_utc
from .tracking import DEFAULT_BIN_WIDTH
from .verdicts import DEFAULT_CONTRADICTION_THRESHOLD, DEFAULT_ENTAILMENT_THRESHOLD


@dataclass(frozen=True)
class EngineConfig:
    provider: ProviderConfig = field(default_factory=ProviderConfig)
    index_dir: str | None = None
    pca_path: str | None = None
    top_k: int = DEFAULT_TOP_K
    min_similarity: float = DEFAULT_MIN_SIMILARITY
    entailment_threshold: float = DEFAULT_ENTAILMENT_THRESHOLD
    contradiction_threshold: float = DEFAULT_CONTRADICTION_THRESHOLD
    bin_width: timedelta = DEFAULT_BIN_WIDTH
    date_floor: datetime = DEFAULT_DATE_FLOOR
    osn: OsnClientConfig | None = None


def _provider_from_doc(doc: dict) -> ProviderConfig:
    kwargs = {}
    if "endpoint" in doc:
        kwargs["endpoint"] = doc["endpoint"]
    if "ensemble_model_ids" in doc:
        kwargs["ensemble_model_ids"] = tuple(doc["ensemble_model_ids"])
    if "expected_dims" in doc:
        kwargs["expected_dims"] = {k: int(v) for k, v in doc["expected_dims"].items()}
    if "timeout" in doc:
        kwargs["timeout"] = float(doc["timeout"])
    if "max_in_flight" in doc:
        kwargs["max_in_flight"] = int(doc["max_in_flight"])
    if "retry" in doc:
        kwargs["retry"] = RetryPolicy(
            max_attempts=int(doc["retry"].get("max_attempts", 3)),
            backoff_base=float(doc["retry"].get("backoff_base", 0.25)),
        )
    return ProviderConfig(**kwargs)


def _osn_from_doc(doc: dict) -> OsnClientConfig:
    return OsnClientConfig(
        endpoint=doc["endpoint"],
        rate_limit_per_window=int(doc.get("rate_limit_per_window", 300)),
        window_seconds=float(doc.get("window_seconds", 900.0)),
        hash_salt=str(doc.get("hash_salt", "hoaxwatch")),
        page_size=int(doc.get("page_size", 100)),
    )


def load_config(path: str | None = None) -> EngineConfig:
    """Build an EngineConfig from a JSON file (or pure defaults when None)."""
    if path is None:
        return EngineConfig()
    with open(path, encoding="utf-8") as fh:
        doc = json.load(fh)
    cfg = EngineConfig()
    if "provider" in doc:
        cfg = replace(cfg, provider=_provider_from_doc(doc["provider"]))
    if "index_dir" in doc:
        cfg = replace(cfg, index_dir=doc["index_dir"])
    if "pca_path" in doc:
        cfg = replace(cfg, pca_path=doc["pca_path"])
    defaults = doc.get("defaults", {})
    if "top_k" in defaults:
        cfg = replace(cfg, top_k=int(defaults["top_k"]))
    if "min_similarity" in defaults:
        cfg = replace(cfg, min_similarity=float(defaults["min_similarity"]))
    if "entailment_threshold" in defaults:
        cfg = replace(cfg, entailment_threshold=float(defaults["entailment_threshold"]))
    if "contradiction_threshold" in defaults:
        cfg = replace(
            cfg, contradiction_threshold=float(defaults["contradiction_threshold"])
        )
    if "bin_width_days" in defaults:
        cfg = replace(cfg, bin_width=timedelta(days=float(defaults["bin_width_days"])))
    if "date_floor" in defaults:
        cfg = replace(cfg, date_floor=parse_utc(defaults["date_floor"]))
    if "osn" in doc:
        cfg = replace(cfg, osn=_osn_from_doc(doc["osn"]))
    return cfg


def apply_overrides(cfg: EngineConfig, **overrides) -> EngineConfig:
    """Apply non-None flag values on top of a loaded config.

    Recognized keys: provider (endpoint string, "stub" or a URL), index_dir,
    pca_path, top_k, min_similarity, entailment_threshold,
    contradiction_threshold, bin_width_days, date_floor (ISO timestamp).
    """
    out = cfg
    if overrides.get("provider") is not None:
        out = replace(out, provider=replace(out.provider, endpoint=overrides["provider"]))
    for key in ("index_dir", "pca_path", "top_k", "min_similarity",
                "entailment_threshold", "contradiction_threshold"):
        if overrides.get(key) is not None:
            out = replace(out, **{key: overrides[key]})
    if overrides.get("bin_width_days") is not None:
        out = replace(out, bin_width=timedelta(days=float(overrides["bin_width_days"])))
    if overrides.get("date_floor") is not None:
        out = replace(out, date_floor=parse_utc(overrides["date_floor"]))
    return out
