"""Service configuration for the inference sidecar.

Model identifiers are configuration data: the ``encoders`` mapping takes each
served model id to a hub name or a local cache directory, and the NLI and NER
entries name published checkpoints that are fetched at load time, never
vendored into the package. In stub mode the server hosts the deterministic
provider rules instead, and ``stub_dims`` fixes the id -> dimension table.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field, fields, replace
from pathlib import Path

from .errors import SidecarError

# stub ensemble served under --stub; dims match the engine's defaults
DEFAULT_STUB_DIMS = {"stub-mini": 128, "stub-base": 256}

# real ensemble: multilingual sentence encoders published on the model hub
DEFAULT_ENCODERS = {
    "paraphrase-multilingual-mpnet-base-v2": (
        "sentence-transformers/paraphrase-multilingual-mpnet-base-v2"
    ),
    "paraphrase-multilingual-MiniLM-L12-v2": (
        "sentence-transformers/paraphrase-multilingual-MiniLM-L12-v2"
    ),
}

# cross-lingual NLI checkpoint; its own classification head is used unless a
# trained pooled-head state dict is configured via nli_head_path
DEFAULT_NLI_MODEL = "joeddav/xlm-roberta-large-xnli"

DEFAULT_NER_MODEL = "mrm8488/bert-spanish-cased-finetuned-ner"

DEFAULT_LANGUAGE_MODEL = "papluca/xlm-roberta-base-language-detection"


@dataclass(frozen=True)
class ServiceConfig:
    """Everything the serving process needs: listen address, models, batching.

    ``encoders`` maps served model ids to hub names or local cache paths;
    ``stopword_paths`` maps language codes to newline-delimited lexicon files
    used by real-mode annotation; ``device`` is a hint such as "cpu" or
    "cuda". ``batch_size`` caps how many texts one forward pass sees.
    """

    host: str = "127.0.0.1"
    port: int = 8100
    stub: bool = False
    stub_dims: dict[str, int] = field(default_factory=lambda: dict(DEFAULT_STUB_DIMS))
    encoders: dict[str, str] = field(default_factory=lambda: dict(DEFAULT_ENCODERS))
    nli_model: str = DEFAULT_NLI_MODEL
    nli_head_path: str = ""
    ner_model: str = DEFAULT_NER_MODEL
    language_model: str = DEFAULT_LANGUAGE_MODEL
    pos_model: str = ""
    stopword_paths: dict[str, str] = field(default_factory=dict)
    batch_size: int = 32
    device: str = "cpu"

    def __post_init__(self):
        if not (0 <= self.port <= 65535):
            raise SidecarError(f"port out of range: {self.port}")
        if self.batch_size < 1:
            raise SidecarError(f"batch_size must be >= 1, got {self.batch_size}")
        if self.stub and not self.stub_dims:
            raise SidecarError("stub mode needs at least one model in stub_dims")
        if not self.stub and not self.encoders:
            raise SidecarError("real mode needs at least one encoder")
        for model_id, dim in self.stub_dims.items():
            if dim < 1:
                raise SidecarError(f"stub dim for {model_id} must be >= 1, got {dim}")

    @property
    def model_ids(self) -> tuple[str, ...]:
        """Served model ids, in declaration order."""
        return tuple(self.stub_dims if self.stub else self.encoders)

    def to_doc(self) -> dict:
        """Plain-JSON view of the configuration."""
        return {
            "host": self.host,
            "port": self.port,
            "stub": self.stub,
            "stub_dims": dict(self.stub_dims),
            "encoders": dict(self.encoders),
            "nli_model": self.nli_model,
            "nli_head_path": self.nli_head_path,
            "ner_model": self.ner_model,
            "language_model": self.language_model,
            "pos_model": self.pos_model,
            "stopword_paths": dict(self.stopword_paths),
            "batch_size": self.batch_size,
            "device": self.device,
        }

    @classmethod
    def from_doc(cls, doc: dict) -> "ServiceConfig":
        """Build a configuration from a JSON object; unknown keys are fatal."""
        known = {f.name for f in fields(cls)}
        unknown = sorted(set(doc) - known)
        if unknown:
            raise SidecarError(f"unknown config keys: {unknown}")
        return cls(**doc)

    @classmethod
    def load(cls, path: str | Path) -> "ServiceConfig":
        """Read a JSON config file."""
        with open(path, encoding="utf-8") as fh:
            doc = json.load(fh)
        if not isinstance(doc, dict):
            raise SidecarError(f"{path}: config must be a JSON object")
        return cls.from_doc(doc)

    def override(self, **changes) -> "ServiceConfig":
        """Copy with some fields replaced (used by CLI flag overrides)."""
        return replace(self, **changes)
