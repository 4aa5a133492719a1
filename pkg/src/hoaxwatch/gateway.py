"""Client side of the model-inference protocol plus the in-process stub.

A gateway supplies three things to the rest of the engine: per-model sentence
embeddings, premise/hypothesis probability triples, and token annotations.
``endpoint="stub"`` routes everything to the deterministic in-process rules;
any other endpoint speaks HTTP+JSON protocol v1:

    POST /v1/embed    {model_ids, texts}  -> {embeddings, dims}
    POST /v1/nli      {pairs}             -> {scores}
    POST /v1/annotate {texts}             -> {results}
    GET  /v1/health                       -> {status, model_ids, dims}

A provider answering with unexpected embedding dims is fatal (config/model
skew must never be silently truncated).
"""

from __future__ import annotations

import threading
import time
import uuid
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
import requests

from . import stub
from .errors import (
    DimensionMismatchError,
    MalformedResponseError,
    ProviderUnreachableError,
)
from .vecmath import concat_embeddings

PROTOCOL_VERSION = 1

STUB_ENDPOINT = "stub"

# default stub ensemble; dims are config, nothing downstream assumes them
DEFAULT_MODEL_IDS = ("stub-mini", "stub-base")
DEFAULT_DIMS = {"stub-mini": 128, "stub-base": 256}


@dataclass(frozen=True)
class RetryPolicy:
    max_attempts: int = 3
    backoff_base: float = 0.25  # seconds, doubled per attempt


@dataclass(frozen=True)
class ProviderConfig:
    endpoint: str = STUB_ENDPOINT
    ensemble_model_ids: tuple[str, ...] = DEFAULT_MODEL_IDS
    expected_dims: dict[str, int] = field(default_factory=lambda: dict(DEFAULT_DIMS))
    timeout: float = 30.0
    max_in_flight: int = 4
    retry: RetryPolicy = field(default_factory=RetryPolicy)

    def __post_init__(self):
        missing = [m for m in self.ensemble_model_ids if m not in self.expected_dims]
        if missing:
            raise DimensionMismatchError(f"expected_dims missing models: {missing}")

    @property
    def concat_dim(self) -> int:
        return sum(self.expected_dims[m] for m in self.ensemble_model_ids)


@dataclass(frozen=True)
class NLIScores:
    entailment: float
    contradiction: float
    neutral: float

    def __post_init__(self):
        total = self.entailment + self.contradiction + self.neutral
        if abs(total - 1.0) > 1e-4:
            raise MalformedResponseError(f"probability triple sums to {total}, not 1")
        if min(self.entailment, self.contradiction, self.neutral) < 0.0:
            raise MalformedResponseError("probability triple has negative mass")

    def as_tuple(self) -> tuple[float, float, float]:
        return (self.entailment, self.contradiction, self.neutral)


@dataclass(frozen=True)
class TokenAnnotation:
    token: str
    is_stopword: bool
    pos: str
    entity: str | None = None


@dataclass(frozen=True)
class Annotation:
    language: str
    tokens: tuple[TokenAnnotation, ...]


def _require_nonempty_texts(texts: Sequence[str]) -> None:
    if len(texts) == 0:
        raise ValueError("texts must be nonempty")
    for t in texts:
        if not t or not t.strip():
            raise ValueError("texts must be nonempty after whitespace trim")


class ModelGateway:
    """Thread-safe inference client bound to one provider configuration.

    Concurrent HTTP requests are capped by ``max_in_flight``; retried requests
    reuse their request id so the server can deduplicate.
    """

    def __init__(self, config: ProviderConfig):
        self.config = config
        self._semaphore = threading.BoundedSemaphore(config.max_in_flight)
        self._session = requests.Session() if not self.is_stub else None

    @property
    def is_stub(self) -> bool:
        return self.config.endpoint == STUB_ENDPOINT

    # --- operations ---

    def embed_batch(self, texts: Sequence[str]) -> list[list[np.ndarray]]:
        """One embedding per ensemble model for each text, in ensemble order."""
        _require_nonempty_texts(texts)
        if self.is_stub:
            per_text = [
                [
                    stub.stub_embedding(t, m, self.config.expected_dims[m])
                    for m in self.config.ensemble_model_ids
                ]
                for t in texts
            ]
        else:
            payload = {
                "model_ids": list(self.config.ensemble_model_ids),
                "texts": list(texts),
            }
            doc = self._post("/v1/embed", payload)
            per_text = self._parse_embeddings(doc, len(texts))
        return per_text

    def embed_concat(self, texts: Sequence[str]) -> list[np.ndarray]:
        """Ensemble embedding (per-model vectors concatenated) for each text."""
        return [concat_embeddings(parts) for parts in self.embed_batch(texts)]

    def nli_batch(self, pairs: Sequence[tuple[str, str]]) -> list[NLIScores]:
        """Probability triples for (premise, hypothesis) pairs."""
        if len(pairs) == 0:
            raise ValueError("pairs must be nonempty")
        for premise, hypothesis in pairs:
            _require_nonempty_texts([premise, hypothesis])
        if self.is_stub:
            return [NLIScores(*stub.stub_nli(p, h)) for p, h in pairs]
        payload = {"pairs": [{"premise": p, "hypothesis": h} for p, h in pairs]}
        doc = self._post("/v1/nli", payload)
        scores = doc.get("scores")
        if not isinstance(scores, list) or len(scores) != len(pairs):
            raise MalformedResponseError("scores missing or wrong length")
        try:
            return [
                NLIScores(float(s["entailment"]), float(s["contradiction"]), float(s["neutral"]))
                for s in scores
            ]
        except (KeyError, TypeError) as exc:
            raise MalformedResponseError(f"bad score object: {exc}") from exc

    def annotate(self, text: str) -> Annotation:
        """Language tag plus stopword/POS/entity annotation for one text."""
        _require_nonempty_texts([text])
        if self.is_stub:
            language, tokens = stub.stub_annotate(text)
            return Annotation(
                language=language,
                tokens=tuple(
                    TokenAnnotation(t.token, t.is_stopword, t.pos, t.entity)
                    for t in tokens
                ),
            )
        doc = self._post("/v1/annotate", {"texts": [text]})
        results = doc.get("results")
        if not isinstance(results, list) or len(results) != 1:
            raise MalformedResponseError("annotate results missing or wrong length")
        res = results[0]
        try:
            return Annotation(
                language=str(res["language"]),
                tokens=tuple(
                    TokenAnnotation(
                        token=str(t["token"]),
                        is_stopword=bool(t["is_stopword"]),
                        pos=str(t["pos"]),
                        entity=t.get("entity"),
                    )
                    for t in res["tokens"]
                ),
            )
        except (KeyError, TypeError) as exc:
            raise MalformedResponseError(f"bad annotation object: {exc}") from exc

    def health(self) -> dict:
        if self.is_stub:
            return {
                "status": "ok",
                "model_ids": list(self.config.ensemble_model_ids),
                "dims": dict(self.config.expected_dims),
            }
        return self._request("GET", "/v1/health", None)

    # --- transport ---

    def _post(self, path: str, payload: dict) -> dict:
        return self._request("POST", path, payload)

    def _request(self, method: str, path: str, payload: dict | None) -> dict:
        url = self.config.endpoint.rstrip("/") + path
        request_id = str(uuid.uuid4())  # stable across retries: idempotent replay
        attempts = max(1, self.config.retry.max_attempts)
        last_error: Exception | None = None
        for attempt in range(attempts):
            if attempt > 0:
                time.sleep(self.config.retry.backoff_base * (2 ** (attempt - 1)))
            try:
                with self._semaphore:
                    resp = self._session.request(
                        method,
                        url,
                        json=payload,
                        timeout=self.config.timeout,
                        headers={"X-Request-Id": request_id},
                    )
            except requests.RequestException as exc:
                last_error = exc
                continue
            if resp.status_code >= 500:
                last_error = ProviderUnreachableError(f"{url} -> {resp.status_code}")
                continue
            if resp.status_code >= 400:
                raise MalformedResponseError(f"{url} -> {resp.status_code}: {resp.text[:200]}")
            try:
                return resp.json()
            except ValueError as exc:
                raise MalformedResponseError(f"{url} returned non-JSON body") from exc
        raise ProviderUnreachableError(
            f"{url} unreachable after {attempts} attempts: {last_error}"
        )

    def _parse_embeddings(self, doc: dict, n_texts: int) -> list[list[np.ndarray]]:
        embeddings = doc.get("embeddings")
        if not isinstance(embeddings, list) or len(embeddings) != n_texts:
            raise MalformedResponseError("embeddings missing or wrong length")
        dims = doc.get("dims", {})
        model_ids = self.config.ensemble_model_ids
        for model_id in model_ids:
            expected = self.config.expected_dims[model_id]
            echoed = dims.get(model_id)
            if echoed is not None and int(echoed) != expected:
                raise DimensionMismatchError(
                    f"provider dims for {model_id}: {echoed}, index expects {expected}"
                )
        out: list[list[np.ndarray]] = []
        for row in embeddings:
            if not isinstance(row, list) or len(row) != len(model_ids):
                raise MalformedResponseError("per-text embedding list has wrong arity")
            parts = []
            for model_id, values in zip(model_ids, row):
                vec = np.asarray(values, dtype=np.float64)
                expected = self.config.expected_dims[model_id]
                if vec.ndim != 1 or vec.size != expected:
                    raise DimensionMismatchError(
                        f"provider returned dim {vec.size} for {model_id}, expected {expected}"
                    )
                parts.append(vec)
            out.append(parts)
        return out
