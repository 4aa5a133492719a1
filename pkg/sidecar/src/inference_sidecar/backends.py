"""Inference backends behind the HTTP layer.

A backend answers the three protocol operations (embed, nli, annotate) for a
fixed set of model ids and reports the dimension of every embedding model it
hosts. ``StubBackend`` serves the deterministic rules the engine's in-process
provider uses, so client and server can be contract-tested against identical
outputs. ``LoadingBackend`` wraps a slow model loader with a loading/ready/
failed state machine so the HTTP layer can answer 503 until real models are
up, without blocking server startup.
"""

from __future__ import annotations

import threading
from typing import Callable, Protocol, Sequence

from .errors import BackendNotReadyError, UnknownModelError


class InferenceBackend(Protocol):
    """What the HTTP layer needs from a model backend."""

    model_ids: tuple[str, ...]

    def dims(self) -> dict[str, int]:
        """Embedding dimension per hosted model id."""
        ...

    def embed(
        self, model_ids: Sequence[str], texts: Sequence[str]
    ) -> list[list[list[float]]]:
        """Per text, one vector per requested model, in request order."""
        ...

    def nli(
        self, pairs: Sequence[tuple[str, str]]
    ) -> list[tuple[float, float, float]]:
        """(entailment, contradiction, neutral) triple per premise/hypothesis pair."""
        ...

    def annotate(self, texts: Sequence[str]) -> list[dict]:
        """Per text: {"language": str, "tokens": [{token, is_stopword, pos, entity}]}."""
        ...


class StubBackend:
    """Deterministic provider rules, served over HTTP.

    The rules are imported from the engine package rather than copied: the
    point of stub serving is that a remote client and this server agree
    bit-for-bit, which a drifting duplicate could silently break.
    """

    def __init__(self, dims: dict[str, int]):
        from hoaxwatch import stub  # deferred: only stub mode needs the engine package

        self._stub = stub
        self._dims = dict(dims)
        self.model_ids = tuple(dims)

    def dims(self) -> dict[str, int]:
        return dict(self._dims)

    def embed(
        self, model_ids: Sequence[str], texts: Sequence[str]
    ) -> list[list[list[float]]]:
        for model_id in model_ids:
            if model_id not in self._dims:
                raise UnknownModelError(f"unknown model id: {model_id}")
        return [
            [
                self._stub.stub_embedding(text, model_id, self._dims[model_id]).tolist()
                for model_id in model_ids
            ]
            for text in texts
        ]

    def nli(
        self, pairs: Sequence[tuple[str, str]]
    ) -> list[tuple[float, float, float]]:
        return [self._stub.stub_nli(premise, hypothesis) for premise, hypothesis in pairs]

    def annotate(self, texts: Sequence[str]) -> list[dict]:
        out = []
        for text in texts:
            language, tokens = self._stub.stub_annotate(text)
            out.append(
                {
                    "language": language,
                    "tokens": [
                        {
                            "token": tok.token,
                            "is_stopword": tok.is_stopword,
                            "pos": tok.pos,
                            "entity": tok.entity,
                        }
                        for tok in tokens
                    ],
                }
            )
        return out


LOADING = "loading"
READY = "ready"
FAILED = "failed"


class LoadingBackend:
    """Delegates to a backend produced by ``loader``, once it has one.

    ``start()`` runs the loader on a background thread; until it returns, every
    operation raises BackendNotReadyError, which the HTTP layer turns into 503.
    A loader exception parks the backend in the failed state with the cause in
    the message instead of crashing the server, so health probes keep working.
    """

    def __init__(self, model_ids: Sequence[str], loader: Callable[[], InferenceBackend]):
        self.model_ids = tuple(model_ids)
        self._loader = loader
        self._lock = threading.Lock()
        self._state = LOADING
        self._error = ""
        self._delegate: InferenceBackend | None = None
        self._thread: threading.Thread | None = None

    def start(self) -> "LoadingBackend":
        self._thread = threading.Thread(
            target=self._load, name="model-loader", daemon=True
        )
        self._thread.start()
        return self

    def _load(self):
        try:
            delegate = self._loader()
        except Exception as exc:  # surface any load failure as 503, not a crash
            with self._lock:
                self._state = FAILED
                self._error = f"{type(exc).__name__}: {exc}"
            return
        with self._lock:
            self._delegate = delegate
            self._state = READY

    @property
    def state(self) -> str:
        with self._lock:
            return self._state

    def wait_ready(self, timeout: float | None = None) -> bool:
        """Block until the loader thread finishes; true iff the backend is ready."""
        if self._thread is not None:
            self._thread.join(timeout)
        return self.state == READY

    def _ready(self) -> InferenceBackend:
        with self._lock:
            if self._state == READY:
                return self._delegate
            if self._state == FAILED:
                raise BackendNotReadyError(f"model load failed: {self._error}")
        raise BackendNotReadyError("models are still loading")

    def dims(self) -> dict[str, int]:
        return self._ready().dims()

    def embed(
        self, model_ids: Sequence[str], texts: Sequence[str]
    ) -> list[list[list[float]]]:
        return self._ready().embed(model_ids, texts)

    def nli(
        self, pairs: Sequence[tuple[str, str]]
    ) -> list[tuple[float, float, float]]:
        return self._ready().nli(pairs)

    def annotate(self, texts: Sequence[str]) -> list[dict]:
        return self._ready().annotate(texts)
