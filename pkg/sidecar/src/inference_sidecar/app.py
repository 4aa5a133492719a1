"""HTTP layer: wire protocol v1 over a pluggable inference backend.

Endpoints:

    POST /v1/embed    {model_ids, texts}  -> {embeddings, dims}
    POST /v1/nli      {pairs}             -> {scores}
    POST /v1/annotate {texts}             -> {results}
    GET  /v1/health                       -> {status, model_ids, dims}

Error mapping: malformed bodies are 400, a request naming a model this server
does not host is 422, and operations attempted before models finished loading
are 503 (retryable). Endpoints are plain functions run on the server's worker
pool, so requests proceed concurrently; ordering within one request's batch is
preserved by the backends. An ``X-Request-Id`` header, when sent, is echoed
back so retried requests can be correlated.
"""

from __future__ import annotations

from fastapi import Body, FastAPI, Request
from fastapi.exceptions import RequestValidationError
from fastapi.responses import JSONResponse

from .backends import InferenceBackend, LoadingBackend, StubBackend
from .config import ServiceConfig
from .errors import (
    BackendLoadError,
    BackendNotReadyError,
    MalformedRequestError,
    UnknownModelError,
)

PROTOCOL_VERSION = 1


def _fail(message: str):
    raise MalformedRequestError(message)


def _string_list(payload: dict, key: str) -> list[str]:
    value = payload.get(key)
    if not isinstance(value, list) or not value:
        _fail(f"'{key}' must be a nonempty list")
    for item in value:
        if not isinstance(item, str):
            _fail(f"'{key}' entries must be strings")
    return value


def _nonblank(values: list[str], key: str) -> list[str]:
    for item in values:
        if not item.strip():
            _fail(f"'{key}' entries must be nonempty text")
    return values


def _pair_list(payload: dict) -> list[tuple[str, str]]:
    value = payload.get("pairs")
    if not isinstance(value, list) or not value:
        _fail("'pairs' must be a nonempty list")
    pairs = []
    for item in value:
        if not isinstance(item, dict):
            _fail("'pairs' entries must be objects")
        premise = item.get("premise")
        hypothesis = item.get("hypothesis")
        if not isinstance(premise, str) or not isinstance(hypothesis, str):
            _fail("'pairs' entries need string 'premise' and 'hypothesis'")
        if not premise.strip() or not hypothesis.strip():
            _fail("'pairs' premise and hypothesis must be nonempty text")
        pairs.append((premise, hypothesis))
    return pairs


def _real_loader(config: ServiceConfig):
    def load() -> InferenceBackend:
        try:
            from . import realmodels
        except ImportError as exc:
            raise BackendLoadError(
                "real mode needs the ML stack; install the 'real' extra"
            ) from exc
        return realmodels.build_backend(config)

    return load


def default_backend(config: ServiceConfig) -> InferenceBackend:
    """Stub rules in stub mode, otherwise real models loaded in the background."""
    if config.stub:
        return StubBackend(config.stub_dims)
    return LoadingBackend(config.model_ids, _real_loader(config)).start()


def create_app(
    config: ServiceConfig | None = None, backend: InferenceBackend | None = None
) -> FastAPI:
    """Build the application serving protocol v1 over ``backend``.

    ``backend`` defaults to what ``default_backend`` picks for the config; an
    explicit backend wins, which is how tests inject loading or failed states.
    """
    config = config or ServiceConfig(stub=True)
    if backend is None:
        backend = default_backend(config)

    app = FastAPI(title="inference-sidecar", docs_url=None, redoc_url=None)
    app.state.config = config
    app.state.backend = backend

    @app.exception_handler(MalformedRequestError)
    def _on_malformed(request: Request, exc: MalformedRequestError):
        return JSONResponse(status_code=400, content={"detail": str(exc)})

    @app.exception_handler(RequestValidationError)
    def _on_validation(request: Request, exc: RequestValidationError):
        return JSONResponse(
            status_code=400,
            content={"detail": "request body is not a JSON object"},
        )

    @app.exception_handler(UnknownModelError)
    def _on_unknown_model(request: Request, exc: UnknownModelError):
        return JSONResponse(status_code=422, content={"detail": str(exc)})

    @app.exception_handler(BackendNotReadyError)
    def _on_not_ready(request: Request, exc: BackendNotReadyError):
        return JSONResponse(status_code=503, content={"detail": str(exc)})

    @app.middleware("http")
    async def _echo_request_id(request: Request, call_next):
        response = await call_next(request)
        request_id = request.headers.get("X-Request-Id")
        if request_id:
            response.headers["X-Request-Id"] = request_id
        return response

    @app.post("/v1/embed")
    def embed(payload: dict = Body(...)):
        model_ids = _string_list(payload, "model_ids")
        texts = _nonblank(_string_list(payload, "texts"), "texts")
        embeddings = backend.embed(model_ids, texts)
        dims = backend.dims()
        return {
            "embeddings": embeddings,
            "dims": {model_id: dims[model_id] for model_id in dict.fromkeys(model_ids)},
        }

    @app.post("/v1/nli")
    def nli(payload: dict = Body(...)):
        pairs = _pair_list(payload)
        scores = backend.nli(pairs)
        return {
            "scores": [
                {"entailment": e, "contradiction": c, "neutral": n}
                for e, c, n in scores
            ]
        }

    @app.post("/v1/annotate")
    def annotate(payload: dict = Body(...)):
        texts = _nonblank(_string_list(payload, "texts"), "texts")
        return {"results": backend.annotate(texts)}

    @app.get("/v1/health")
    def health():
        return {
            "status": "ok",
            "model_ids": list(backend.model_ids),
            "dims": backend.dims(),
        }

    return app
