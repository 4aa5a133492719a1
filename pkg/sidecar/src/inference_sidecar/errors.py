"""Error taxonomy for the serving process.

The HTTP layer maps these onto status codes: malformed request bodies are 400,
a request naming a model this server does not host is 422, and any operation
attempted before the backend finished loading (or after loading failed) is 503
so clients treat the condition as retryable.
"""


class SidecarError(Exception):
    """Base class for errors raised by the sidecar."""


class MalformedRequestError(SidecarError):
    """Request body is not valid JSON or does not match the wire schema."""


class UnknownModelError(SidecarError):
    """Request names a model id this server is not configured to host."""


class BackendNotReadyError(SidecarError):
    """Models are still loading, or loading failed; the server cannot answer."""


class BackendLoadError(SidecarError):
    """Model loading itself failed (missing weights, missing ML stack, ...)."""
