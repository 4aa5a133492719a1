"""Model-serving sidecar for the hoaxwatch inference wire protocol (v1)."""

from .app import PROTOCOL_VERSION, create_app, default_backend
from .backends import LoadingBackend, StubBackend
from .config import ServiceConfig

__all__ = [
    "PROTOCOL_VERSION",
    "LoadingBackend",
    "ServiceConfig",
    "StubBackend",
    "create_app",
    "default_backend",
]

__version__ = "0.1.0"
