"""Shared fixtures: a stub-mode application and a client bound to it."""

from __future__ import annotations

import pytest
from fastapi.testclient import TestClient

from inference_sidecar import ServiceConfig, create_app


@pytest.fixture(scope="module")
def stub_config():
    return ServiceConfig(stub=True)


@pytest.fixture(scope="module")
def client(stub_config):
    with TestClient(create_app(stub_config)) as client:
        yield client
