"""Configuration loading, validation, and CLI flag resolution."""

from __future__ import annotations

import json

import pytest

from inference_sidecar.cli import build_parser, config_from_args
from inference_sidecar.config import ServiceConfig
from inference_sidecar.errors import SidecarError


def test_defaults_are_real_mode_with_two_encoders():
    config = ServiceConfig()
    assert not config.stub
    assert len(config.model_ids) == 2
    assert config.batch_size == 32
    assert config.device == "cpu"


def test_stub_mode_model_ids_follow_stub_dims():
    config = ServiceConfig(stub=True)
    assert config.model_ids == ("stub-mini", "stub-base")


def test_doc_round_trip():
    config = ServiceConfig(stub=True, port=9000, batch_size=8)
    assert ServiceConfig.from_doc(config.to_doc()) == config


def test_unknown_config_key_is_fatal():
    with pytest.raises(SidecarError, match="unknown config keys"):
        ServiceConfig.from_doc({"prot": 1})


@pytest.mark.parametrize(
    "changes",
    [
        {"port": -1},
        {"port": 70000},
        {"batch_size": 0},
        {"stub": True, "stub_dims": {}},
        {"encoders": {}},
        {"stub": True, "stub_dims": {"m": 0}},
    ],
)
def test_invalid_values_rejected(changes):
    with pytest.raises(SidecarError):
        ServiceConfig(**changes)


def test_config_file_with_flag_overrides(tmp_path):
    path = tmp_path / "service.json"
    path.write_text(json.dumps({"port": 9100, "batch_size": 4}), encoding="utf-8")
    args = build_parser().parse_args(
        ["--config", str(path), "--stub", "--port", "9200"]
    )
    config = config_from_args(args)
    assert config.port == 9200  # flag wins over file
    assert config.batch_size == 4  # file value survives
    assert config.stub


def test_model_flag_builds_encoder_map():
    args = build_parser().parse_args(
        ["--model", "mini=/models/mini", "--model", "hub-name"]
    )
    config = config_from_args(args)
    assert config.encoders == {"mini": "/models/mini", "hub-name": "hub-name"}


def test_defaults_without_flags():
    config = config_from_args(build_parser().parse_args([]))
    assert config == ServiceConfig()
