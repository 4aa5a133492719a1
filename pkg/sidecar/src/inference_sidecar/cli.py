"""Command line entry: configure and launch the serving process."""

from __future__ import annotations

import argparse

from .app import create_app
from .config import ServiceConfig


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="inference-sidecar",
        description="Serve the model-inference wire protocol (v1) over HTTP.",
    )
    parser.add_argument("--config", help="JSON config file; flags override its values")
    parser.add_argument("--host", help="listen address")
    parser.add_argument("--port", type=int, help="listen port")
    parser.add_argument(
        "--stub",
        action="store_true",
        help="serve the deterministic stub rules instead of real models "
        "(for cross-language contract testing)",
    )
    parser.add_argument("--batch-size", type=int, help="texts per forward pass")
    parser.add_argument("--device", help="device hint, e.g. cpu or cuda")
    parser.add_argument(
        "--model",
        action="append",
        metavar="ID[=PATH]",
        help="serve encoder ID from hub name or local path (repeatable; real mode)",
    )
    return parser


def config_from_args(args: argparse.Namespace) -> ServiceConfig:
    """Resolve the effective configuration: file first, then flag overrides."""
    config = ServiceConfig.load(args.config) if args.config else ServiceConfig()
    overrides = {}
    if args.host is not None:
        overrides["host"] = args.host
    if args.port is not None:
        overrides["port"] = args.port
    if args.stub:
        overrides["stub"] = True
    if args.batch_size is not None:
        overrides["batch_size"] = args.batch_size
    if args.device is not None:
        overrides["device"] = args.device
    if args.model:
        encoders = {}
        for spec in args.model:
            model_id, sep, path = spec.partition("=")
            if not model_id:
                raise SystemExit(f"--model needs ID or ID=PATH, got: {spec!r}")
            encoders[model_id] = path if sep else model_id
        overrides["encoders"] = encoders
    return config.override(**overrides)


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    config = config_from_args(args)
    import uvicorn  # deferred so argument errors stay fast

    app = create_app(config)
    uvicorn.run(app, host=config.host, port=config.port, log_level="info")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
