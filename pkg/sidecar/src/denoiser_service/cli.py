"""Launcher: `denoiser-service serve --model builtin --port 8650`."""

from __future__ import annotations

import argparse
import sys

from .models import ModelUnavailable


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(prog="denoiser-service")
    sub = parser.add_subparsers(dest="command", required=True)
    serve = sub.add_parser("serve", help="run the HTTP service")
    serve.add_argument(
        "--model",
        default="builtin",
        choices=("builtin", "sd2-inpaint", "sd15-inpaint", "controlnet-inpaint"),
        help="hosted model (pretrained variants need diffusers + local weights)",
    )
    serve.add_argument("--port", type=int, default=8650)
    serve.add_argument("--host", default="127.0.0.1")
    serve.add_argument("--device", default="cpu")
    args = parser.parse_args(argv)

    import uvicorn

    from .app import create_app

    try:
        app = create_app(args.model, args.device)
    except ModelUnavailable as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    uvicorn.run(app, host=args.host, port=args.port, log_level="warning")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
