#!/usr/bin/env python3
"""Record the golden wire transcript: a deterministic request per endpoint
plus the service's responses, used by the conformance test for byte-exact
replay."""

import base64
import io
import json
from pathlib import Path

import numpy as np
from fastapi.testclient import TestClient
from PIL import Image

from denoiser_service.app import create_app
from denoiser_service.wire import to_wire


def build_requests() -> list[tuple[str, dict]]:
    rng = np.random.default_rng(424242)
    img = np.clip(
        np.stack(
            [
                0.25 + 0.5 * np.linspace(0, 1, 48)[None, :].repeat(32, 0),
                0.55 - 0.3 * np.linspace(0, 1, 32)[:, None].repeat(48, 1),
                0.4 + 0.1 * rng.standard_normal((32, 48)),
            ]
        ),
        0,
        1,
    ).astype(np.float32)
    latent = rng.standard_normal((4, 4, 6)).astype(np.float32)
    cond = rng.standard_normal((4, 4, 6)).astype(np.float32)
    mask = (rng.random((1, 4, 6)) < 0.5).astype(np.float32)
    png = io.BytesIO()
    Image.fromarray(np.round(np.moveaxis(img, 0, 2) * 255).astype(np.uint8)).save(
        png, format="PNG"
    )
    sid = "golden-session"
    return [
        ("/v1/capabilities", {"session_id": sid, "seed": 7}),
        ("/v1/encode", {"session_id": sid, "seed": 7, "image": to_wire(img)}),
        ("/v1/add_noise",
         {"session_id": sid, "seed": 7, "latent": to_wire(latent), "t": 9, "steps": 12}),
        ("/v1/denoise_step", {
            "session_id": sid, "seed": 7, "latent": to_wire(latent),
            "mask": to_wire(mask), "x_cond": to_wire(cond),
            "prompt": "", "t": 8, "steps": 12, "guidance": 7.5,
        }),
        ("/v1/decode", {"session_id": sid, "seed": 7, "latent": to_wire(latent)}),
        ("/v1/describe", {
            "session_id": sid, "seed": 7,
            "image_png": base64.b64encode(png.getvalue()).decode("ascii"),
        }),
    ]


def main() -> None:
    client = TestClient(create_app("builtin"))
    entries = []
    for endpoint, payload in build_requests():
        resp = client.post(endpoint, json=payload)
        resp.raise_for_status()
        entries.append({"endpoint": endpoint, "request": payload, "response": resp.json()})
    out = Path(__file__).resolve().parent.parent / "golden" / "transcript.json"
    out.parent.mkdir(exist_ok=True)
    out.write_text(json.dumps(entries, indent=2, sort_keys=True) + "\n")
    print(f"recorded {len(entries)} golden exchanges to {out}")


if __name__ == "__main__":
    main()
