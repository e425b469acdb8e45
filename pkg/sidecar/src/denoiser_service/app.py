"""FastAPI application implementing the wire protocol.

Endpoints: /v1/capabilities, /v1/encode, /v1/add_noise, /v1/denoise_step,
/v1/decode, /v1/describe. One worker lock serializes model calls (FIFO).
Failures surface as HTTP 422 {code, message}; a missing model as 503.
"""

from __future__ import annotations

import threading

from fastapi import FastAPI
from fastapi.responses import JSONResponse

from .describe import decode_png, embed
from .models import ModelAdapter, ModelUnavailable, load_model
from .sessions import SessionStore
from .wire import (
    AddNoiseRequest,
    BaseRequest,
    DecodeRequest,
    DenoiseRequest,
    DescribeRequest,
    EncodeRequest,
    WireError,
    from_wire,
    to_wire,
)


def create_app(model: str | ModelAdapter = "builtin", device: str = "cpu") -> FastAPI:
    app = FastAPI(title="denoiser-service", docs_url=None, redoc_url=None)
    adapter = model if isinstance(model, ModelAdapter) else load_model(model, device)
    sessions = SessionStore()
    worker_lock = threading.Lock()

    @app.exception_handler(WireError)
    async def _wire_error(request, exc: WireError):
        return JSONResponse(
            status_code=exc.status, content={"code": exc.code, "message": exc.message}
        )

    @app.exception_handler(ModelUnavailable)
    async def _model_unavailable(request, exc: ModelUnavailable):
        return JSONResponse(
            status_code=503, content={"code": "ModelNotLoaded", "message": str(exc)}
        )

    @app.post("/v1/capabilities")
    def capabilities(req: BaseRequest):
        sessions.touch(req.session_id, req.seed)
        with worker_lock:
            return adapter.capabilities()

    @app.post("/v1/encode")
    def encode(req: EncodeRequest):
        sessions.touch(req.session_id, req.seed)
        image = from_wire(req.image)
        with worker_lock:
            return {"latent": to_wire(adapter.encode(image))}

    @app.post("/v1/add_noise")
    def add_noise(req: AddNoiseRequest):
        session = sessions.touch(req.session_id, req.seed, req.steps)
        latent = from_wire(req.latent)
        with worker_lock:
            out = adapter.add_noise(latent, req.t, session.steps or req.steps, req.seed)
        return {"latent": to_wire(out)}

    @app.post("/v1/denoise_step")
    def denoise_step(req: DenoiseRequest):
        session = sessions.touch(req.session_id, req.seed, req.steps)
        latent = from_wire(req.latent)
        mask = from_wire(req.mask)
        x_cond = from_wire(req.x_cond)
        with worker_lock:
            out = adapter.denoise_step(
                latent, mask, x_cond, req.prompt, req.t,
                session.steps or req.steps, req.guidance, req.seed,
            )
        return {"latent": to_wire(out)}

    @app.post("/v1/decode")
    def decode(req: DecodeRequest):
        sessions.touch(req.session_id, req.seed)
        latent = from_wire(req.latent)
        with worker_lock:
            return {"image": to_wire(adapter.decode(latent))}

    @app.post("/v1/describe")
    def describe(req: DescribeRequest):
        sessions.touch(req.session_id, req.seed)
        with worker_lock:
            vec = embed(decode_png(req.image_png))
        return {"dim": int(vec.size), "values": vec.tolist()}

    return app
