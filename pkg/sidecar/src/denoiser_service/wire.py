"""Tensor encoding and request schemas for the wire protocol.

Tensors travel as {"shape": [c, h, w], "dtype": "f32le", "data": base64 of
row-major little-endian float32 bytes}.
"""

from __future__ import annotations

import base64

import numpy as np
from pydantic import BaseModel, Field


class WireError(Exception):
    def __init__(self, code: str, message: str, status: int = 422):
        self.code = code
        self.message = message
        self.status = status
        super().__init__(f"{code}: {message}")


class Tensor(BaseModel):
    shape: list[int]
    dtype: str
    data: str


def to_wire(a: np.ndarray) -> dict:
    a = np.ascontiguousarray(a, dtype="<f4")
    return {
        "shape": list(a.shape),
        "dtype": "f32le",
        "data": base64.b64encode(a.tobytes()).decode("ascii"),
    }


def from_wire(t: Tensor, expect_rank: int = 3) -> np.ndarray:
    if t.dtype != "f32le":
        raise WireError("BackendShapeMismatch", f"unsupported dtype {t.dtype!r}")
    if len(t.shape) != expect_rank:
        raise WireError(
            "BackendShapeMismatch", f"expected rank-{expect_rank} tensor, got shape {t.shape}"
        )
    try:
        raw = base64.b64decode(t.data)
        a = np.frombuffer(raw, dtype="<f4")
    except (ValueError, TypeError) as exc:
        raise WireError("BackendShapeMismatch", f"undecodable tensor payload: {exc}") from exc
    size = int(np.prod(t.shape)) if t.shape else 0
    if a.size != size:
        raise WireError("BackendShapeMismatch", "payload size does not match shape")
    a = a.reshape(t.shape).astype(np.float32)
    if not np.isfinite(a).all():
        raise WireError("NonFiniteLatent", "tensor contains NaN or infinity")
    return a


class BaseRequest(BaseModel):
    session_id: str
    seed: int = 0


class EncodeRequest(BaseRequest):
    image: Tensor


class AddNoiseRequest(BaseRequest):
    latent: Tensor
    t: int
    steps: int = 0


class DenoiseRequest(BaseRequest):
    latent: Tensor
    mask: Tensor
    x_cond: Tensor
    prompt: str = ""
    t: int
    steps: int = 0
    guidance: float = Field(default=7.5)


class DecodeRequest(BaseRequest):
    latent: Tensor


class DescribeRequest(BaseRequest):
    image_png: str
