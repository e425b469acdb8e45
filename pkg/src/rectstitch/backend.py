"""Inpainting-backend contract: encode/noise/denoise/decode primitives.

The core owns the mask schedule; a backend owns the generative model. Two
implementations ship here: a deterministic in-process reference backend
(identity codec plus an iterative smoothing fill — a test vehicle, not a
quality baseline) and an HTTP client speaking the sidecar wire protocol.

Wire protocol (JSON over HTTP, one POST per primitive):

    /v1/capabilities  {session_id, seed}                          -> capability fields
    /v1/encode        {session_id, seed, image: T}                -> {latent: T}
    /v1/add_noise     {session_id, seed, latent: T, t, steps}     -> {latent: T}
    /v1/denoise_step  {session_id, seed, latent: T, mask: T,
                       x_cond: T, prompt, t, steps, guidance}     -> {latent: T}
    /v1/decode        {session_id, seed, latent: T}               -> {image: T}

where T = {"shape": [c, h, w], "dtype": "f32le", "data": base64 of row-major
little-endian float32}. Errors arrive as HTTP 422 with {code, message}; codes
map onto the exception taxonomy. Default timeout is 120 s per call.
"""

from __future__ import annotations

import base64
import uuid
from abc import ABC, abstractmethod
from dataclasses import dataclass

import numpy as np
import requests

from .errors import BackendShapeMismatch, BackendUnavailable, NonFiniteLatent
from .model import ImageBuffer, WeightMask


@dataclass(frozen=True)
class BackendCapabilities:
    latent_scale: int
    latent_channels: int
    max_side: int
    supports_guidance: bool
    roundtrip_tolerance: float
    metadata: dict | None = None

    def __post_init__(self):
        if self.latent_scale < 1 or self.latent_channels < 1:
            raise BackendShapeMismatch("latent_scale and latent_channels must be >= 1")
        if not (0.0 <= self.roundtrip_tolerance < 1.0):
            raise BackendShapeMismatch("roundtrip_tolerance must lie in [0, 1)")


@dataclass(frozen=True)
class Latent:
    """Backend-owned tensor (channels x h x w) tagged with its step index."""

    data: np.ndarray
    t: int = 0

    def __post_init__(self):
        a = np.asarray(self.data, dtype=np.float32)
        if a.ndim != 3:
            raise BackendShapeMismatch(f"latent must be CxHxW, got shape {a.shape}")
        if not np.isfinite(a).all():
            raise NonFiniteLatent("latent contains NaN or infinity")
        object.__setattr__(self, "data", np.ascontiguousarray(a))

    @property
    def channels(self) -> int:
        return self.data.shape[0]

    @property
    def h(self) -> int:
        return self.data.shape[1]

    @property
    def w(self) -> int:
        return self.data.shape[2]


class InpaintBackend(ABC):
    """Contract every backend implements; all primitives are pure functions
    of their arguments and the seed."""

    @abstractmethod
    def capabilities(self) -> BackendCapabilities: ...

    def begin_session(self, seed: int, steps: int) -> None:
        """Pin the RNG seed and step count for the next reverse trajectory."""

    @abstractmethod
    def encode(self, img: ImageBuffer) -> Latent: ...

    @abstractmethod
    def add_noise(self, x: Latent, t: int, seed: int) -> Latent: ...

    @abstractmethod
    def denoise_step(
        self,
        x: Latent,
        mask_small: WeightMask,
        x_cond: Latent,
        prompt: str,
        t: int,
        guidance: float,
    ) -> Latent: ...

    @abstractmethod
    def decode(self, x: Latent) -> ImageBuffer: ...


def _neighbor_mean(a: np.ndarray) -> np.ndarray:
    """Mean of the in-raster 4-neighbors, per channel; a is CxHxW."""
    s = np.zeros_like(a)
    n = np.zeros(a.shape[1:], dtype=a.dtype)
    s[:, 1:, :] += a[:, :-1, :]
    n[1:, :] += 1
    s[:, :-1, :] += a[:, 1:, :]
    n[:-1, :] += 1
    s[:, :, 1:] += a[:, :, :-1]
    n[:, 1:] += 1
    s[:, :, :-1] += a[:, :, 1:]
    n[:, :-1] += 1
    return s / n


class ReferenceBackend(InpaintBackend):
    """Identity codec, zero-noise schedule, and a 10-iteration neighborhood
    smoothing fill. Deterministic by construction, exercising every schedule
    branch without any pretrained model."""

    SMOOTHING_ITERATIONS = 10

    def capabilities(self) -> BackendCapabilities:
        return BackendCapabilities(
            latent_scale=1,
            latent_channels=3,
            max_side=8192,
            supports_guidance=False,
            roundtrip_tolerance=0.0,
            metadata={"solver": "smoothing-fill", "determinism_bound": 0.0},
        )

    def encode(self, img: ImageBuffer) -> Latent:
        return Latent(np.moveaxis(img.to_rgb().data, 2, 0), t=0)

    def add_noise(self, x: Latent, t: int, seed: int) -> Latent:
        return Latent(x.data, t=t)

    def denoise_step(self, x, mask_small, x_cond, prompt, t, guidance) -> Latent:
        if x.data.shape != x_cond.data.shape:
            raise BackendShapeMismatch("latent and conditioning shapes differ")
        if mask_small.weights.shape != x.data.shape[1:]:
            raise BackendShapeMismatch("mask resolution does not match the latent")
        m = mask_small.weights[None, :, :]
        cond = x_cond.data
        y = cond.copy()
        for _ in range(self.SMOOTHING_ITERATIONS):
            y = (1.0 - m) * cond + m * _neighbor_mean(y)
        return Latent(y, t=t)

    def decode(self, x: Latent) -> ImageBuffer:
        return ImageBuffer(np.clip(np.moveaxis(x.data, 0, 2), 0.0, 1.0))


def tensor_to_wire(a: np.ndarray) -> dict:
    a = np.ascontiguousarray(a, dtype="<f4")
    return {
        "shape": list(a.shape),
        "dtype": "f32le",
        "data": base64.b64encode(a.tobytes()).decode("ascii"),
    }


def tensor_from_wire(obj: dict) -> np.ndarray:
    if obj.get("dtype") != "f32le":
        raise BackendShapeMismatch(f"unsupported wire dtype {obj.get('dtype')!r}")
    raw = base64.b64decode(obj["data"])
    a = np.frombuffer(raw, dtype="<f4")
    shape = tuple(int(s) for s in obj["shape"])
    if a.size != int(np.prod(shape)):
        raise BackendShapeMismatch("wire tensor payload does not match its shape")
    return a.reshape(shape).astype(np.float32)


class RemoteBackend(InpaintBackend):
    """Client for a sidecar service speaking the wire protocol above.

    ``http`` may be any object with requests.Session's ``post`` signature;
    tests inject in-process transports through it.
    """

    def __init__(self, base_url: str, http=None, timeout: float = 120.0):
        self.base_url = base_url.rstrip("/")
        self.http = http if http is not None else requests.Session()
        self.timeout = timeout
        self.session_id = uuid.uuid4().hex
        self.seed = 0
        self.steps = 0
        self._caps: BackendCapabilities | None = None

    def begin_session(self, seed: int, steps: int) -> None:
        self.session_id = uuid.uuid4().hex
        self.seed = int(seed)
        self.steps = int(steps)

    def _post(self, endpoint: str, payload: dict) -> dict:
        payload = {"session_id": self.session_id, "seed": self.seed, **payload}
        try:
            resp = self.http.post(
                f"{self.base_url}{endpoint}", json=payload, timeout=self.timeout
            )
        except requests.RequestException as exc:
            raise BackendUnavailable(f"{endpoint}: {exc}") from exc
        if resp.status_code == 422:
            try:
                body = resp.json()
            except ValueError:
                body = {}
            code = body.get("code", "")
            msg = f"{endpoint}: {body.get('message', 'backend rejected the request')}"
            if code == "NonFiniteLatent":
                raise NonFiniteLatent(msg)
            raise BackendShapeMismatch(msg)
        if resp.status_code != 200:
            raise BackendUnavailable(f"{endpoint}: HTTP {resp.status_code}")
        try:
            return resp.json()
        except ValueError as exc:
            raise BackendUnavailable(f"{endpoint}: undecodable response body") from exc

    def capabilities(self) -> BackendCapabilities:
        if self._caps is None:
            body = self._post("/v1/capabilities", {})
            self._caps = BackendCapabilities(
                latent_scale=int(body["latent_scale"]),
                latent_channels=int(body["latent_channels"]),
                max_side=int(body["max_side"]),
                supports_guidance=bool(body["supports_guidance"]),
                roundtrip_tolerance=float(body["roundtrip_tolerance"]),
                metadata=body.get("metadata"),
            )
        return self._caps

    def encode(self, img: ImageBuffer) -> Latent:
        body = self._post(
            "/v1/encode", {"image": tensor_to_wire(np.moveaxis(img.data, 2, 0))}
        )
        return Latent(tensor_from_wire(body["latent"]), t=0)

    def add_noise(self, x: Latent, t: int, seed: int) -> Latent:
        body = self._post(
            "/v1/add_noise",
            {"latent": tensor_to_wire(x.data), "t": int(t), "steps": self.steps, "seed": int(seed)},
        )
        return Latent(tensor_from_wire(body["latent"]), t=t)

    def denoise_step(self, x, mask_small, x_cond, prompt, t, guidance) -> Latent:
        body = self._post(
            "/v1/denoise_step",
            {
                "latent": tensor_to_wire(x.data),
                "mask": tensor_to_wire(mask_small.weights[None, :, :]),
                "x_cond": tensor_to_wire(x_cond.data),
                "prompt": prompt,
                "t": int(t),
                "steps": self.steps,
                "guidance": float(guidance),
            },
        )
        return Latent(tensor_from_wire(body["latent"]), t=t)

    def decode(self, x: Latent) -> ImageBuffer:
        body = self._post("/v1/decode", {"latent": tensor_to_wire(x.data)})
        img = tensor_from_wire(body["image"])
        if img.ndim != 3:
            raise BackendShapeMismatch("decoded image must be CxHxW")
        return ImageBuffer(np.clip(np.moveaxis(img, 0, 2), 0.0, 1.0))


def measure_roundtrip(backend: InpaintBackend, img: ImageBuffer) -> float:
    """Max per-pixel |decode(encode(img)) - img|, the handshake measurement
    backing a backend's declared roundtrip_tolerance."""
    out = backend.decode(backend.encode(img))
    a = img.to_rgb().data
    b = out.data
    if b.shape != a.shape:
        raise BackendShapeMismatch(
            f"round-trip changed the raster shape: {a.shape} -> {b.shape}"
        )
    return float(np.abs(a - b).max())
