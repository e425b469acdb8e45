import numpy as np
import pytest
from fastapi.testclient import TestClient

from denoiser_service.app import create_app
from denoiser_service.wire import Tensor, from_wire, to_wire


@pytest.fixture
def client():
    return TestClient(create_app("builtin"))


@pytest.fixture
def rng():
    return np.random.default_rng(987)


def tensor_of(resp_field: dict) -> np.ndarray:
    return from_wire(Tensor(**resp_field))


def post_ok(client, endpoint: str, payload: dict) -> dict:
    resp = client.post(endpoint, json=payload)
    assert resp.status_code == 200, resp.text
    return resp.json()


def make_image(rng, h=64, w=64) -> np.ndarray:
    yy, xx = np.mgrid[0:h, 0:w] / max(h, w)
    base = np.stack([0.2 + 0.6 * xx, 0.3 + 0.5 * yy, 0.5 + 0.3 * np.sin(6 * xx)])
    return np.clip(base + rng.normal(0, 0.02, (3, h, w)), 0, 1).astype(np.float32)


__all__ = ["tensor_of", "post_ok", "make_image", "to_wire"]
