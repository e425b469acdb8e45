"""Denoiser sidecar: inpainting primitives behind a JSON-over-HTTP protocol.

One worker serves one request at a time (FIFO); every bit of randomness is
derived from the request seed, so equal requests produce equal responses.
"""

__version__ = "0.1.0"
