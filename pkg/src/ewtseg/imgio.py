"""Grayscale image and label-map I/O.

Images travel through the pipeline as float64 arrays in [0, 1].  On disk
they are 8-bit grayscale PGM (P5) or PNG; label maps are 16-bit PGM so
region counts above 255 survive a round trip.
"""

from __future__ import annotations

import os

import numpy as np
from PIL import Image as _PILImage


class ImageFormatError(ValueError):
    """File is missing, empty, not grayscale, or not a supported format."""


def _read_pgm_header(data: bytes, path: str):
    # Tokenize the P5 header by whitespace, skipping '#' comments.
    pos = 0
    tokens = []
    while len(tokens) < 4:
        while pos < len(data) and data[pos : pos + 1].isspace():
            pos += 1
        if pos >= len(data):
            raise ImageFormatError(f"{path}: truncated PGM header")
        if data[pos : pos + 1] == b"#":
            while pos < len(data) and data[pos : pos + 1] not in (b"\n", b"\r"):
                pos += 1
            continue
        start = pos
        while pos < len(data) and not data[pos : pos + 1].isspace():
            pos += 1
        tokens.append(data[start:pos])
    # Exactly one whitespace byte separates the maxval from the raster.
    pos += 1
    return tokens, pos


def _load_pgm(path: str) -> tuple[np.ndarray, int]:
    with open(path, "rb") as fh:
        data = fh.read()
    tokens, pos = _read_pgm_header(data, path)
    if tokens[0] != b"P5":
        raise ImageFormatError(f"{path}: not a binary PGM (magic {tokens[0]!r})")
    try:
        width, height, maxval = int(tokens[1]), int(tokens[2]), int(tokens[3])
    except ValueError as exc:
        raise ImageFormatError(f"{path}: malformed PGM header") from exc
    if width <= 0 or height <= 0:
        raise ImageFormatError(f"{path}: zero-sized image {width}x{height}")
    if maxval <= 0 or maxval > 65535:
        raise ImageFormatError(f"{path}: unsupported maxval {maxval}")
    dtype = np.dtype(">u2") if maxval > 255 else np.uint8
    count = width * height
    raster = np.frombuffer(data, dtype=dtype, count=-1, offset=pos)
    if raster.size < count:
        raise ImageFormatError(f"{path}: raster shorter than {width}x{height}")
    return raster[:count].reshape(height, width).astype(np.uint16), maxval


def load_image(path: str) -> np.ndarray:
    """Read an 8-bit grayscale PGM or PNG as float64 in [0, 1] (values / 255)."""
    if not os.path.isfile(path):
        raise ImageFormatError(f"{path}: no such file")
    ext = os.path.splitext(path)[1].lower()
    if ext in (".pgm", ".pnm"):
        raster, maxval = _load_pgm(path)
        if maxval != 255:
            raise ImageFormatError(f"{path}: expected 8-bit image, maxval {maxval}")
        arr = raster
    elif ext == ".png":
        with _PILImage.open(path) as im:
            if im.mode != "L":
                raise ImageFormatError(f"{path}: expected 8-bit grayscale PNG, mode {im.mode}")
            arr = np.asarray(im, dtype=np.uint16)
    else:
        raise ImageFormatError(f"{path}: unsupported extension {ext!r}")
    if arr.size == 0:
        raise ImageFormatError(f"{path}: zero-sized image")
    return arr.astype(np.float64) / 255.0


def save_image(img: np.ndarray, path: str) -> None:
    """Write a [0, 1] image as 8-bit PGM or PNG (by extension)."""
    img = np.asarray(img, dtype=np.float64)
    if img.ndim != 2 or img.size == 0:
        raise ImageFormatError(f"cannot save array of shape {img.shape} as an image")
    q = np.clip(np.rint(img * 255.0), 0, 255).astype(np.uint8)
    ext = os.path.splitext(path)[1].lower()
    if ext in (".pgm", ".pnm"):
        h, w = q.shape
        with open(path, "wb") as fh:
            fh.write(f"P5\n{w} {h}\n255\n".encode("ascii"))
            fh.write(q.tobytes())
    elif ext == ".png":
        _PILImage.fromarray(q, mode="L").save(path)
    else:
        raise ImageFormatError(f"unsupported extension {ext!r}")


def save_labels(labels: np.ndarray, path: str) -> None:
    """Write an integer label map as a 16-bit PGM (maxval 65535, big-endian)."""
    labels = np.asarray(labels)
    if labels.ndim != 2 or labels.size == 0:
        raise ImageFormatError(f"cannot save array of shape {labels.shape} as labels")
    if labels.min() < 0 or labels.max() > 65535:
        raise ImageFormatError("labels out of the 16-bit range")
    h, w = labels.shape
    with open(path, "wb") as fh:
        fh.write(f"P5\n{w} {h}\n65535\n".encode("ascii"))
        fh.write(labels.astype(">u2").tobytes())


def load_labels(path: str) -> np.ndarray:
    """Read a label map written by save_labels (or any PGM) as int labels."""
    raster, _ = _load_pgm(path)
    return raster.astype(np.int64)


def quantize8(img: np.ndarray) -> np.ndarray:
    """Snap a [0, 1] image to the 8-bit grid (round to /255 steps)."""
    return np.clip(np.rint(np.asarray(img, dtype=np.float64) * 255.0), 0, 255) / 255.0
