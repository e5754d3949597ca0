"""Grayscale and label-map I/O round trips and format rejection."""

import numpy as np
import pytest
from PIL import Image as PILImage

from ewtseg.imgio import (
    ImageFormatError,
    load_image,
    load_labels,
    quantize8,
    save_image,
    save_labels,
)


def test_pgm_values_normalized(tmp_path):
    p = tmp_path / "tiny.pgm"
    p.write_bytes(b"P5\n2 2\n255\n" + bytes([0, 255, 128, 64]))
    img = load_image(str(p))
    assert img.shape == (2, 2)
    np.testing.assert_array_equal(img, [[0.0, 1.0], [128 / 255, 64 / 255]])


def test_pgm_header_comments(tmp_path):
    p = tmp_path / "c.pgm"
    p.write_bytes(b"P5\n# a comment\n2 1 # trailing\n255\n" + bytes([10, 20]))
    img = load_image(str(p))
    np.testing.assert_array_equal(img, [[10 / 255, 20 / 255]])


def test_pgm_round_trip_exact(tmp_path):
    rng = np.random.default_rng(0)
    img = rng.integers(0, 256, size=(17, 23)).astype(np.float64) / 255.0
    p = tmp_path / "rt.pgm"
    save_image(img, str(p))
    np.testing.assert_array_equal(load_image(str(p)), img)


def test_png_round_trip_exact(tmp_path):
    rng = np.random.default_rng(1)
    img = rng.integers(0, 256, size=(9, 11)).astype(np.float64) / 255.0
    p = tmp_path / "rt.png"
    save_image(img, str(p))
    np.testing.assert_array_equal(load_image(str(p)), img)


def test_save_clips_and_rounds(tmp_path):
    p = tmp_path / "clip.pgm"
    save_image(np.array([[-0.2, 0.5, 1.7]]), str(p))
    np.testing.assert_array_equal(load_image(str(p)) * 255, [[0, 128, 255]])


def test_labels_round_trip_above_255(tmp_path):
    rng = np.random.default_rng(2)
    labels = rng.integers(0, 300, size=(13, 7))
    p = tmp_path / "lab.pgm"
    save_labels(labels, str(p))
    out = load_labels(str(p))
    assert out.dtype == np.int64
    np.testing.assert_array_equal(out, labels)


def test_missing_file():
    with pytest.raises(ImageFormatError):
        load_image("/nonexistent/nowhere.pgm")


def test_color_png_rejected(tmp_path):
    p = tmp_path / "rgb.png"
    PILImage.fromarray(np.zeros((4, 4, 3), dtype=np.uint8), mode="RGB").save(p)
    with pytest.raises(ImageFormatError):
        load_image(str(p))


def test_bad_magic(tmp_path):
    p = tmp_path / "bad.pgm"
    p.write_bytes(b"P6\n2 2\n255\n" + bytes(12))
    with pytest.raises(ImageFormatError):
        load_image(str(p))


def test_truncated_raster(tmp_path):
    p = tmp_path / "short.pgm"
    p.write_bytes(b"P5\n4 4\n255\n" + bytes(3))
    with pytest.raises(ImageFormatError):
        load_image(str(p))


def test_sixteen_bit_rejected_as_image(tmp_path):
    p = tmp_path / "deep.pgm"
    save_labels(np.zeros((2, 2), dtype=int), str(p))
    with pytest.raises(ImageFormatError):
        load_image(str(p))


def test_unsupported_extension(tmp_path):
    with pytest.raises(ImageFormatError):
        save_image(np.zeros((2, 2)), str(tmp_path / "x.tiff"))


def test_save_rejects_bad_shapes(tmp_path):
    with pytest.raises(ImageFormatError):
        save_image(np.zeros(5), str(tmp_path / "v.pgm"))
    with pytest.raises(ImageFormatError):
        save_labels(np.array([[-1, 0]]), str(tmp_path / "n.pgm"))
    with pytest.raises(ImageFormatError):
        save_labels(np.array([[70000]]), str(tmp_path / "big.pgm"))


def test_quantize8_grid_and_idempotence():
    rng = np.random.default_rng(3)
    x = rng.random((32, 32))
    q = quantize8(x)
    assert np.abs(q - x).max() <= 0.5 / 255 + 1e-12
    np.testing.assert_array_equal(quantize8(q), q)
    np.testing.assert_array_equal(np.rint(q * 255), q * 255)
