"""Synthetic texture mosaics with exact ground truth.

Eight mask layouts (two to five regions: splits, stripes, wedges,
disks, rings, polygonal cells), oriented-sinusoid and bandpass-noise
texture generators, and pixel-by-pixel composition onto the 8-bit
gray grid.  Everything is a deterministic function of its seed, so a
labeled test set of any size can be rebuilt from one integer.
"""

from __future__ import annotations

import csv
import os
from dataclasses import dataclass, field

import numpy as np

from .clustering import Partition
from .fourier import freq_grid
from .imgio import load_image, quantize8, save_image, save_labels

_RING_FRACTIONS = (0.15, 0.28, 0.40)
_CELL_SITES = ((0.22, 0.24), (0.25, 0.78), (0.55, 0.50),
               (0.80, 0.20), (0.78, 0.82))


def _square_grid(n: int):
    if n < 2:
        raise ValueError("mask side must be at least 2")
    yy, xx = np.mgrid[0:n, 0:n].astype(float)
    return yy, xx


def _mask_halves(n: int) -> np.ndarray:
    _, xx = _square_grid(n)
    return (xx >= n / 2).astype(np.int32)


def _mask_diagonal(n: int) -> np.ndarray:
    yy, xx = _square_grid(n)
    return (yy + xx >= n).astype(np.int32)


def _mask_disk(n: int) -> np.ndarray:
    yy, xx = _square_grid(n)
    c = (n - 1) / 2.0
    return (np.hypot(yy - c, xx - c) <= 0.3 * n).astype(np.int32)


def _mask_stripes(n: int) -> np.ndarray:
    yy, _ = _square_grid(n)
    return np.minimum(yy.astype(np.int64) * 3 // n, 2).astype(np.int32)


def _mask_wedges(n: int) -> np.ndarray:
    yy, xx = _square_grid(n)
    c = (n - 1) / 2.0
    theta = np.arctan2(yy - c, xx - c)
    return np.minimum((theta + np.pi) / (2 * np.pi / 3), 2.999).astype(np.int32)


def _mask_quadrants(n: int) -> np.ndarray:
    yy, xx = _square_grid(n)
    return ((yy >= n / 2) * 2 + (xx >= n / 2)).astype(np.int32)


def _mask_rings(n: int) -> np.ndarray:
    yy, xx = _square_grid(n)
    c = (n - 1) / 2.0
    r = np.hypot(yy - c, xx - c)
    edges = [f * n for f in _RING_FRACTIONS]
    return np.digitize(r, edges).astype(np.int32)


def _mask_cells(n: int) -> np.ndarray:
    yy, xx = _square_grid(n)
    d = [(yy - fy * n) ** 2 + (xx - fx * n) ** 2 for fy, fx in _CELL_SITES]
    return np.argmin(np.stack(d), axis=0).astype(np.int32)


MASK_LAYOUTS = {
    "halves": (2, _mask_halves),
    "diagonal": (2, _mask_diagonal),
    "disk": (2, _mask_disk),
    "stripes": (3, _mask_stripes),
    "wedges": (3, _mask_wedges),
    "quadrants": (4, _mask_quadrants),
    "rings": (4, _mask_rings),
    "cells": (5, _mask_cells),
}


def build_mask(name: str, size: int) -> Partition:
    """Ground-truth label map for one of the named layouts."""
    if name not in MASK_LAYOUTS:
        raise ValueError(f"unknown layout {name!r}; "
                         f"choose from {sorted(MASK_LAYOUTS)}")
    k, builder = MASK_LAYOUTS[name]
    labels = builder(size)
    part = Partition.from_labels(labels, k)
    if part.region_sizes.min() == 0:
        raise ValueError(f"layout {name!r} degenerates at size {size}")
    return part


def sinusoid_texture(shape, freq: float, angle: float,
                     phase: float = 0.0, contrast: float = 1.0) -> np.ndarray:
    """Plane wave in [0, 1]; freq is radians per pixel along the normal."""
    if not 0.0 < freq <= np.pi:
        raise ValueError("freq must lie in (0, pi]")
    if not 0.0 < contrast <= 1.0:
        raise ValueError("contrast must lie in (0, 1]")
    yy, xx = np.mgrid[0:shape[0], 0:shape[1]].astype(float)
    arg = freq * (np.cos(angle) * xx + np.sin(angle) * yy) + phase
    return 0.5 + 0.5 * contrast * np.cos(arg)


def noise_texture(shape, band, seed: int, angle: float | None = None,
                  width: float = np.pi / 6) -> np.ndarray:
    """White noise bandpassed to a frequency annulus, min-max mapped
    to [0, 1]; an angle restricts the annulus to an oriented sector."""
    lo, hi = band
    if not 0.0 <= lo < hi:
        raise ValueError("band must satisfy 0 <= lo < hi")
    rng = np.random.default_rng(seed)
    spectrum = np.fft.fftshift(np.fft.fft2(rng.standard_normal(shape)))
    radius, theta = freq_grid(shape)
    keep = (radius >= lo) & (radius < hi)
    if angle is not None:
        # orientation is pi-periodic, matching the folded angle grid
        delta = np.abs((theta - angle + np.pi / 2) % np.pi - np.pi / 2)
        keep &= delta <= width
    tex = np.fft.ifft2(np.fft.ifftshift(spectrum * keep)).real
    span = tex.max() - tex.min()
    if span == 0:
        return np.full(shape, 0.5)
    return (tex - tex.min()) / span


def texture_pool(count: int, size: int, seed: int = 0) -> list[np.ndarray]:
    """Deterministic pool of distinct textures, sinusoids and noises
    interleaved, frequencies and orientations spread over the plane."""
    if count < 1:
        raise ValueError("count must be positive")
    rng = np.random.default_rng(seed)
    pool = []
    waves = (count + 1) // 2
    for i in range(count):
        if i % 2 == 0:
            j = i // 2
            freq = np.pi / 6 + (j / max(waves - 1, 1)) * (3 * np.pi / 4
                                                          - np.pi / 6)
            pool.append(sinusoid_texture((size, size), freq,
                                         angle=j * np.pi / max(waves, 1),
                                         phase=rng.uniform(0, 2 * np.pi)))
        else:
            j = i // 2
            lo = np.pi / 16 * (1.5 ** j)
            band = (min(lo, np.pi / 3), min(2.2 * lo, 0.95 * np.pi))
            angle = None if j % 2 == 0 else (j * np.pi / 5 - np.pi / 2)
            pool.append(noise_texture((size, size), band,
                                      seed=int(rng.integers(2 ** 31)),
                                      angle=angle))
    return pool


@dataclass
class MosaicSpec:
    """One mosaic: a label mask plus one texture per region.

    Texture entries may be image file paths or in-memory [0, 1] arrays;
    the seed records how the textures were picked from a pool.
    """

    mask: Partition
    texture_paths: tuple = field(default_factory=tuple)
    seed: int = 0

    def __post_init__(self):
        if len(self.texture_paths) != self.mask.k:
            raise ValueError(f"{self.mask.k} regions need exactly "
                             f"{self.mask.k} textures, "
                             f"got {len(self.texture_paths)}")


def random_spec(mask: Partition, pool, seed: int) -> MosaicSpec:
    """Draw one distinct pool entry per region, determined by seed."""
    if len(pool) < mask.k:
        raise ValueError(f"pool of {len(pool)} textures cannot fill "
                         f"{mask.k} regions without repeats")
    rng = np.random.default_rng(seed)
    picks = rng.choice(len(pool), size=mask.k, replace=False)
    return MosaicSpec(mask, tuple(pool[int(j)] for j in picks), seed=seed)


def compose_mosaic(spec: MosaicSpec) -> tuple[np.ndarray, Partition]:
    """Pixelwise composition: each pixel copies the texture of its
    region, then the image is snapped to the 256-level gray grid."""
    mask = spec.mask
    h, w = mask.labels.shape
    out = np.empty((h, w))
    for lab, entry in enumerate(spec.texture_paths):
        if isinstance(entry, (str, os.PathLike)):
            tex = load_image(os.fspath(entry))
        else:
            tex = np.asarray(entry, dtype=float)
        if tex.shape[0] < h or tex.shape[1] < w:
            raise ValueError(f"texture {lab} has shape {tex.shape}, "
                             f"smaller than the {h}x{w} mask")
        sel = mask.labels == lab
        out[sel] = tex[:h, :w][sel]
    return quantize8(out), mask


def _image_seed(master: int, index: int) -> int:
    return int(np.random.SeedSequence([master, index]).generate_state(1)[0])


def generate_dataset(out_dir: str, count: int, size: int = 512,
                     layouts=None, seed: int = 0,
                     pool_size: int = 13) -> list[tuple[str, str]]:
    """Write `count` mosaic/ground-truth pairs plus their texture pool.

    Layouts cycle through the registry; per-image texture picks come
    from a seed chain, so any single image can be rebuilt in isolation.
    Returns the (image_path, labels_path) pairs, also listed in
    index.csv alongside each image's layout and seed.
    """
    if count < 1:
        raise ValueError("count must be positive")
    names = tuple(layouts) if layouts else tuple(MASK_LAYOUTS)
    for name in names:
        if name not in MASK_LAYOUTS:
            raise ValueError(f"unknown layout {name!r}")
    os.makedirs(out_dir, exist_ok=True)
    tex_dir = os.path.join(out_dir, "textures")
    os.makedirs(tex_dir, exist_ok=True)
    pool = [quantize8(t) for t in texture_pool(pool_size, size, seed)]
    for i, tex in enumerate(pool):
        save_image(tex, os.path.join(tex_dir, f"tex_{i:02d}.pgm"))
    masks = {name: build_mask(name, size) for name in names}
    pairs = []
    rows = []
    for i in range(count):
        name = names[i % len(names)]
        spec = random_spec(masks[name], pool, _image_seed(seed, i))
        img, gt = compose_mosaic(spec)
        img_path = os.path.join(out_dir, f"img_{i:04d}.pgm")
        gt_path = os.path.join(out_dir, f"gt_{i:04d}.pgm")
        save_image(img, img_path)
        save_labels(gt.labels, gt_path)
        pairs.append((img_path, gt_path))
        rows.append((f"img_{i:04d}.pgm", f"gt_{i:04d}.pgm", name, spec.seed))
    with open(os.path.join(out_dir, "index.csv"), "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(("image", "labels", "layout", "seed"))
        writer.writerows(rows)
    return pairs


def load_dataset(path: str) -> list[tuple[str, str]]:
    """Image/labels pairs of a dataset directory, via its index.csv."""
    index = os.path.join(path, "index.csv")
    if not os.path.isfile(index):
        raise ValueError(f"{path}: not a dataset directory (no index.csv)")
    pairs = []
    with open(index, newline="") as fh:
        for row in csv.DictReader(fh):
            pairs.append((os.path.join(path, row["image"]),
                          os.path.join(path, row["labels"])))
    if not pairs:
        raise ValueError(f"{index}: empty dataset")
    return pairs
