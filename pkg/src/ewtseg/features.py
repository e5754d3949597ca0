"""Per-pixel texture features from subband coefficient stacks.

Each retained band is turned into a feature plane by one of three local
descriptors (energy, entropy, LBP codes), then smoothed by a mean filter
over a square window with mirrored edges.  The lowpass band carries
illumination rather than texture, so it is dropped by default.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.ndimage import uniform_filter

MODES = ("energy", "entropy", "lbp")
DEFAULT_WINDOW = 19
LBP_DEFAULT_WINDOW = 35

# Neighbour offsets clockwise from the top-left corner; the first entry is
# the most significant bit of the 8-bit code.
_LBP_OFFSETS = ((-1, -1), (-1, 0), (-1, 1), (0, 1),
                (1, 1), (1, 0), (1, -1), (0, -1))


@dataclass
class PostProcessConfig:
    mode: str = "energy"
    window: int | None = None
    drop_lowpass: bool = True

    def __post_init__(self):
        if self.mode not in MODES:
            raise ValueError(f"mode must be one of {MODES}, got {self.mode!r}")
        if self.window is None:
            self.window = LBP_DEFAULT_WINDOW if self.mode == "lbp" \
                else DEFAULT_WINDOW
        if self.window < 1 or self.window % 2 == 0:
            raise ValueError("window must be an odd positive count")


@dataclass
class FeatureField:
    """Row-major (height, width, dim) array of per-pixel feature vectors."""

    width: int
    height: int
    dim: int
    data: np.ndarray
    labels: tuple = None

    def __post_init__(self):
        if self.data.shape != (self.height, self.width, self.dim):
            raise ValueError("data shape does not match declared dimensions")
        if not np.isfinite(self.data).all():
            raise ValueError("feature field contains non-finite values")

    @classmethod
    def from_planes(cls, planes, labels=None):
        data = np.stack(planes, axis=-1)
        h, w, k = data.shape
        return cls(width=w, height=h, dim=k, data=data,
                   labels=None if labels is None else tuple(labels))


def local_mean(band: np.ndarray, window: int) -> np.ndarray:
    """Arithmetic mean over a window x window neighbourhood, mirrored edges."""
    if window < 1 or window % 2 == 0:
        raise ValueError("window must be an odd positive count")
    if window == 1:
        return np.asarray(band, dtype=float).copy()
    return uniform_filter(np.asarray(band, dtype=float), size=window,
                          mode="reflect")


def _retained(stack, drop_lowpass):
    labels = stack.labels()
    keep = [(band, lab) for i, (band, lab) in enumerate(zip(stack.bands, labels))
            if not (drop_lowpass and i == stack.lowpass_index)]
    if not keep:
        # degenerate bank (no boundaries detected): the lowpass is all
        # there is, so keep it rather than aborting the whole run
        keep = list(zip(stack.bands, labels))
    return keep


def post_energy(stack, cfg: PostProcessConfig) -> FeatureField:
    """Locally averaged squared coefficients."""
    planes, labels = [], []
    for band, lab in _retained(stack, cfg.drop_lowpass):
        planes.append(local_mean(np.abs(band) ** 2, cfg.window))
        labels.append(lab)
    return FeatureField.from_planes(planes, labels)


def post_entropy(stack, cfg: PostProcessConfig) -> FeatureField:
    """Locally averaged -u log u of globally min-max scaled coefficients.

    A constant band has zero range and contributes an all-zero plane; the
    0 log 0 limit is taken as 0.
    """
    planes, labels = [], []
    for band, lab in _retained(stack, cfg.drop_lowpass):
        band = np.real(band)
        lo, hi = band.min(), band.max()
        if hi > lo:
            u = (band - lo) / (hi - lo)
            with np.errstate(divide="ignore", invalid="ignore"):
                ent = np.where(u > 0, -u * np.log(u), 0.0)
        else:
            ent = np.zeros_like(band)
        planes.append(local_mean(ent, cfg.window))
        labels.append(lab)
    return FeatureField.from_planes(planes, labels)


def lbp_codes(band: np.ndarray) -> np.ndarray:
    """Classic 8-neighbour binary codes: bit set where neighbour >= center,
    clockwise from the top-left neighbour, which holds the high bit."""
    band = np.real(np.asarray(band))
    padded = np.pad(band, 1, mode="symmetric")
    h, w = band.shape
    code = np.zeros((h, w))
    for bit, (dy, dx) in enumerate(_LBP_OFFSETS):
        neighbour = padded[1 + dy:1 + dy + h, 1 + dx:1 + dx + w]
        code += (neighbour >= band) * float(2 ** (7 - bit))
    return code


def post_lbp(stack, cfg: PostProcessConfig) -> FeatureField:
    """Locally averaged LBP codes, scaled to [0, 1] by the code range."""
    planes, labels = [], []
    for band, lab in _retained(stack, cfg.drop_lowpass):
        planes.append(local_mean(lbp_codes(band) / 255.0, cfg.window))
        labels.append(lab)
    return FeatureField.from_planes(planes, labels)


_DISPATCH = {"energy": post_energy, "entropy": post_entropy, "lbp": post_lbp}


def compute_features(stack, cfg: PostProcessConfig) -> FeatureField:
    return _DISPATCH[cfg.mode](stack, cfg)


def save_features(field: FeatureField, path) -> None:
    """Flat binary record: three little-endian uint32 (height, width, dim)
    then the row-major float64 vectors."""
    with open(path, "wb") as fh:
        np.asarray([field.height, field.width, field.dim],
                   dtype="<u4").tofile(fh)
        field.data.astype("<f8").tofile(fh)


def load_features(path) -> FeatureField:
    with open(path, "rb") as fh:
        header = np.fromfile(fh, dtype="<u4", count=3)
        if header.size != 3:
            raise ValueError("truncated feature record")
        h, w, k = (int(x) for x in header)
        data = np.fromfile(fh, dtype="<f8", count=h * w * k)
    if data.size != h * w * k:
        raise ValueError("truncated feature record")
    return FeatureField(width=w, height=h, dim=k,
                        data=data.reshape(h, w, k))
