"""DC-centered 2D spectra and polar resampling.

All frequency-domain work in this package uses the shifted layout: bin
(H//2, W//2) is DC and the axes run over [-pi, pi) in radians per sample.
The polar view samples the magnitude on a half-plane (angles in
[-pi/2, pi/2)), which is enough for real images because |S(-w)| = |S(w)|.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

MIN_RADII = 32
MIN_ANGLES = 64


def forward_spectrum(img: np.ndarray) -> np.ndarray:
    """2D FFT with DC moved to the center bin."""
    return np.fft.fftshift(np.fft.fft2(np.asarray(img, dtype=np.float64)))


def inverse_spectrum(spec: np.ndarray) -> np.ndarray:
    """Inverse of forward_spectrum; returns the real part."""
    return np.fft.ifft2(np.fft.ifftshift(spec)).real


def freq_axis(n: int) -> np.ndarray:
    """Frequencies (rad/sample) of the DC-centered bins along one axis."""
    return 2.0 * np.pi * (np.arange(n) - n // 2) / n


def freq_grid(shape: tuple[int, int]) -> tuple[np.ndarray, np.ndarray]:
    """(radius, angle) of every DC-centered bin; angle folded into [-pi/2, pi/2)."""
    wy = freq_axis(shape[0])[:, None]
    wx = freq_axis(shape[1])[None, :]
    radius = np.hypot(wx, wy)
    angle = np.arctan2(wy, wx)
    # Fold the left half-plane onto the right (period pi).
    angle = np.where(angle >= np.pi / 2, angle - np.pi, angle)
    angle = np.where(angle < -np.pi / 2, angle + np.pi, angle)
    return radius + 0 * angle, angle + 0 * radius


@dataclass
class PolarSpectrum:
    """Magnitude resampled on a polar grid.

    mag has shape (n_radii, n_angles); radii run linearly over [0, pi],
    angles over [-pi/2, pi/2) with uniform spacing pi/n_angles.
    """

    mag: np.ndarray
    radii: np.ndarray
    angles: np.ndarray


def polar_resample(spec: np.ndarray, n_radii: int | None = None,
                   n_angles: int = 360) -> PolarSpectrum:
    """Bilinear resampling of |spec| onto the polar grid.

    Defaults: n_radii = max(MIN_RADII, N/2) for an NxN input, n_angles = 360.
    """
    spec = np.asarray(spec)
    h, w = spec.shape
    if n_radii is None:
        n_radii = max(MIN_RADII, min(h, w) // 2)
    if n_radii < MIN_RADII:
        raise ValueError(f"n_radii must be >= {MIN_RADII}, got {n_radii}")
    if n_angles < MIN_ANGLES or n_angles % 2 != 0:
        raise ValueError(f"n_angles must be even and >= {MIN_ANGLES}, got {n_angles}")

    radii = np.linspace(0.0, np.pi, n_radii)
    angles = -np.pi / 2 + np.pi * np.arange(n_angles) / n_angles
    mag = np.abs(spec)

    r = radii[:, None]
    th = angles[None, :]
    # Fractional bin coordinates of each polar sample; the frequency plane
    # is periodic, so out-of-range corners wrap.
    fx = (r * np.cos(th)) / (2.0 * np.pi / w) + w // 2
    fy = (r * np.sin(th)) / (2.0 * np.pi / h) + h // 2
    x0 = np.floor(fx).astype(np.int64)
    y0 = np.floor(fy).astype(np.int64)
    ax = fx - x0
    ay = fy - y0
    x0m, x1m = x0 % w, (x0 + 1) % w
    y0m, y1m = y0 % h, (y0 + 1) % h
    out = ((1 - ay) * (1 - ax) * mag[y0m, x0m]
           + (1 - ay) * ax * mag[y0m, x1m]
           + ay * (1 - ax) * mag[y1m, x0m]
           + ay * ax * mag[y1m, x1m])
    return PolarSpectrum(mag=out, radii=radii, angles=angles)
