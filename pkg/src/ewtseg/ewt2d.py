"""Adaptive 2D filter banks: tensor, ring, and curvelet partitions.

Every family here builds real, symmetric Fourier-domain masks whose
squares sum to one at each frequency bin (an adjusted tight frame), so
analysis followed by the adjoint synthesis reproduces the input exactly.
Ring and sector windows are evaluated directly on the Cartesian grid
(per-bin radius/angle); the terminal ring is left open above so the grid
corners beyond |w| = pi stay covered.

Supports' boundaries come from scale-space mode detection (modes.py) on
marginal magnitude curves:

- tensor: mean 1D row/column spectra, separable products of 1D filters;
- lp: angle-averaged radial profile, concentric rings;
- curvelet option 1: global rings x global sectors;
- curvelet option 2: global rings, sectors re-detected inside each ring;
- curvelet option 3: global sectors, radii re-detected inside each sector
  (the low-frequency disk stays global so the frame stays tight).
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field

import numpy as np

from .fourier import forward_spectrum, freq_grid, inverse_spectrum, polar_resample
from .modes import (
    GAMMA_SAFETY,
    BoundarySet,
    band_window,
    build_filter_bank_1d,
    detect_angular_boundaries,
    detect_boundaries_1d,
    lowpass_window,
    radial_windows,
    sector_centers,
    sector_windows,
)

MIN_SIDE = 32


@dataclass
class BandInfo:
    """What a mask selects, for feature bookkeeping and debug dumps."""

    kind: str                      # 'lowpass' | 'ring' | 'wedge' | 'tensor'
    r_lo: float | None = None
    r_hi: float | None = None      # None = open above
    theta_lo: float | None = None
    theta_hi: float | None = None
    theta_center: float | None = None
    row_band: int | None = None
    col_band: int | None = None

    def label(self) -> str:
        if self.kind == "tensor":
            return f"tensor[{self.col_band},{self.row_band}]"
        if self.kind == "lowpass":
            return "lowpass[all]" if self.r_hi is None else f"lowpass[r<{self.r_hi:.4f}]"
        hi = "inf" if self.r_hi is None else f"{self.r_hi:.4f}"
        if self.kind == "ring":
            return f"ring[{self.r_lo:.4f},{hi}]"
        return f"wedge[{self.r_lo:.4f},{hi};th={self.theta_center:.4f}]"


@dataclass
class FourierPartition:
    """The detected supports behind a bank."""

    kind: str
    rows: BoundarySet | None = None
    cols: BoundarySet | None = None
    radii: BoundarySet | None = None
    angles: np.ndarray | None = None
    ring_angles: list | None = None
    sector_radii: list | None = None


@dataclass
class FilterBank:
    """K real Fourier masks plus the partition they were built from."""

    masks: np.ndarray               # (K, H, W), float64
    partition: FourierPartition
    infos: list
    lowpass_index: int | None
    family: str

    @property
    def k(self) -> int:
        return self.masks.shape[0]

    def tight_frame_error(self) -> float:
        """max |sum_k mask_k^2 - 1| over bins; ~1e-15 for these banks."""
        return float(np.abs((self.masks ** 2).sum(axis=0) - 1.0).max())


@dataclass
class CoefficientStack:
    """Subband images, all the same size as the input.

    Fourier-bank transforms keep their bank for exact synthesis; spatial
    pyramids (decimated/undecimated DWT, packets) have none.
    """

    bands: np.ndarray               # (K, H, W)
    infos: list                     # per-band descriptors with .label()
    lowpass_index: int | None
    bank: FilterBank | None = None

    @property
    def k(self) -> int:
        return self.bands.shape[0]

    def band_energies(self) -> np.ndarray:
        return (self.bands ** 2).sum(axis=(1, 2))

    def labels(self) -> list[str]:
        return [info.label() for info in self.infos]


def _check_image(img: np.ndarray) -> np.ndarray:
    img = np.asarray(img, dtype=np.float64)
    if img.ndim != 2 or min(img.shape) < MIN_SIDE:
        raise ValueError(f"need a 2D image with sides >= {MIN_SIDE}, got {img.shape}")
    return img


def apply_bank(img: np.ndarray, bank: FilterBank) -> CoefficientStack:
    """Filter img through every mask of the bank."""
    img = np.asarray(img, dtype=np.float64)
    if img.shape != bank.masks.shape[1:]:
        raise ValueError(f"image {img.shape} does not match bank {bank.masks.shape[1:]}")
    spec = forward_spectrum(img)
    bands = np.empty(bank.masks.shape)
    for k in range(bank.k):
        bands[k] = inverse_spectrum(bank.masks[k] * spec)
    return CoefficientStack(bands=bands, infos=bank.infos,
                            lowpass_index=bank.lowpass_index, bank=bank)


def reconstruct(stack: CoefficientStack) -> np.ndarray:
    """Adjoint synthesis: exact inverse for these tight banks."""
    if stack.bank is None:
        raise ValueError("stack was not produced by a Fourier bank")
    masks = stack.bank.masks
    acc = np.zeros(masks.shape[1:], dtype=np.complex128)
    for k in range(stack.k):
        acc += masks[k] * forward_spectrum(stack.bands[k])
    return inverse_spectrum(acc)


# ---------------------------------------------------------------------------
# detection profiles
# ---------------------------------------------------------------------------

def mean_row_spectrum(img: np.ndarray) -> np.ndarray:
    """Mean magnitude of the 1D spectra of all rows (bins over [0, pi])."""
    return np.abs(np.fft.rfft(np.asarray(img, dtype=np.float64), axis=1)).mean(axis=0)


def mean_col_spectrum(img: np.ndarray) -> np.ndarray:
    """Mean magnitude of the 1D spectra of all columns."""
    return np.abs(np.fft.rfft(np.asarray(img, dtype=np.float64), axis=0)).mean(axis=1)


def radial_profile(polar_mag: np.ndarray) -> np.ndarray:
    return polar_mag.mean(axis=1)


def angular_profile(polar_mag: np.ndarray, radii: np.ndarray,
                    r_min: float) -> np.ndarray:
    """Angle marginal with the low-frequency disk r < r_min excluded."""
    sel = radii >= r_min
    if not np.any(sel):
        sel = radii >= 0
    return polar_mag[sel].mean(axis=0)


# ---------------------------------------------------------------------------
# bank builders
# ---------------------------------------------------------------------------

def build_tensor_bank(shape: tuple[int, int], rows: BoundarySet,
                      cols: BoundarySet) -> FilterBank:
    """Separable products of the row-axis and column-axis 1D filters."""
    h, w = shape
    row_masks = build_filter_bank_1d(rows, w)      # act along x (axis 1)
    col_masks = build_filter_bank_1d(cols, h)      # act along y (axis 0)
    masks = np.empty((rows.n_modes * cols.n_modes, h, w))
    infos = []
    k = 0
    for ic in range(cols.n_modes):
        for ir in range(rows.n_modes):
            masks[k] = col_masks[ic][:, None] * row_masks[ir][None, :]
            infos.append(BandInfo(kind="tensor", row_band=ir, col_band=ic))
            k += 1
    part = FourierPartition(kind="tensor", rows=rows, cols=cols)
    return FilterBank(masks=masks, partition=part, infos=infos,
                      lowpass_index=0, family="EWT2DT")


def _hermitian_rms(masks: np.ndarray) -> np.ndarray:
    """Force mask(w) == mask(-w) without disturbing the squared sum.

    Even-length axes carry an unpaired Nyquist line: -pi has no +pi partner
    on the grid, so the pair (-pi, w) / (-pi, -w) folds to two different
    angles and a sector window can split it.  An asymmetric mask makes the
    band complex and the .real cast throws signal away.  Replacing each
    mask by the RMS of itself and its frequency-negated copy restores the
    symmetry, and since negation just permutes the bins the sum of squares
    stays at one everywhere.
    """
    neg = masks[:, ::-1, ::-1]
    if masks.shape[1] % 2 == 0:
        neg = np.roll(neg, 1, axis=1)
    if masks.shape[2] % 2 == 0:
        neg = np.roll(neg, 1, axis=2)
    return np.sqrt(0.5 * (masks ** 2 + neg ** 2))


def _ring_sector_masks(shape, radii: BoundarySet, angles_per_ring,
                       family: str, angular_tau: float | None = None) -> FilterBank:
    """Disk plus ring x sector products; angles_per_ring[i] belongs to ring i+1."""
    rgrid, tgrid = freq_grid(shape)
    rw = radial_windows(radii, rgrid)
    n_rings = radii.n_modes - 1
    masks = [rw[0]]
    disk_hi = float(radii.omegas[1]) if n_rings > 0 else None
    infos = [BandInfo(kind="lowpass", r_lo=0.0, r_hi=disk_hi)]
    for i in range(n_rings):
        ring = rw[i + 1]
        bounds = np.asarray(angles_per_ring[i], dtype=np.float64)
        sw = sector_windows(tgrid, bounds, tau=angular_tau)
        centers = sector_centers(bounds)
        r_lo = float(radii.omegas[i + 1])
        r_hi = None if i == n_rings - 1 else float(radii.omegas[i + 2])
        for j in range(sw.shape[0]):
            masks.append(ring * sw[j])
            kind = "ring" if sw.shape[0] == 1 else "wedge"
            th_lo = float(bounds[j]) if len(bounds) > 1 else None
            th_hi = float(bounds[(j + 1) % len(bounds)]) if len(bounds) > 1 else None
            infos.append(BandInfo(kind=kind, r_lo=r_lo, r_hi=r_hi,
                                  theta_lo=th_lo, theta_hi=th_hi,
                                  theta_center=float(centers[j])))
    part = FourierPartition(kind=family, radii=radii,
                            ring_angles=[np.asarray(a) for a in angles_per_ring])
    if angles_per_ring and all(np.array_equal(np.asarray(a), np.asarray(angles_per_ring[0]))
                               for a in angles_per_ring):
        part.angles = np.asarray(angles_per_ring[0])
    return FilterBank(masks=_hermitian_rms(np.stack(masks)), partition=part,
                      infos=infos, lowpass_index=0, family=family)


def build_lp_bank(shape: tuple[int, int], radii: BoundarySet,
                  family: str = "EWT2DLP") -> FilterBank:
    """Concentric ring masks (no angular division)."""
    n_rings = radii.n_modes - 1
    return _ring_sector_masks(shape, radii, [np.array([])] * n_rings, family)


def _shared_disk_sets(omega1: float, tau1: float,
                      detected: np.ndarray) -> BoundarySet:
    """Per-sector radial set that keeps the global disk edge (omega1, tau1).

    Detected radii too close to the disk transition are dropped; remaining
    half-widths use the gap rule restricted to this sector's boundaries.
    """
    cand = sorted(float(b) for b in detected
                  if omega1 + 2 * tau1 < b < np.pi)
    while True:
        omegas = np.array([0.0, omega1] + cand + [np.pi])
        ratios = np.diff(omegas[1:]) / (omegas[2:] + omegas[1:-1])
        gamma = GAMMA_SAFETY * float(ratios.min()) if len(ratios) else 0.0
        taus = np.concatenate([[0.0, tau1], gamma * np.array(cand), [0.0]])
        ok = np.all((omegas[1:] - taus[1:]) > (omegas[:-1] + taus[:-1]))
        if ok and (not cand or gamma > 0):
            return BoundarySet(omegas, taus)
        if not cand:
            # Shared disk width incompatible only if tau1 >= omega1, which
            # from_interior never produces.
            raise ValueError("cannot fit a radial set around the shared disk")
        cand.pop(0)


def build_curvelet_bank(shape: tuple[int, int], option: int,
                        radii: BoundarySet, angles: np.ndarray,
                        ring_angles: list | None = None,
                        sector_profiles: list | None = None) -> FilterBank:
    """Assemble curvelet masks from detected supports (see module docstring)."""
    if option == 1:
        n_rings = radii.n_modes - 1
        return _ring_sector_masks(shape, radii, [angles] * n_rings, "EWTC1")
    if option == 2:
        return _ring_sector_masks(shape, radii, ring_angles, "EWTC2")
    if option != 3:
        raise ValueError(f"curvelet option must be 1, 2 or 3, got {option}")

    # Option 3: global sectors, per-sector radii beyond the shared disk.
    if radii.n_modes == 1:
        return build_lp_bank(shape, radii)
    omega1 = float(radii.omegas[1])
    tau1 = float(radii.taus[1])
    rgrid, tgrid = freq_grid(shape)
    sw = sector_windows(tgrid, angles)
    m = sw.shape[0]
    sets = []
    for s in range(m):
        profile = sector_profiles[s] if sector_profiles is not None else None
        if profile is None:
            detected = radii.interior[1:]
        else:
            detected = detect_boundaries_1d(profile).interior
        sets.append(_shared_disk_sets(omega1, tau1, detected))
    masks = [lowpass_window(rgrid, omega1, tau1)]
    infos = [BandInfo(kind="lowpass", r_lo=0.0, r_hi=omega1)]
    centers = sector_centers(angles)
    for s in range(m):
        bs = sets[s]
        rw = radial_windows(bs, rgrid)
        th_lo = float(angles[s]) if m > 1 else None
        th_hi = float(angles[(s + 1) % m]) if m > 1 else None
        for n in range(1, bs.n_modes):
            masks.append(rw[n] * sw[s])
            r_hi = None if n == bs.n_modes - 1 else float(bs.omegas[n + 1])
            infos.append(BandInfo(kind="wedge" if m > 1 else "ring",
                                  r_lo=float(bs.omegas[n]), r_hi=r_hi,
                                  theta_lo=th_lo, theta_hi=th_hi,
                                  theta_center=float(centers[s])))
    part = FourierPartition(kind="EWTC3", radii=radii, angles=np.asarray(angles),
                            sector_radii=sets)
    return FilterBank(masks=_hermitian_rms(np.stack(masks)), partition=part,
                      infos=infos, lowpass_index=0, family="EWTC3")


# ---------------------------------------------------------------------------
# detection + transform entry points
# ---------------------------------------------------------------------------

def ewt2d_tensor(img: np.ndarray) -> CoefficientStack:
    """Separable empirical transform from the mean row/column spectra."""
    img = _check_image(img)
    rows = detect_boundaries_1d(mean_row_spectrum(img))
    cols = detect_boundaries_1d(mean_col_spectrum(img))
    bank = build_tensor_bank(img.shape, rows, cols)
    return apply_bank(img, bank)


def detect_radial_boundaries(img: np.ndarray, n_radii: int | None = None,
                             n_angles: int = 360) -> BoundarySet:
    """Ring supports from the angle-averaged polar magnitude."""
    img = _check_image(img)
    polar = polar_resample(forward_spectrum(img), n_radii, n_angles)
    return detect_boundaries_1d(radial_profile(polar.mag))


def ewt2d_lp(img: np.ndarray, n_radii: int | None = None,
             n_angles: int = 360) -> CoefficientStack:
    """Concentric-ring empirical transform."""
    img = _check_image(img)
    radii = detect_radial_boundaries(img, n_radii, n_angles)
    bank = build_lp_bank(img.shape, radii)
    return apply_bank(img, bank)


def ewt2d_curvelet(img: np.ndarray, option: int = 1,
                   n_radii: int | None = None, n_angles: int = 360) -> CoefficientStack:
    """Empirical curvelet transform (options 1, 2, 3)."""
    img = _check_image(img)
    if option not in (1, 2, 3):
        raise ValueError(f"curvelet option must be 1, 2 or 3, got {option}")
    polar = polar_resample(forward_spectrum(img), n_radii, n_angles)
    radii = detect_boundaries_1d(radial_profile(polar.mag))
    if radii.n_modes == 1:
        bank = build_lp_bank(img.shape, radii)
        return apply_bank(img, bank)
    omega1 = float(radii.omegas[1])

    if option == 1:
        angles = detect_angular_boundaries(
            angular_profile(polar.mag, polar.radii, omega1))
        bank = build_curvelet_bank(img.shape, 1, radii, angles)
    elif option == 2:
        ring_angles = []
        w = radii.omegas
        for n in range(1, radii.n_modes):
            lo, hi = w[n], w[n + 1]
            sel = (polar.radii >= lo) & (polar.radii <= hi)
            if not np.any(sel):
                ring_angles.append(np.array([]))
                continue
            ring_angles.append(detect_angular_boundaries(polar.mag[sel].mean(axis=0)))
        bank = build_curvelet_bank(img.shape, 2, radii, np.array([]),
                                   ring_angles=ring_angles)
    else:
        angles = detect_angular_boundaries(
            angular_profile(polar.mag, polar.radii, omega1))
        m = max(1, len(angles))
        profiles = []
        if len(angles) <= 1:
            profiles.append(radial_profile(polar.mag))
        else:
            nxt = np.concatenate([angles[1:], [angles[0] + np.pi]])
            for s in range(m):
                u = (polar.angles - angles[s]) % np.pi
                sel = u <= (nxt[s] - angles[s]) % np.pi
                profiles.append(polar.mag[:, sel].mean(axis=1))
        bank = build_curvelet_bank(img.shape, 3, radii, angles,
                                   sector_profiles=profiles)
    return apply_bank(img, bank)


# ---------------------------------------------------------------------------
# debug exports
# ---------------------------------------------------------------------------

def export_partition_csv(bank: FilterBank, path: str) -> None:
    """One row per band: kind and support ranges."""
    with open(path, "w", newline="") as fh:
        wr = csv.writer(fh)
        wr.writerow(["band", "kind", "r_lo", "r_hi", "theta_lo", "theta_hi",
                     "theta_center", "row_band", "col_band", "label"])
        for i, info in enumerate(bank.infos):
            wr.writerow([i, info.kind, info.r_lo, info.r_hi, info.theta_lo,
                         info.theta_hi, info.theta_center, info.row_band,
                         info.col_band, info.label()])


def export_bands_pgm(stack: CoefficientStack, directory: str) -> list[str]:
    """Min-max normalized band images for eyeballing; lossy debug output."""
    import os

    from .imgio import save_image

    paths = []
    for k in range(stack.k):
        band = stack.bands[k]
        rng = band.max() - band.min()
        norm = (band - band.min()) / rng if rng > 0 else np.zeros_like(band)
        p = os.path.join(directory, f"band_{k:03d}.pgm")
        save_image(norm, p)
        paths.append(p)
    return paths
