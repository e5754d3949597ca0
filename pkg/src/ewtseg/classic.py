"""Non-adaptive comparison banks: tensor DWT, packets, Gabor, Meyer, curvelets.

The decimated and undecimated transforms are spatial pyramids over the six
orthogonal families below; packets add Coifman-Wickerhauser best-basis
pruning on top of the decimated step.  Gabor, Meyer and the prescribed
curvelet bank are Fourier-domain filter banks; the latter two reuse the
ring/sector window machinery from ewt2d with fixed dyadic supports instead
of detected ones, so they inherit the tight-frame property.  Gabor frames
are not tight and no such claim is tested for them.

Subband naming: a 2D filtering step pairs a filter along y with one along
x, so 'lh' means lowpass on y, highpass on x.  Packet child codes follow
the same order: a=(l,l), v=(l,h), h=(h,l), d=(h,h).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .fourier import forward_spectrum, freq_axis
from .modes import BoundarySet
from .ewt2d import (
    CoefficientStack,
    FilterBank,
    FourierPartition,
    _check_image,
    _ring_sector_masks,
    apply_bank,
    build_lp_bank,
)

# Orthogonal analysis lowpass taps from the published coefficient tables
# (Daubechies, "Ten Lectures on Wavelets"; Daubechies' coiflet/symmlet
# listings), Newton-projected onto the defining identities (sum sqrt(2),
# orthonormal even shifts, zero response at pi) so every identity holds to
# ~2e-16 rather than to the tables' printed precision.  Order is the
# classical analysis order: correlation with h yields the approximation.
_LOWPASS_TAPS = {
    "Daub4": [0.4829629131447221, 0.8365163037377575,
              0.22414386804182543, -0.12940952255121002],
    "Daub6": [0.33267055294955494, 0.8068915093116749, 0.45987750211804157,
              -0.13501102001035245, -0.0854412738810489,
              0.03522629188522524],
    "Sym4": [0.03222310060383643, -0.0126039672620047,
             -0.09921954357686892, 0.297857795605451,
             0.8037387518055226, 0.49761866763210477,
             -0.029635527645942492, -0.07576571478900354],
    "Sym5": [0.019538882735150268, -0.021101834024259032,
             -0.17532808990891433, 0.01660210576486983,
             0.6339789634578779, 0.7234076904028621,
             0.19939753397702278, -0.039134249302067485,
             0.02951949092541099, 0.027333068345142143],
    "Coif1": [-0.07273261951254327, 0.3378976624580017, 0.8525720202116341,
              0.384864846864321, -0.07273261951254327, -0.01565572813577503],
    "Coif2": [0.016387336463235758, -0.04146493678351941,
              -0.06737255472278897, 0.38611006682199395,
              0.8127236354501023, 0.4170051844227017,
              -0.0764885990792199, -0.05943441864832517,
              0.023680171945979576, 0.005611434819217812,
              -0.00182320887076121, -0.0007205494455212316],
}

FAMILIES = tuple(sorted(_LOWPASS_TAPS))

_LEVEL_CHOICES = (2, 3, 4)


@dataclass(frozen=True)
class OrthoFilterPair:
    """Analysis lowpass h and its quadrature mirror g."""

    family: str
    h: np.ndarray
    g: np.ndarray


def filter_pair(family: str) -> OrthoFilterPair:
    if family not in _LOWPASS_TAPS:
        raise ValueError(f"unknown wavelet family {family!r}; "
                         f"choose from {', '.join(FAMILIES)}")
    h = np.asarray(_LOWPASS_TAPS[family], dtype=np.float64)
    g = quadrature_mirror(h)
    return OrthoFilterPair(family=family, h=h, g=g)


def quadrature_mirror(h: np.ndarray) -> np.ndarray:
    """g[n] = (-1)^n h[L-1-n]."""
    h = np.asarray(h, dtype=np.float64)
    signs = np.where(np.arange(len(h)) % 2 == 0, 1.0, -1.0)
    return signs * h[::-1]


@dataclass(frozen=True)
class SubbandInfo:
    """Descriptor for a spatial-pyramid band (duck-typed with BandInfo)."""

    kind: str                      # 'approx' | 'detail' | 'packet'
    level: int | None = None
    orient: str | None = None      # 'lh' | 'hl' | 'hh', (y, x) filter order
    path: str | None = None        # packet quadrant codes from the root

    def label(self) -> str:
        if self.kind == "approx":
            return f"a{self.level}"
        if self.kind == "detail":
            return f"d{self.level}.{self.orient}"
        return f"p[{self.path}]"


@dataclass(frozen=True)
class GaborInfo:
    """Descriptor for a Gabor band: scale ring + orientation, or the DC cap."""

    scale: int | None = None       # None = lowpass
    orientation: int | None = None
    angle: float | None = None

    def label(self) -> str:
        if self.scale is None:
            return "gabor[lp]"
        return f"gabor[s{self.scale},k{self.orientation}]"


# ---------------------------------------------------------------------------
# circular filtering primitives
# ---------------------------------------------------------------------------

def _correlate_periodic(x: np.ndarray, taps: np.ndarray, axis: int,
                        step: int) -> np.ndarray:
    """out[n] = sum_k taps[k] x[(step*n + k) mod N] along the given axis.

    The undecimated path accumulates rolled copies: every pixel sees the
    same multiply-add sequence, so circular shifts commute bit-exactly,
    and the zeros of dilated filters cost nothing.
    """
    if step == 1:
        out = np.zeros(x.shape, dtype=np.float64)
        for k, t in enumerate(taps):
            if t != 0.0:
                out += t * np.roll(x, -k, axis=axis)
        return out
    x = np.moveaxis(x, axis, -1)
    n = x.shape[-1]
    idx = (step * np.arange(n // step)[:, None] + np.arange(len(taps))) % n
    out = x[..., idx] @ taps
    return np.moveaxis(out, -1, axis)


def _upsampled_taps(taps: np.ndarray, j: int) -> np.ndarray:
    """Insert 2^j - 1 zeros between taps (the a trous dilation)."""
    if j == 0:
        return taps
    out = np.zeros((len(taps) - 1) * 2 ** j + 1)
    out[:: 2 ** j] = taps
    return out


def _dwt2_step(x: np.ndarray, h: np.ndarray, g: np.ndarray):
    """One decimated level: (ll, lh, hl, hh), first letter = y filter."""
    lo = _correlate_periodic(x, h, axis=1, step=2)
    hi = _correlate_periodic(x, g, axis=1, step=2)
    return (_correlate_periodic(lo, h, 0, 2), _correlate_periodic(hi, h, 0, 2),
            _correlate_periodic(lo, g, 0, 2), _correlate_periodic(hi, g, 0, 2))


def upsample_nn(band: np.ndarray, factor: int) -> np.ndarray:
    return np.repeat(np.repeat(band, factor, axis=0), factor, axis=1)


def _check_divisible(shape, levels: int) -> None:
    d = 2 ** levels
    if shape[0] % d or shape[1] % d:
        raise ValueError(f"image sides {shape} must be divisible by 2^{levels}")


def _check_levels(levels: int) -> None:
    if levels not in _LEVEL_CHOICES:
        raise ValueError(f"levels must be one of {_LEVEL_CHOICES}, got {levels}")


# ---------------------------------------------------------------------------
# decimated / undecimated pyramids
# ---------------------------------------------------------------------------

def dwt_decimated_coeffs(img: np.ndarray, family: str, levels: int):
    """Raw pyramid before upsampling: (approx, [(level, orient, band), ...]).

    The transform is orthonormal under circular boundary handling, so the
    squared coefficients here sum to the image energy.
    """
    pair = filter_pair(family)
    x = np.asarray(img, dtype=np.float64)
    _check_divisible(x.shape, levels)
    details = []
    for lev in range(1, levels + 1):
        x, lh, hl, hh = _dwt2_step(x, pair.h, pair.g)
        details += [(lev, "lh", lh), (lev, "hl", hl), (lev, "hh", hh)]
    return x, details


def dwt_decimated(img: np.ndarray, family: str, levels: int) -> CoefficientStack:
    """Dyadic decimated tensor DWT, each subband blown back up to full size
    by nearest-neighbour so the stack is pixelwise comparable."""
    img = _check_image(img)
    _check_levels(levels)
    approx, details = dwt_decimated_coeffs(img, family, levels)
    bands = [upsample_nn(approx, 2 ** levels)]
    infos = [SubbandInfo(kind="approx", level=levels)]
    for lev, orient, band in details:
        bands.append(upsample_nn(band, 2 ** lev))
        infos.append(SubbandInfo(kind="detail", level=lev, orient=orient))
    return CoefficientStack(bands=np.stack(bands), infos=infos, lowpass_index=0)


def dwt_undecimated(img: np.ndarray, family: str, levels: int) -> CoefficientStack:
    """A trous pyramid: no downsampling, stage-j filters dilated by 2^j.

    Everything is circular correlation at full resolution, so the stack
    commutes exactly with circular shifts of the input.
    """
    img = _check_image(img)
    if levels < 1:
        raise ValueError(f"levels must be >= 1, got {levels}")
    pair = filter_pair(family)
    x = img
    bands, infos = [], []
    for lev in range(1, levels + 1):
        h = _upsampled_taps(pair.h, lev - 1)
        g = _upsampled_taps(pair.g, lev - 1)
        lo_x = _correlate_periodic(x, h, axis=1, step=1)
        hi_x = _correlate_periodic(x, g, axis=1, step=1)
        bands += [_correlate_periodic(hi_x, h, 0, 1),
                  _correlate_periodic(lo_x, g, 0, 1),
                  _correlate_periodic(hi_x, g, 0, 1)]
        infos += [SubbandInfo(kind="detail", level=lev, orient=o)
                  for o in ("lh", "hl", "hh")]
        x = _correlate_periodic(lo_x, h, 0, 1)
    bands.insert(0, x)
    infos.insert(0, SubbandInfo(kind="approx", level=levels))
    return CoefficientStack(bands=np.stack(bands), infos=infos, lowpass_index=0)


# ---------------------------------------------------------------------------
# wavelet packets
# ---------------------------------------------------------------------------

@dataclass
class PacketNode:
    """Best-basis tree node; a node is a leaf or has exactly four children."""

    path: str
    entropy_cost: float            # cost of the subtree's chosen basis
    children: list | None = None
    coeffs: np.ndarray | None = None   # kept on leaves only

    def leaves(self) -> list:
        if self.children is None:
            return [self]
        return [leaf for c in self.children for leaf in c.leaves()]


def shannon_cost(coeffs: np.ndarray) -> float:
    """Additive entropy -sum x^2 log x^2 with the 0 log 0 = 0 convention."""
    x2 = np.square(coeffs.ravel())
    nz = x2[x2 > 0]
    return float(-(nz * np.log(nz)).sum())


def packet_best_tree(img: np.ndarray, family: str, max_depth: int) -> PacketNode:
    """Full quadtree to max_depth, pruned bottom-up: a node splits only when
    the children's best bases cost strictly less than keeping it whole."""
    pair = filter_pair(family)
    _check_divisible(np.shape(img), max_depth)

    def build(x: np.ndarray, path: str) -> PacketNode:
        own = shannon_cost(x)
        if len(path) == max_depth:
            return PacketNode(path=path, entropy_cost=own, coeffs=x)
        quads = _dwt2_step(x, pair.h, pair.g)
        kids = [build(q, path + c) for q, c in zip(quads, "avhd")]
        split = sum(k.entropy_cost for k in kids)
        if split < own:
            return PacketNode(path=path, entropy_cost=split, children=kids)
        return PacketNode(path=path, entropy_cost=own, coeffs=x)

    return build(np.asarray(img, dtype=np.float64), "")


def packet_best_basis(img: np.ndarray, family: str,
                      max_depth: int) -> CoefficientStack:
    img = _check_image(img)
    _check_levels(max_depth)
    tree = packet_best_tree(img, family, max_depth)
    bands, infos = [], []
    lowpass_index = None
    for i, leaf in enumerate(tree.leaves()):
        bands.append(upsample_nn(leaf.coeffs, 2 ** len(leaf.path)))
        infos.append(SubbandInfo(kind="packet", level=len(leaf.path),
                                 path=leaf.path))
        if set(leaf.path) <= {"a"}:
            lowpass_index = i
    return CoefficientStack(bands=np.stack(bands), infos=infos,
                            lowpass_index=lowpass_index)


# ---------------------------------------------------------------------------
# Gabor bank
# ---------------------------------------------------------------------------

def gabor_bank(img: np.ndarray, n_scales: int = 4,
               n_orientations: int = 6) -> CoefficientStack:
    """Fourier-domain Gaussians sqrt(2^s) ghat(2^s w - (cos a_k, sin a_k)).

    Centers sit at radius 2^-s on the half circle a_k = k pi / M; the
    Gaussian std makes adjacent orientations cross at half power.  A same-
    width Gaussian parked at DC at the innermost scale serves as lowpass.
    Responses are one-sided in frequency, so bands carry the complex
    magnitude.  This is a frame, not a tight frame; no partition sums to 1.
    """
    img = _check_image(img)
    if n_scales < 1:
        raise ValueError(f"n_scales must be >= 1, got {n_scales}")
    if n_orientations < 2:
        raise ValueError(f"n_orientations must be >= 2, got {n_orientations}")
    sigma = math.sin(math.pi / (2 * n_orientations)) / math.sqrt(math.log(2))
    h, w = img.shape
    wx = freq_axis(w)[None, :]
    wy = freq_axis(h)[:, None]

    top = 2 ** (n_scales - 1)
    masks = [np.exp(-((top * wx) ** 2 + (top * wy) ** 2) / (2 * sigma ** 2))]
    infos = [GaborInfo()]
    for s in range(n_scales):
        for k in range(n_orientations):
            alpha = k * math.pi / n_orientations
            ux, uy = math.cos(alpha), math.sin(alpha)
            d2 = (2 ** s * wx - ux) ** 2 + (2 ** s * wy - uy) ** 2
            masks.append(math.sqrt(2 ** s) * np.exp(-d2 / (2 * sigma ** 2)))
            infos.append(GaborInfo(scale=s, orientation=k, angle=alpha))
    bank = FilterBank(masks=np.stack(masks),
                      partition=FourierPartition(kind="Gabor"),
                      infos=infos, lowpass_index=0, family="Gabor")
    spec = forward_spectrum(img)
    bands = np.stack([np.abs(np.fft.ifft2(np.fft.ifftshift(m * spec)))
                      for m in bank.masks])
    return CoefficientStack(bands=bands, infos=infos, lowpass_index=0,
                            bank=bank)


# ---------------------------------------------------------------------------
# fixed Meyer rings and prescribed curvelets
# ---------------------------------------------------------------------------

def dyadic_radii(n_scales: int) -> BoundarySet:
    """Rings split at pi/2^j, j = n_scales..1; every consecutive ratio is
    1/3 so the gap rule gives tau_n = 0.33 w_n."""
    interior = np.pi / 2.0 ** np.arange(n_scales, 0, -1)
    return BoundarySet.from_interior(interior)


def meyer_lp(img: np.ndarray, n_scales: int) -> CoefficientStack:
    """Littlewood-Paley bank on fixed dyadic rings: lowpass + n_scales rings."""
    img = _check_image(img)
    _check_levels(n_scales)
    bank = build_lp_bank(img.shape, dyadic_radii(n_scales), family="Meyer")
    return apply_bank(img, bank)


def prescribed_curvelet(img: np.ndarray, n_scales: int = 4,
                        n_orientations: int = 6) -> CoefficientStack:
    """Dyadic rings times uniform sectors; 1 + n_scales*n_orientations bands.

    Angular half-width is a quarter sector, radial widths follow the ring
    gap rule, so the bank is tight like its adaptive counterparts.
    """
    img = _check_image(img)
    if n_scales < 2:
        raise ValueError(f"n_scales must be >= 2, got {n_scales}")
    if n_orientations < 2:
        raise ValueError(f"n_orientations must be >= 2, got {n_orientations}")
    radii = dyadic_radii(n_scales)
    angles = -np.pi / 2 + np.pi * np.arange(n_orientations) / n_orientations
    bank = _ring_sector_masks(img.shape, radii, [angles] * n_scales,
                              "Curvelet", angular_tau=np.pi / (4 * n_orientations))
    return apply_bank(img, bank)
