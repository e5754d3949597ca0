"""Spectrum mode detection and Meyer-type window synthesis.

A 1D magnitude curve (half-spectrum over [0, pi], or an angular profile
over [-pi/2, pi/2)) is split into modes by tracking its local minima
through a Gaussian scale-space: a minimum's persistence is the number of
blur levels it survives, Otsu's threshold separates meaningful minima
from spurious ones, and the survivors' positions at scale 0 become the
supports' boundaries.  The windows built on those boundaries use the
classic polynomial-ramp cosine/sine transitions, so squared windows sum
to one everywhere and the resulting filter banks are tight frames.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.ndimage import gaussian_filter1d

SCALE_LEVELS = 40
SIGMA_MIN = 0.5
# Transitions take this fraction of the tightest admissible half-width, so
# neighbouring transition zones never touch.
GAMMA_SAFETY = 0.99
_FLAT_RTOL = 1e-12
# Otsu classes closer than this many levels are really one class; a merged
# class is meaningful only if it survived half the scale levels.
_MIN_CLASS_SEP = 5
_MERGED_MIN_LEVELS = SCALE_LEVELS // 2


def meyer_ramp(x: np.ndarray) -> np.ndarray:
    """Polynomial ramp x^4(35 - 84x + 70x^2 - 20x^3), clamped outside [0, 1].

    Satisfies ramp(0) = 0, ramp(1) = 1 and ramp(x) + ramp(1 - x) = 1, which
    is what makes the cos/sin window transitions below partition unity.
    """
    x = np.clip(np.asarray(x, dtype=np.float64), 0.0, 1.0)
    return x ** 4 * (35.0 - 84.0 * x + 70.0 * x ** 2 - 20.0 * x ** 3)


# ---------------------------------------------------------------------------
# local minima and scale-space persistence
# ---------------------------------------------------------------------------

def _runs(curve: np.ndarray):
    """Runs of equal consecutive values as (start, end_exclusive, value)."""
    n = len(curve)
    starts = [0]
    for i in range(1, n):
        if curve[i] != curve[i - 1]:
            starts.append(i)
    starts.append(n)
    return [(starts[j], starts[j + 1], curve[starts[j]]) for j in range(len(starts) - 1)]


def local_minima(curve: np.ndarray, periodic: bool) -> list[int]:
    """Indices of local minima; a plateau collapses to its center sample.

    In the linear case the first and last runs are not eligible (curve
    endpoints are fixed supports' ends, not detectable boundaries).
    """
    curve = np.asarray(curve, dtype=np.float64)
    n = len(curve)
    runs = _runs(curve)
    if periodic and len(runs) > 1 and runs[0][2] == runs[-1][2]:
        # Merge the wrap-around plateau into one run starting in the tail.
        s, _, v = runs[-1]
        _, e, _ = runs[0]
        runs = [(s, e + n, v)] + runs[1:-1]
    out = []
    m = len(runs)
    if m == 1:
        return out
    for j, (s, e, v) in enumerate(runs):
        if not periodic and (j == 0 or j == m - 1):
            continue
        left = runs[(j - 1) % m][2]
        right = runs[(j + 1) % m][2]
        if (periodic or True) and v < left and v < right:
            out.append(((s + e - 1) // 2) % n)
    return sorted(out)


def _match_chains(prev_pos: list[int], new_pos: list[int], n: int, periodic: bool):
    """Greedy unique nearest matching; returns map chain_index -> new index."""
    pairs = []
    for ci, p in enumerate(prev_pos):
        for mi, q in enumerate(new_pos):
            d = abs(p - q)
            if periodic:
                d = min(d, n - d)
            pairs.append((d, ci, mi))
    pairs.sort()
    taken_c, taken_m, out = set(), set(), {}
    for d, ci, mi in pairs:
        if ci in taken_c or mi in taken_m:
            continue
        taken_c.add(ci)
        taken_m.add(mi)
        out[ci] = mi
    return out


def _blur_sigmas(n: int) -> np.ndarray:
    """Geometric blur schedule from SIGMA_MIN up to a third of the curve.

    Geometric spacing makes a chain's persistence proportional to the log of
    the scale at which its minimum dies, so structures of very different
    widths land a bounded number of levels apart and a single dominant
    valley cannot drown the others at the thresholding step.
    """
    sigma_max = max(2.0 * SIGMA_MIN, n / 3.0)
    ratio = (sigma_max / SIGMA_MIN) ** (1.0 / (SCALE_LEVELS - 1))
    return SIGMA_MIN * ratio ** np.arange(SCALE_LEVELS)


def minima_persistence(curve: np.ndarray, periodic: bool) -> list[tuple[int, int]]:
    """Track minima chains through Gaussian blur levels.

    Returns (position at scale 0, persistence) per chain, where persistence
    counts the levels (including scale 0) at which the chain had a minimum.
    Minima born above scale 0 are treated as numerical artifacts and ignored.
    """
    curve = np.asarray(curve, dtype=np.float64)
    n = len(curve)
    sigmas = _blur_sigmas(n)
    mode = "wrap" if periodic else "reflect"

    origins = local_minima(curve, periodic)
    if not origins:
        return []
    positions = list(origins)
    persistence = [1] * len(origins)
    alive = [True] * len(origins)

    for t in range(1, SCALE_LEVELS + 1):
        blurred = gaussian_filter1d(curve, sigmas[t - 1], mode=mode)
        new_pos = local_minima(blurred, periodic)
        live_idx = [i for i in range(len(origins)) if alive[i]]
        if not live_idx or not new_pos:
            break
        match = _match_chains([positions[i] for i in live_idx], new_pos, n, periodic)
        matched = set()
        for local_ci, mi in match.items():
            i = live_idx[local_ci]
            positions[i] = new_pos[mi]
            persistence[i] += 1
            matched.add(i)
        for i in live_idx:
            if i not in matched:
                alive[i] = False
    return list(zip(origins, persistence))


def otsu_threshold(values: np.ndarray) -> float | None:
    """Otsu's threshold over a small set of integers; None if degenerate."""
    values = np.asarray(values, dtype=np.float64)
    lo, hi = values.min(), values.max()
    if lo == hi:
        return None
    best_t, best_var = lo, -1.0
    for t in np.unique(values)[:-1]:
        m0 = values <= t
        w0 = m0.mean()
        w1 = 1.0 - w0
        var = w0 * w1 * (values[m0].mean() - values[~m0].mean()) ** 2
        if var > best_var:
            best_var, best_t = var, t
    return float(best_t)


def _is_flat(curve: np.ndarray) -> bool:
    rng = float(curve.max() - curve.min())
    return rng <= _FLAT_RTOL * max(abs(float(curve.max())), 1e-300)


def meaningful_minima(curve: np.ndarray, periodic: bool) -> list[int]:
    """Scale-0 positions of the minima whose persistence survives Otsu.

    When Otsu's two classes are closer than _MIN_CLASS_SEP levels (or all
    persistences are equal) the split is noise, not structure: the chains
    are one class, meaningful only if their mean persistence reaches
    _MERGED_MIN_LEVELS.
    """
    curve = np.asarray(curve, dtype=np.float64)
    if _is_flat(curve):
        return []
    chains = minima_persistence(curve, periodic)
    if not chains:
        return []
    pers = np.array([p for _, p in chains], dtype=np.float64)
    thr = otsu_threshold(pers)
    if thr is not None:
        low, high = pers[pers <= thr], pers[pers > thr]
        if high.mean() - low.mean() >= _MIN_CLASS_SEP:
            return sorted(pos for pos, p in chains if p > thr)
    if pers.mean() >= _MERGED_MIN_LEVELS:
        return sorted(pos for pos, _ in chains)
    return []


# ---------------------------------------------------------------------------
# boundary sets and 1D filter banks
# ---------------------------------------------------------------------------

@dataclass
class BoundarySet:
    """Support boundaries 0 = w_0 < w_1 < ... < w_B = pi with half-widths.

    taus[0] and taus[-1] are zero (no rolloff at DC or Nyquist); interior
    transitions [w_n - tau_n, w_n + tau_n] are strictly disjoint.
    """

    omegas: np.ndarray
    taus: np.ndarray

    def __post_init__(self):
        self.omegas = np.asarray(self.omegas, dtype=np.float64)
        self.taus = np.asarray(self.taus, dtype=np.float64)
        w, t = self.omegas, self.taus
        if len(w) < 2 or w[0] != 0.0 or abs(w[-1] - np.pi) > 1e-12:
            raise ValueError("boundaries must run from 0 to pi")
        if np.any(np.diff(w) <= 0):
            raise ValueError("boundaries must be strictly increasing")
        if len(w) > 2 and np.any(t[1:-1] <= 0):
            raise ValueError("interior transition half-widths must be positive")
        if np.any((w[1:] - t[1:]) <= (w[:-1] + t[:-1])):
            raise ValueError("transition zones overlap")

    @property
    def n_modes(self) -> int:
        return len(self.omegas) - 1

    @property
    def interior(self) -> np.ndarray:
        return self.omegas[1:-1]

    @classmethod
    def from_interior(cls, interior) -> "BoundarySet":
        """Build a set from interior boundaries, sizing half-widths by the
        tightest relative gap: tau_n = gamma * w_n with
        gamma = GAMMA_SAFETY * min (w_{n+1} - w_n) / (w_{n+1} + w_n)."""
        interior = np.unique(np.asarray(interior, dtype=np.float64))
        interior = interior[(interior > 0.0) & (interior < np.pi)]
        omegas = np.concatenate([[0.0], interior, [np.pi]])
        if len(omegas) == 2:
            return cls(omegas, np.zeros(2))
        ratios = np.diff(omegas) / (omegas[1:] + omegas[:-1])
        gamma = GAMMA_SAFETY * float(ratios.min())
        taus = gamma * omegas
        taus[0] = 0.0
        taus[-1] = 0.0
        return cls(omegas, taus)


def detect_boundaries_1d(mag: np.ndarray) -> BoundarySet:
    """Split a magnitude half-spectrum over [0, pi] into mode supports.

    A constant curve (or one with no persistent interior minimum) yields
    the single mode {0, pi}.
    """
    mag = np.asarray(mag, dtype=np.float64)
    if mag.ndim != 1 or len(mag) < 16:
        raise ValueError("need a 1D magnitude curve with at least 16 samples")
    if np.any(mag < 0):
        raise ValueError("magnitude curve must be non-negative")
    idx = meaningful_minima(mag, periodic=False)
    omegas = np.pi * np.asarray(idx, dtype=np.float64) / (len(mag) - 1)
    return BoundarySet.from_interior(omegas)


def detect_angular_boundaries(profile: np.ndarray) -> np.ndarray:
    """Boundary angles of a periodic profile over [-pi/2, pi/2).

    Returns a sorted (possibly empty) array of angles; one boundary means
    a single sector spanning the whole half-circle.
    """
    profile = np.asarray(profile, dtype=np.float64)
    if profile.ndim != 1 or len(profile) < 16:
        raise ValueError("need a 1D angular profile with at least 16 samples")
    idx = meaningful_minima(profile, periodic=True)
    return -np.pi / 2 + np.pi * np.asarray(idx, dtype=np.float64) / len(profile)


# ---------------------------------------------------------------------------
# window evaluation
# ---------------------------------------------------------------------------

def lowpass_window(r: np.ndarray, w: float, tau: float) -> np.ndarray:
    """Flat-one window up to w - tau with a cosine rolloff ending at w + tau."""
    r = np.abs(np.asarray(r, dtype=np.float64))
    if tau == 0.0:
        return (r <= w).astype(np.float64)
    out = np.zeros_like(r)
    out[r <= w - tau] = 1.0
    zone = (r > w - tau) & (r < w + tau)
    out[zone] = np.cos(np.pi / 2 * meyer_ramp((r[zone] - w + tau) / (2 * tau)))
    return out


def band_window(r: np.ndarray, lo: float, tau_lo: float,
                hi: float | None, tau_hi: float) -> np.ndarray:
    """Bandpass window: sine rise around lo, cosine fall around hi.

    hi=None leaves the band open above, which is how the terminal band
    covers the grid corners beyond |w| = pi.
    """
    r = np.abs(np.asarray(r, dtype=np.float64))
    up = np.ones_like(r)
    if tau_lo > 0.0:
        up = np.zeros_like(r)
        up[r >= lo + tau_lo] = 1.0
        zone = (r > lo - tau_lo) & (r < lo + tau_lo)
        up[zone] = np.sin(np.pi / 2 * meyer_ramp((r[zone] - lo + tau_lo) / (2 * tau_lo)))
    else:
        up = (r >= lo).astype(np.float64)
    if hi is None:
        return up
    down = lowpass_window(r, hi, tau_hi)
    return up * down


def radial_windows(bounds: BoundarySet, r: np.ndarray) -> np.ndarray:
    """All mode windows of a boundary set evaluated at radii r.

    Returns shape (n_modes,) + r.shape; squared windows sum to 1 at every
    sample.  A single-mode set gives the all-pass window.
    """
    w, t = bounds.omegas, bounds.taus
    k = bounds.n_modes
    r = np.asarray(r, dtype=np.float64)
    if k == 1:
        return np.ones((1,) + r.shape)
    out = np.empty((k,) + r.shape)
    out[0] = lowpass_window(r, w[1], t[1])
    for n in range(1, k):
        hi = None if n == k - 1 else w[n + 1]
        thi = 0.0 if n == k - 1 else t[n + 1]
        out[n] = band_window(r, w[n], t[n], hi, thi)
    return out


def build_filter_bank_1d(bounds: BoundarySet, n: int) -> np.ndarray:
    """Mode filters sampled on the n-point DC-centered frequency axis.

    Returns (n_modes, n) real masks, symmetric in w, whose squares sum to
    one per bin (adjusted tight frame on the discrete grid).
    """
    from .fourier import freq_axis

    return radial_windows(bounds, np.abs(freq_axis(n)))


def sector_windows(theta: np.ndarray, boundaries: np.ndarray,
                   tau: float | None = None) -> np.ndarray:
    """Angular windows over the pi-periodic half-plane.

    boundaries: sorted angles in [-pi/2, pi/2).  Zero or one boundary
    degenerates to a single all-pass sector; otherwise each window rises at
    its own boundary and falls at the next (wrapping).  The transition
    half-width defaults to 0.45 x the smallest angular gap, which keeps the
    transition zones of neighbouring boundaries strictly disjoint; squared
    windows then sum to one at every angle.
    """
    theta = np.asarray(theta, dtype=np.float64)
    b = np.asarray(boundaries, dtype=np.float64)
    m = len(b)
    if m <= 1:
        return np.ones((1,) + theta.shape)
    gaps = (np.diff(np.concatenate([b, [b[0] + np.pi]]))) % np.pi
    gaps[gaps == 0] = np.pi
    if np.any(np.diff(b) <= 0):
        raise ValueError("angular boundaries must be strictly increasing")
    if tau is None:
        tau = 0.45 * float(gaps.min())
    if tau <= 0 or 2 * tau > gaps.min():
        raise ValueError("angular transition half-width too large for the gaps")

    out = np.zeros((m,) + theta.shape)
    for i in range(m):
        lo = b[i]
        span = float(gaps[i])
        # Unwrapped position inside this sector's frame: u in [0, pi).
        u = (theta - lo) % np.pi
        w = np.zeros_like(u)
        w[(u >= tau) & (u <= span - tau)] = 1.0
        z = u < tau  # inner half of the rising edge
        w[z] = np.sin(np.pi / 2 * meyer_ramp((u[z] + tau) / (2 * tau)))
        z = u > np.pi - tau  # outer half of the rising edge (wraps past lo)
        w[z] = np.sin(np.pi / 2 * meyer_ramp((u[z] - np.pi + tau) / (2 * tau)))
        z = np.abs(u - span) < tau  # falling edge at the next boundary
        w[z] = np.cos(np.pi / 2 * meyer_ramp((u[z] - span + tau) / (2 * tau)))
        out[i] = w
    return out


def sector_centers(boundaries: np.ndarray) -> np.ndarray:
    """Mid-angles of the sectors defined by the boundary list (wrapped)."""
    b = np.asarray(boundaries, dtype=np.float64)
    m = len(b)
    if m == 0:
        return np.array([0.0])
    if m == 1:
        c = b[0] + np.pi / 2
        return np.array([(c + np.pi / 2) % np.pi - np.pi / 2])
    nxt = np.concatenate([b[1:], [b[0] + np.pi]])
    c = (b + nxt) / 2.0
    return (c + np.pi / 2) % np.pi - np.pi / 2
