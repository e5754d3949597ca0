"""Fixed-basis transforms: taps, pyramids, packets, Gabor, dyadic rings."""

import numpy as np
import pytest

from ewtseg.classic import (
    FAMILIES,
    _correlate_periodic,
    dwt_decimated,
    dwt_decimated_coeffs,
    dwt_undecimated,
    dyadic_radii,
    filter_pair,
    gabor_bank,
    meyer_lp,
    packet_best_basis,
    packet_best_tree,
    prescribed_curvelet,
    quadrature_mirror,
    shannon_cost,
    upsample_nn,
)
from ewtseg.ewt2d import reconstruct


def _wave(shape, radius, alpha):
    yy, xx = np.mgrid[0 : shape[0], 0 : shape[1]].astype(np.float64)
    return np.cos(radius * (np.cos(alpha) * xx + np.sin(alpha) * yy))


# ---------------------------------------------------------------------------
# filter taps
# ---------------------------------------------------------------------------

def test_tap_identities_all_families():
    for family in FAMILIES:
        h = filter_pair(family).h
        assert h.sum() == pytest.approx(np.sqrt(2), abs=1e-12), family
        assert abs(np.sum(h * (-1.0) ** np.arange(len(h)))) <= 1e-12, family
        for m in range(1, len(h) // 2):
            shifted = np.sum(h[: -2 * m] * h[2 * m :])
            assert abs(shifted) <= 1e-12, (family, m)
        assert np.sum(h * h) == pytest.approx(1.0, abs=1e-12), family


def test_daub4_closed_form():
    s3 = np.sqrt(3)
    ref = np.array([1 + s3, 3 + s3, 3 - s3, 1 - s3]) / (4 * np.sqrt(2))
    assert np.abs(filter_pair("Daub4").h - ref).max() <= 1e-12


def test_daub6_closed_form():
    s10 = np.sqrt(10)
    b = np.sqrt(5 + 2 * s10)
    ref = np.array(
        [
            1 + s10 + b,
            5 + s10 + 3 * b,
            10 - 2 * s10 + 2 * b,
            10 - 2 * s10 - 2 * b,
            5 + s10 - 3 * b,
            1 + s10 - b,
        ]
    ) / (16 * np.sqrt(2))
    assert np.abs(filter_pair("Daub6").h - ref).max() <= 1e-12


def test_quadrature_mirror_layout():
    g = quadrature_mirror(np.array([1.0, 2.0, 3.0, 4.0]))
    np.testing.assert_array_equal(g, [4.0, -3.0, 2.0, -1.0])


def test_unknown_family():
    with pytest.raises(ValueError):
        filter_pair("Haar9")


# ---------------------------------------------------------------------------
# decimated pyramid
# ---------------------------------------------------------------------------

def test_correlate_periodic_against_naive_loops():
    rng = np.random.default_rng(30)
    x = rng.standard_normal(16)
    taps = rng.standard_normal(6)
    got = _correlate_periodic(x[None, :], taps, axis=1, step=2)[0]
    want = np.array(
        [sum(taps[k] * x[(2 * n + k) % 16] for k in range(6)) for n in range(8)]
    )
    np.testing.assert_allclose(got, want, atol=1e-14)


def test_decimated_preserves_energy():
    rng = np.random.default_rng(31)
    img = rng.standard_normal((64, 64))
    for family in FAMILIES:
        for levels in (2, 3):
            approx, details = dwt_decimated_coeffs(img, family, levels)
            total = np.sum(approx**2) + sum(np.sum(b**2) for _, _, b in details)
            assert total == pytest.approx(np.sum(img**2), rel=1e-10), family


def test_decimated_constant_has_no_detail():
    approx, details = dwt_decimated_coeffs(np.full((64, 64), 1.0), "Coif2", 3)
    assert max(np.abs(b).max() for _, _, b in details) <= 1e-10
    assert approx == pytest.approx(np.full((8, 8), 8.0), abs=1e-10)


def test_decimated_stack_layout():
    img = np.random.default_rng(32).random((64, 64))
    stack = dwt_decimated(img, "Daub4", 2)
    assert stack.k == 7
    assert stack.labels()[:4] == ["a2", "d1.lh", "d1.hl", "d1.hh"]
    assert stack.lowpass_index == 0
    assert stack.bands.shape == (7, 64, 64)
    assert stack.bank is None


def test_detail_orientation_semantics():
    # Variation along x only: the y-lowpass / x-highpass band takes it.
    img = _wave((64, 64), 0.8 * np.pi, 0.0)
    stack = dwt_decimated(img, "Sym4", 2)
    e = dict(zip(stack.labels(), stack.band_energies()))
    assert e["d1.lh"] > 100 * e["d1.hl"]


def test_decimated_validation():
    img = np.ones((64, 64))
    with pytest.raises(ValueError):
        dwt_decimated(img, "Daub4", 1)
    with pytest.raises(ValueError):
        dwt_decimated(img, "Daub4", 5)
    with pytest.raises(ValueError):
        dwt_decimated(np.ones((100, 100)), "Daub4", 3)
    with pytest.raises(ValueError):
        dwt_decimated(np.ones((16, 16)), "Daub4", 2)


def test_upsample_nn_blocks():
    out = upsample_nn(np.array([[1.0, 2.0], [3.0, 4.0]]), 2)
    np.testing.assert_array_equal(
        out,
        [[1, 1, 2, 2], [1, 1, 2, 2], [3, 3, 4, 4], [3, 3, 4, 4]],
    )


# ---------------------------------------------------------------------------
# undecimated pyramid
# ---------------------------------------------------------------------------

def test_undecimated_shift_equivariance_is_exact():
    rng = np.random.default_rng(33)
    img = rng.random((64, 64))
    a = dwt_undecimated(img, "Daub6", 3)
    b = dwt_undecimated(np.roll(img, (5, -7), axis=(0, 1)), "Daub6", 3)
    np.testing.assert_array_equal(
        np.roll(a.bands, (5, -7), axis=(1, 2)), b.bands
    )


def test_undecimated_layout_and_constant():
    stack = dwt_undecimated(np.full((32, 32), 2.0), "Sym5", 2)
    assert stack.k == 7
    assert stack.labels()[0] == "a2"
    assert stack.labels()[1:4] == ["d1.lh", "d1.hl", "d1.hh"]
    details = np.delete(stack.bands, stack.lowpass_index, axis=0)
    assert np.abs(details).max() <= 1e-9


def test_undecimated_level2_band_against_dilated_loops():
    rng = np.random.default_rng(34)
    n = 32
    img = rng.standard_normal((n, n))
    pair = filter_pair("Daub4")
    h, g = pair.h, pair.g

    def conv_x(x, taps):
        out = np.zeros_like(x)
        for i in range(n):
            for j in range(n):
                out[i, j] = sum(t * x[i, (j + k) % n] for k, t in enumerate(taps))
        return out

    def conv_y(x, taps):
        out = np.zeros_like(x)
        for i in range(n):
            for j in range(n):
                out[i, j] = sum(t * x[(i + k) % n, j] for k, t in enumerate(taps))
        return out

    def dilate(taps):
        out = np.zeros(2 * (len(taps) - 1) + 1)
        out[::2] = taps
        return out

    x1 = conv_y(conv_x(img, h), h)
    want = conv_y(conv_x(x1, dilate(g)), dilate(h))  # level 2, y-low x-high

    stack = dwt_undecimated(img, "Daub4", 2)
    got = stack.bands[stack.labels().index("d2.lh")]
    np.testing.assert_allclose(got, want, atol=1e-12)


def test_undecimated_validation():
    with pytest.raises(ValueError):
        dwt_undecimated(np.ones((64, 64)), "Daub4", 0)


# ---------------------------------------------------------------------------
# wavelet packets
# ---------------------------------------------------------------------------

def test_tone_splits_and_costs_agree():
    img = _wave((64, 64), 0.75 * np.pi, 0.0)
    tree = packet_best_tree(img, "Daub6", 2)
    assert tree.children is not None
    leaf_sum = sum(shannon_cost(l.coeffs) for l in tree.leaves())
    assert tree.entropy_cost == pytest.approx(leaf_sum, rel=1e-12)
    assert tree.entropy_cost < shannon_cost(img)


def test_best_basis_beats_both_extremes():
    from ewtseg.classic import _dwt2_step

    rng = np.random.default_rng(35)
    img = rng.standard_normal((64, 64))
    pair = filter_pair("Coif1")

    def full_depth_cost(x, depth):
        if depth == 0:
            return shannon_cost(x)
        return sum(full_depth_cost(q, depth - 1) for q in _dwt2_step(x, pair.h, pair.g))

    tree = packet_best_tree(img, "Coif1", 2)
    assert tree.entropy_cost <= shannon_cost(img) + 1e-9
    assert tree.entropy_cost <= full_depth_cost(img, 2) + 1e-9


def test_leaves_tile_the_plane_and_keep_energy():
    rng = np.random.default_rng(36)
    img = rng.standard_normal((64, 64))
    tree = packet_best_tree(img, "Coif1", 3)
    leaves = tree.leaves()
    assert sum(4.0 ** -len(l.path) for l in leaves) == pytest.approx(1.0)
    assert all(set(l.path) <= set("avhd") for l in leaves)
    total = sum(np.sum(l.coeffs**2) for l in leaves)
    assert total == pytest.approx(np.sum(img**2), rel=1e-10)


def test_best_basis_stack():
    img = _wave((64, 64), 0.75 * np.pi, 0.0) + 0.3
    stack = packet_best_basis(img, "Daub6", 2)
    assert stack.bands.shape[1:] == (64, 64)
    assert stack.bank is None
    lp = stack.infos[stack.lowpass_index]
    assert set(lp.path) <= {"a"}
    assert all(label.startswith("p[") for label in stack.labels())
    with pytest.raises(ValueError):
        packet_best_basis(img, "Daub6", 1)


def test_shannon_cost_zero_convention():
    assert shannon_cost(np.zeros(10)) == 0.0
    assert shannon_cost(np.array([1.0])) == 0.0  # 1 log 1


# ---------------------------------------------------------------------------
# Gabor bank
# ---------------------------------------------------------------------------

def test_gabor_band_count_and_labels():
    img = np.random.default_rng(37).random((64, 64))
    stack = gabor_bank(img, 4, 6)
    assert stack.k == 25
    assert stack.labels()[0] == "gabor[lp]"
    assert stack.labels()[1] == "gabor[s0,k0]"
    assert stack.labels()[-1] == "gabor[s3,k5]"


def test_gabor_dominant_band_tracks_the_wave():
    cases = [
        (1.0, 0.0, "gabor[s0,k0]"),
        (0.5, np.pi / 3, "gabor[s1,k2]"),
        (0.25, np.pi / 2, "gabor[s2,k3]"),
    ]
    for radius, alpha, label in cases:
        img = _wave((128, 128), radius, alpha)
        stack = gabor_bank(img, 4, 6)
        best = int(np.argmax(stack.band_energies()))
        assert stack.labels()[best] == label


def test_gabor_constant_goes_to_lowpass():
    stack = gabor_bank(np.full((64, 64), 0.7), 4, 6)
    assert int(np.argmax(stack.band_energies())) == 0
    np.testing.assert_allclose(stack.bands[0], 0.7, atol=1e-12)


def test_gabor_bands_are_magnitudes():
    img = np.random.default_rng(38).standard_normal((64, 64))
    stack = gabor_bank(img, 3, 4)
    assert stack.bands.min() >= 0.0
    assert np.isfinite(stack.bands).all()


def test_gabor_is_not_a_tight_frame():
    img = np.random.default_rng(39).random((64, 64))
    assert gabor_bank(img, 4, 6).bank.tight_frame_error() > 1e-2


def test_gabor_validation():
    img = np.ones((64, 64))
    with pytest.raises(ValueError):
        gabor_bank(img, 0, 6)
    with pytest.raises(ValueError):
        gabor_bank(img, 4, 1)


# ---------------------------------------------------------------------------
# dyadic rings and prescribed curvelets
# ---------------------------------------------------------------------------

def test_dyadic_radii_gap_rule():
    bounds = dyadic_radii(3)
    np.testing.assert_allclose(
        bounds.omegas, [0.0, np.pi / 8, np.pi / 4, np.pi / 2, np.pi]
    )
    np.testing.assert_allclose(bounds.taus[1:-1], 0.33 * bounds.omegas[1:-1])


def test_meyer_rings_pick_the_isotropic_texture():
    n = 128
    yy, xx = np.mgrid[0:n, 0:n].astype(np.float64)
    img = np.cos(np.pi / 3 * np.hypot(yy - n / 2, xx - n / 2))
    for n_scales in (2, 3, 4):
        stack = meyer_lp(img, n_scales)
        assert stack.k == n_scales + 1
        assert stack.bank.tight_frame_error() <= 1e-12
        info = stack.infos[int(np.argmax(stack.band_energies()))]
        assert info.r_lo == pytest.approx(np.pi / 4)
        assert info.r_hi == pytest.approx(np.pi / 2)


def test_meyer_round_trip_and_constant():
    rng = np.random.default_rng(40)
    img = rng.random((64, 64))
    stack = meyer_lp(img, 3)
    assert np.abs(reconstruct(stack) - img).max() <= 1e-8
    flat = meyer_lp(np.full((64, 64), 0.5), 2)
    rings = np.delete(flat.bands, flat.lowpass_index, axis=0)
    assert np.abs(rings).max() <= 1e-12
    with pytest.raises(ValueError):
        meyer_lp(img, 5)


def test_prescribed_curvelet_shape_and_frame():
    rng = np.random.default_rng(41)
    img = rng.random((64, 64))
    stack = prescribed_curvelet(img, 4, 6)
    assert stack.k == 25
    assert stack.bank.tight_frame_error() <= 1e-12
    assert np.abs(reconstruct(stack) - img).max() <= 1e-8


def test_prescribed_curvelet_wedge_dominates():
    img = _wave((128, 128), 1.2, np.pi / 6)
    stack = prescribed_curvelet(img, 3, 4)
    best = int(np.argmax(stack.band_energies()))
    assert stack.labels()[best] == "wedge[0.7854,1.5708;th=0.3927]"


def test_prescribed_curvelet_validation():
    img = np.ones((64, 64))
    with pytest.raises(ValueError):
        prescribed_curvelet(img, 1, 6)
    with pytest.raises(ValueError):
        prescribed_curvelet(img, 4, 1)
