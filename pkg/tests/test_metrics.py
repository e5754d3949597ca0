"""Region-overlap scores against brute-force oracles and worked cases."""

import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ewtseg.clustering import Partition
from ewtseg.metrics import (MetricReport, bce, bgm, contingency, nvoi,
                            report, sdhd, ssc, vd)


def _part(labels):
    labels = np.asarray(labels, dtype=np.int32)
    return Partition.from_labels(labels, int(labels.max()) + 1)


def _halves_16():
    """4x4 reference split into left and right halves of 8 pixels."""
    return _part(np.repeat([[0, 0, 1, 1]], 4, axis=0))


def _single_16():
    return _part(np.zeros((4, 4), dtype=np.int32))


def _random_pair(seed, shape=(8, 8), k_s=3, k_g=3):
    rng = np.random.default_rng(seed)
    return (_part(rng.integers(0, k_s, size=shape)),
            _part(rng.integers(0, k_g, size=shape)))


def _overlap_dict(ps, pg):
    """Pixel-loop overlap counts, the slow route."""
    over = {}
    for la, lb in zip(ps.labels.ravel().tolist(), pg.labels.ravel().tolist()):
        over[(la, lb)] = over.get((la, lb), 0) + 1
    return over


def _matches_up_to_relabel(ps, pg):
    over = _overlap_dict(ps, pg)
    return (len({a for a, _ in over}) == len(over)
            and len({b for _, b in over}) == len(over))


# contingency table

def test_contingency_identical_is_diagonal():
    labels = np.array([[0, 0, 0, 1], [0, 0, 1, 1],
                       [0, 1, 1, 1], [1, 1, 1, 1]])
    t = contingency(_part(labels), _part(labels))
    assert np.array_equal(t.counts, np.diag([6, 10]))
    assert np.array_equal(t.row_sizes, [6, 10])
    assert t.total == 16


def test_contingency_single_vs_halves_is_one_row():
    t = contingency(_single_16(), _halves_16())
    assert np.array_equal(t.counts, [[8, 8]])


def test_contingency_matches_pixel_loop():
    for seed in range(5):
        ps, pg = _random_pair(seed)
        t = contingency(ps, pg)
        over = _overlap_dict(ps, pg)
        for (a, b), n in over.items():
            assert t.counts[a, b] == n
        assert int(t.counts.sum()) == sum(over.values()) == t.total


def test_contingency_drops_empty_regions():
    # label 1 unused: the table must still have positive marginals
    ps = Partition.from_labels(np.full((4, 4), 2, dtype=np.int32), 3)
    t = contingency(ps, _halves_16())
    assert t.counts.shape == (1, 2)
    assert t.row_sizes.min() > 0


def test_contingency_shape_mismatch():
    with pytest.raises(ValueError, match="shapes differ"):
        contingency(_part(np.zeros((4, 4), int)), _part(np.zeros((4, 5), int)))


# normalized variation of information

def test_nvoi_identical():
    ps, _ = _random_pair(0)
    assert nvoi(contingency(ps, ps)) == 100.0


def test_nvoi_single_vs_halves_is_zero():
    # H(computed) = 0, H(reference) = log 2, shared information 0
    assert nvoi(contingency(_single_16(), _halves_16())) == 0.0


def test_nvoi_both_single_region():
    assert nvoi(contingency(_single_16(), _single_16())) == 100.0


def test_nvoi_independent_colorings_near_zero():
    rng = np.random.default_rng(11)
    ps = _part(rng.integers(0, 2, size=(128, 128)))
    pg = _part(rng.integers(0, 2, size=(128, 128)))
    assert nvoi(contingency(ps, pg)) <= 1.0


def test_nvoi_matches_direct_entropy_sums():
    for seed in range(4):
        ps, pg = _random_pair(seed, k_s=4, k_g=3)
        over = _overlap_dict(ps, pg)
        n = ps.labels.size
        row = {}
        col = {}
        for (a, b), c in over.items():
            row[a] = row.get(a, 0) + c
            col[b] = col.get(b, 0) + c
        h_s = -sum(c / n * math.log(c / n) for c in row.values())
        h_g = -sum(c / n * math.log(c / n) for c in col.values())
        mi = sum(c / n * math.log(c * n / (row[a] * col[b]))
                 for (a, b), c in over.items())
        want = 100.0 * min(1.0, max(0.0, 1.0 - (h_s + h_g - 2 * mi)
                                    / math.log(max(len(row), len(col)))))
        assert nvoi(contingency(ps, pg)) == pytest.approx(want, abs=1e-10)


# directional Hamming score and its symmetric combination

def test_sdhd_identical():
    ps, _ = _random_pair(3)
    assert sdhd(contingency(ps, ps)) == 100.0


def test_sdhd_single_vs_halves():
    assert sdhd(contingency(_single_16(), _halves_16())) == 50.0


def test_sdhd_matches_formula_loop():
    for seed in range(5):
        ps, pg = _random_pair(seed, k_s=4, k_g=3)
        over = _overlap_dict(ps, pg)
        labels_s = {a for a, _ in over}
        covered = sum(max(over.get((a, b), 0) for _, b in over)
                      for a in labels_s)
        want = 100.0 * covered / ps.labels.size
        assert sdhd(contingency(ps, pg)) == pytest.approx(want, abs=1e-12)


def test_vd_identical():
    ps, _ = _random_pair(4)
    assert vd(contingency(ps, ps)) == 100.0


def test_vd_single_vs_halves():
    # one direction covers fully, the other misses half a region
    assert vd(contingency(_single_16(), _halves_16())) == 75.0


def test_vd_symmetric():
    for seed in range(5):
        ps, pg = _random_pair(seed, k_s=4, k_g=2)
        assert vd(contingency(ps, pg)) == pytest.approx(
            vd(contingency(pg, ps)), abs=1e-12)


# segmentation covering

def test_ssc_identical():
    ps, _ = _random_pair(5)
    assert ssc(contingency(ps, ps)) == 100.0


def test_ssc_single_vs_halves():
    assert ssc(contingency(_single_16(), _halves_16())) == 50.0


def test_ssc_matches_formula_loop():
    for seed in range(5):
        ps, pg = _random_pair(seed, k_s=3, k_g=4)
        over = _overlap_dict(ps, pg)
        row = {}
        col = {}
        for (a, b), c in over.items():
            row[a] = row.get(a, 0) + c
            col[b] = col.get(b, 0) + c
        total = 0.0
        for b, size_b in col.items():
            best = max(over.get((a, b), 0) / (row[a] + size_b
                                              - over.get((a, b), 0))
                       for a in row)
            total += size_b * best
        want = 100.0 * total / ps.labels.size
        assert ssc(contingency(ps, pg)) == pytest.approx(want, abs=1e-10)


# one-to-one region matching

def test_bgm_identical():
    ps, _ = _random_pair(6)
    assert bgm(contingency(ps, ps)) == 100.0


def test_bgm_single_vs_halves():
    # the lone computed region can be matched to only one half
    assert bgm(contingency(_single_16(), _halves_16())) == 50.0


def _best_assignment(counts):
    """Exhaustive search over all one-to-one region pairings."""
    n = max(counts.shape)
    padded = np.zeros((n, n), dtype=np.int64)
    padded[:counts.shape[0], :counts.shape[1]] = counts
    return max(sum(padded[i, p[i]] for i in range(n))
               for p in itertools.permutations(range(n)))


def test_bgm_matches_exhaustive_matching():
    for seed in range(20):
        rng = np.random.default_rng(seed)
        k_s = int(rng.integers(2, 6))
        k_g = int(rng.integers(2, 6))
        ps, pg = _random_pair(seed + 100, k_s=k_s, k_g=k_g)
        t = contingency(ps, pg)
        want = 100.0 * _best_assignment(t.counts) / t.total
        assert bgm(t) == pytest.approx(want, abs=1e-12)


# bidirectional consistency

def test_bce_identical():
    ps, _ = _random_pair(7)
    assert bce(contingency(ps, ps)) == 100.0


def test_bce_single_vs_halves():
    assert bce(contingency(_single_16(), _halves_16())) == 50.0


def test_bce_penalizes_refinement():
    quadrants = _part(np.array([[0, 0, 1, 1], [0, 0, 1, 1],
                                [2, 2, 3, 3], [2, 2, 3, 3]]))
    halves = _part(np.repeat([[0, 0, 1, 1]], 4, axis=0))
    t = contingency(quadrants, halves)
    assert sdhd(t) == 100.0  # every quadrant sits inside one half
    assert bce(t) == 50.0  # but the refinement is not forgiven


def test_bce_matches_formula_loop():
    for seed in range(5):
        ps, pg = _random_pair(seed, k_s=4, k_g=4)
        over = _overlap_dict(ps, pg)
        row = {}
        col = {}
        for (a, b), c in over.items():
            row[a] = row.get(a, 0) + c
            col[b] = col.get(b, 0) + c
        s = sum(c * min(c / row[a], c / col[b])
                for (a, b), c in over.items())
        want = 100.0 * s / ps.labels.size
        assert bce(contingency(ps, pg)) == pytest.approx(want, abs=1e-10)


# combined report

def test_report_identical_all_100():
    ps, _ = _random_pair(8)
    rep = report(ps, ps)
    assert rep.as_row() == (100.0,) * 7


def test_report_single_vs_halves_golden():
    rep = report(_single_16(), _halves_16())
    assert rep.nvoi == 0.0
    assert rep.sdhd == 50.0
    assert rep.vd == 75.0
    assert rep.ssc == 50.0
    assert rep.bgm == 50.0
    assert rep.bce == 50.0
    assert rep.mean == pytest.approx(275.0 / 6.0, abs=1e-12)


def test_report_invariant_under_relabeling():
    ps, pg = _random_pair(9, k_s=4, k_g=3)
    swapped = _part((ps.labels.max() - ps.labels))
    assert report(ps, pg) == report(swapped, pg)
    swapped_g = _part((pg.labels.max() - pg.labels))
    assert report(ps, pg) == report(ps, swapped_g)


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 10 ** 9), st.integers(2, 5), st.integers(2, 5),
       st.booleans())
def test_all_100_iff_same_up_to_relabeling(seed, k_s, k_g, make_equal):
    rng = np.random.default_rng(seed)
    labels = rng.integers(0, k_s, size=(6, 6))
    ps = _part(labels)
    if make_equal:
        perm = rng.permutation(int(labels.max()) + 1)
        pg = _part(perm[labels])
    else:
        pg = _part(rng.integers(0, k_g, size=(6, 6)))
    rep = report(ps, pg)
    if _matches_up_to_relabel(ps, pg):
        assert rep.as_row() == (100.0,) * 7
    else:
        assert min(rep.as_row()[:6]) < 100.0


def test_report_bounds_enforced():
    with pytest.raises(ValueError, match="outside"):
        MetricReport(101.0, 50.0, 50.0, 50.0, 50.0, 50.0, 58.5)
    with pytest.raises(ValueError, match="mean"):
        MetricReport(50.0, 50.0, 50.0, 50.0, 50.0, 50.0, 99.0)
