"""Region-overlap scores between a computed partition and a reference.

Six similarity measures, each mapped to a percentage where 100 means
the partitions agree up to relabeling: normalized variation of
information (nvoi), the swapped directional Hamming score (sdhd), its
symmetric van Dongen combination (vd), swapped segmentation covering
(ssc), maximum-weight one-to-one region matching (bgm), and the
bidirectional consistency score (bce).  Every score is a function of
the region contingency table alone, so all are invariant under
relabeling of either partition.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import linear_sum_assignment

from .clustering import Partition

METRIC_COLUMNS = ("nvoi", "sdhd", "vd", "ssc", "bgm", "bce", "mean")


@dataclass
class ContingencyTable:
    """Pairwise region overlap counts.

    Rows index regions of the first (computed) partition, columns the
    second (reference) one.  Only regions actually present in the label
    maps appear; marginals are therefore strictly positive.
    """

    counts: np.ndarray
    row_sizes: np.ndarray
    col_sizes: np.ndarray
    total: int

    def __post_init__(self):
        c = self.counts
        if c.min() < 0:
            raise ValueError("negative overlap count")
        if not np.array_equal(c.sum(axis=1), self.row_sizes):
            raise ValueError("row marginals do not match overlap counts")
        if not np.array_equal(c.sum(axis=0), self.col_sizes):
            raise ValueError("column marginals do not match overlap counts")
        if int(c.sum()) != self.total:
            raise ValueError("overlap counts do not cover the image")


@dataclass
class MetricReport:
    """The six percentage scores plus their arithmetic mean."""

    nvoi: float
    sdhd: float
    vd: float
    ssc: float
    bgm: float
    bce: float
    mean: float

    def __post_init__(self):
        row = self.as_row()
        for name, val in zip(METRIC_COLUMNS, row):
            if not 0.0 <= val <= 100.0:
                raise ValueError(f"{name} outside [0, 100]: {val}")
        if abs(self.mean - sum(row[:6]) / 6.0) > 1e-9:
            raise ValueError("mean is not the average of the six scores")

    @classmethod
    def from_scores(cls, nvoi: float, sdhd: float, vd: float, ssc: float,
                    bgm: float, bce: float) -> "MetricReport":
        scores = (nvoi, sdhd, vd, ssc, bgm, bce)
        return cls(*scores, mean=sum(scores) / 6.0)

    def as_row(self) -> tuple[float, ...]:
        return (self.nvoi, self.sdhd, self.vd, self.ssc, self.bgm,
                self.bce, self.mean)


def contingency(ps: Partition, pg: Partition) -> ContingencyTable:
    """Exact overlap pixel counts between the regions of two partitions."""
    a = np.asarray(ps.labels)
    b = np.asarray(pg.labels)
    if a.shape != b.shape:
        raise ValueError(f"partition shapes differ: {a.shape} vs {b.shape}")
    # dense relabeling drops empty regions, keeping marginals positive
    ai = np.unique(a.ravel(), return_inverse=True)[1]
    bi = np.unique(b.ravel(), return_inverse=True)[1]
    n_s = int(ai.max()) + 1
    n_g = int(bi.max()) + 1
    counts = np.bincount(ai * n_g + bi,
                         minlength=n_s * n_g).reshape(n_s, n_g)
    return ContingencyTable(counts=counts,
                            row_sizes=counts.sum(axis=1),
                            col_sizes=counts.sum(axis=0),
                            total=int(a.size))


def nvoi(t: ContingencyTable) -> float:
    """Variation-of-information similarity, normalized by log of the
    larger region count and clamped to [0, 100]."""
    n_cl = max(len(t.row_sizes), len(t.col_sizes))
    if n_cl == 1:
        return 100.0
    # both conditional entropies; a bijective table gives log(1) = 0
    # termwise, so agreement up to relabeling scores exactly 100
    mask = t.counts > 0
    c = t.counts[mask].astype(float)
    rows = np.broadcast_to(t.row_sizes[:, None], t.counts.shape)[mask]
    cols = np.broadcast_to(t.col_sizes[None, :], t.counts.shape)[mask]
    voi = -float(np.sum(c * (np.log(c / rows) + np.log(c / cols)))) / t.total
    return 100.0 * min(1.0, max(0.0, 1.0 - voi / math.log(n_cl)))


def sdhd(t: ContingencyTable) -> float:
    """Directional Hamming similarity, reference toward computed: every
    computed region is claimed by its best-overlapping reference region."""
    covered = int(t.counts.max(axis=1).sum())
    return 100.0 * covered / t.total


def vd(t: ContingencyTable) -> float:
    """Symmetric (van Dongen) combination of both Hamming directions."""
    residual = 2 * t.total - int(t.counts.max(axis=1).sum()) \
        - int(t.counts.max(axis=0).sum())
    return 100.0 * (1.0 - residual / (2.0 * t.total))


def ssc(t: ContingencyTable) -> float:
    """Covering of the reference by the computed partition: each
    reference region weighted by its best Jaccard overlap."""
    union = t.row_sizes[:, None] + t.col_sizes[None, :] - t.counts
    best = (t.counts / union).max(axis=0)
    return 100.0 * float(np.sum(t.col_sizes * best)) / t.total


def bgm(t: ContingencyTable) -> float:
    """Maximum-weight one-to-one region matching, as covered fraction."""
    n_s, n_g = t.counts.shape
    n = max(n_s, n_g)
    padded = np.zeros((n, n), dtype=np.int64)
    padded[:n_s, :n_g] = t.counts
    rows, cols = linear_sum_assignment(padded, maximize=True)
    w = int(padded[rows, cols].sum())
    return 100.0 * w / t.total


def bce(t: ContingencyTable) -> float:
    """Consistency score penalizing refinement in either direction."""
    frac_r = t.counts / t.row_sizes[:, None]
    frac_c = t.counts / t.col_sizes[None, :]
    s = float(np.sum(t.counts * np.minimum(frac_r, frac_c)))
    return 100.0 * s / t.total


def report(ps: Partition, pg: Partition) -> MetricReport:
    """All six scores of ps against the reference pg, plus their mean."""
    t = contingency(ps, pg)
    return MetricReport.from_scores(nvoi(t), sdhd(t), vd(t), ssc(t),
                                    bgm(t), bce(t))
