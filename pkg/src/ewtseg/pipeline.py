"""End-to-end segmentation of one image against its ground truth.

Stages: optional cartoon+texture split (only the texture part is
segmented), a filter-bank transform chosen by family id, windowed
feature extraction with the lowpass band dropped, clustering at the
known class count, and scoring.  Any failure is re-raised tagged with
the stage that produced it, so batch runs can report where an image
died.
"""

from __future__ import annotations

from contextlib import contextmanager
from dataclasses import dataclass, field, replace
from functools import partial

import numpy as np

from .cartoon import decompose_auto
from .classic import (dwt_decimated, dwt_undecimated, gabor_bank, meyer_lp,
                      packet_best_basis, prescribed_curvelet)
from .clustering import ClusterConfig, Partition, cluster
from .ewt2d import CoefficientStack, ewt2d_curvelet, ewt2d_lp, ewt2d_tensor
from .features import PostProcessConfig, compute_features
from .metrics import MetricReport, report

_TAP_FAMILIES = ("Coif1", "Coif2", "Daub4", "Daub6", "Sym4", "Sym5")
_TAP_LEVELS = (2, 3, 4)


def _registry() -> dict:
    reg = {}
    for fam in _TAP_FAMILIES:
        for lev in _TAP_LEVELS:
            reg[f"{fam}_{lev}"] = partial(dwt_decimated,
                                          family=fam, levels=lev)
            reg[f"U{fam}_{lev}"] = partial(dwt_undecimated,
                                           family=fam, levels=lev)
            reg[f"P{fam}_{lev}"] = partial(packet_best_basis,
                                           family=fam, max_depth=lev)
    for s in _TAP_LEVELS:
        reg[f"Meyer_{s}"] = partial(meyer_lp, n_scales=s)
    reg["Gabor"] = gabor_bank
    reg["Curvelet"] = prescribed_curvelet
    reg["EWT2DT"] = ewt2d_tensor
    reg["EWT2DLP"] = ewt2d_lp
    for opt in (1, 2, 3):
        reg[f"EWTC{opt}"] = partial(ewt2d_curvelet, option=opt)
    return reg


WAVELET_FAMILIES = _registry()


def transform(img: np.ndarray, wavelet: str) -> CoefficientStack:
    """Coefficient stack of the named family applied to img."""
    if wavelet not in WAVELET_FAMILIES:
        raise ValueError(f"unknown wavelet family {wavelet!r}; "
                         f"known ids: {', '.join(sorted(WAVELET_FAMILIES))}")
    return WAVELET_FAMILIES[wavelet](img)


@dataclass
class RunConfig:
    """Options for one segmentation run; k is the known class count."""

    k: int
    wavelet: str = "EWTC1"
    post: PostProcessConfig = field(default_factory=PostProcessConfig)
    cluster: ClusterConfig | None = None
    decompose_first: bool = True

    def __post_init__(self):
        if self.wavelet not in WAVELET_FAMILIES:
            raise ValueError(f"unknown wavelet family {self.wavelet!r}")
        if self.cluster is None:
            self.cluster = ClusterConfig(k=self.k, method="kmeans",
                                         distance="cityblock")
        elif self.cluster.k != self.k:
            # the ground truth dictates k; the rest of the config stands
            self.cluster = replace(self.cluster, k=self.k)


class StageError(RuntimeError):
    """A pipeline stage failed; .stage names it, .__cause__ says why."""

    def __init__(self, stage: str, cause: BaseException):
        super().__init__(f"{stage} stage failed: {cause}")
        self.stage = stage


@contextmanager
def _stage(name: str):
    try:
        yield
    except StageError:
        raise
    except Exception as exc:
        raise StageError(name, exc) from exc


def segment(img: np.ndarray, cfg: RunConfig) -> Partition:
    """Partition one image: decompose (optional), transform, featurize,
    cluster.  Deterministic given cfg's seed."""
    work = np.asarray(img, dtype=float)
    if cfg.decompose_first:
        with _stage("decompose"):
            work = decompose_auto(work).texture
    with _stage("transform"):
        stack = transform(work, cfg.wavelet)
    with _stage("features"):
        feats = compute_features(stack, cfg.post)
    with _stage("cluster"):
        return cluster(feats, cfg.cluster)


def run_pipeline(img: np.ndarray, gt: Partition,
                 cfg: RunConfig) -> tuple[Partition, MetricReport]:
    """Segment img and score the result against gt."""
    part = segment(img, cfg)
    with _stage("evaluate"):
        return part, report(part, gt)
