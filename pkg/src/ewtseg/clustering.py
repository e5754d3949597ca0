"""Pixel clustering: seeded k-means and Nystrom spectral partitioning.

Both methods share the distance-proportional seeding rule and a single
sequentially consumed generator, so a fixed seed reproduces partitions
bit for bit.  Four point distances are supported; the angular ones
(cosine, correlation) run Lloyd iterations on direction-normalized
copies so the arithmetic-mean center update provably lowers the
within-cluster cost every iteration.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np
from scipy.spatial.distance import cdist

from .features import FeatureField

METHODS = ("kmeans", "nystrom")
DISTANCES = ("euclidean", "cityblock", "cosine", "correlation")

_CHUNK = 4096
_COST_SLACK = 1e-7
_JITTERS = (0.0, 1e-8, 1e-7, 1e-6)


@dataclass
class ClusterConfig:
    k: int
    method: str = "kmeans"
    distance: str = "euclidean"
    seed: int = 0
    max_iters: int = 300
    nystrom_samples: int | None = None
    nystrom_sigma: float | str = "auto"

    def __post_init__(self):
        if self.k < 2:
            raise ValueError("k must be at least 2")
        if self.method not in METHODS:
            raise ValueError(f"method must be one of {METHODS}")
        if self.distance not in DISTANCES:
            raise ValueError(f"distance must be one of {DISTANCES}")
        if self.max_iters < 1:
            raise ValueError("max_iters must be >= 1")


@dataclass
class Partition:
    """Per-pixel labels in [0, k) plus the pixel count of every region."""

    labels: np.ndarray
    k: int
    region_sizes: np.ndarray

    def __post_init__(self):
        lab = self.labels
        if lab.min() < 0 or lab.max() >= self.k:
            raise ValueError("labels out of range")
        if self.region_sizes.sum() != lab.size:
            raise ValueError("region inventory does not cover the image")

    @classmethod
    def from_labels(cls, labels: np.ndarray, k: int) -> "Partition":
        labels = np.asarray(labels, dtype=np.int32)
        sizes = np.bincount(labels.ravel(), minlength=k)
        return cls(labels=labels, k=k, region_sizes=sizes)


def _as_points(features) -> np.ndarray:
    if isinstance(features, FeatureField):
        return features.data.reshape(-1, features.dim)
    arr = np.asarray(features, dtype=float)
    if arr.ndim == 3:
        return arr.reshape(-1, arr.shape[-1])
    if arr.ndim == 2:
        return arr
    raise ValueError("features must be a FeatureField or (n, dim) array")


def _degenerate_rows(points: np.ndarray, kind: str) -> np.ndarray:
    if kind == "cosine":
        return np.linalg.norm(points, axis=1) == 0
    if kind == "correlation":
        return points.std(axis=1) == 0
    return np.zeros(len(points), dtype=bool)


def pairwise_distances(a: np.ndarray, b: np.ndarray, kind: str) -> np.ndarray:
    """(len(a), len(b)) distance matrix; degenerate angular pairs get 1."""
    if kind not in DISTANCES:
        raise ValueError(f"unknown distance {kind!r}")
    a = np.atleast_2d(np.asarray(a, dtype=float))
    b = np.atleast_2d(np.asarray(b, dtype=float))
    if a.shape[1] != b.shape[1]:
        raise ValueError("dimension mismatch")
    bad_a = _degenerate_rows(a, kind)
    bad_b = _degenerate_rows(b, kind)
    if bad_a.any() or bad_b.any():
        warnings.warn(f"degenerate vectors under {kind} distance; "
                      "their distances are defined as 1", stacklevel=2)
    with np.errstate(invalid="ignore", divide="ignore"):
        d = cdist(a, b, metric=kind)
    if bad_a.any():
        d[bad_a, :] = 1.0
    if bad_b.any():
        d[:, bad_b] = 1.0
    return d


def distance(a, b, kind: str) -> float:
    return float(pairwise_distances(np.atleast_2d(a), np.atleast_2d(b),
                                    kind)[0, 0])


def assign_labels(points: np.ndarray, centers: np.ndarray,
                  kind: str) -> np.ndarray:
    """Nearest-center index per point; ties go to the lowest index."""
    return np.argmin(pairwise_distances(points, centers, kind), axis=1)


def seed_centers(features, k: int, kind: str, rng: np.random.Generator,
                 require_distinct: bool = True) -> np.ndarray:
    """First center uniform, each next drawn proportionally to the distance
    from its nearest already-chosen center.  With require_distinct the call
    demands k distinct vectors; without it (the k-means path) exhausted
    distances fall back to a uniform draw over unchosen indices, and the
    empty-cluster rule deals with the duplicates."""
    points = _as_points(features)
    n = len(points)
    if k < 1 or k > n:
        raise ValueError("k must be in [1, number of points]")
    if require_distinct and len(np.unique(points, axis=0)) < k:
        raise ValueError(f"need at least {k} distinct feature vectors")
    chosen = [int(rng.integers(n))]
    nearest = None
    while len(chosen) < k:
        latest = pairwise_distances(points, points[chosen[-1:]], kind)[:, 0]
        nearest = latest if nearest is None else np.minimum(nearest, latest)
        total = nearest.sum()
        if total > 0:
            chosen.append(int(rng.choice(n, p=nearest / total)))
        else:
            free = np.setdiff1d(np.arange(n), chosen)
            chosen.append(int(free[rng.integers(len(free))]))
    return points[chosen].copy()


def _transform(points: np.ndarray, kind: str) -> np.ndarray:
    """Map points into the space where the arithmetic mean is the correct
    center update: identity for l2/l1, the unit sphere for the angular
    distances (correlation centers each vector first)."""
    if kind in ("euclidean", "cityblock"):
        return points
    q = points - points.mean(axis=1, keepdims=True) \
        if kind == "correlation" else points
    norms = np.linalg.norm(q, axis=1, keepdims=True)
    return np.divide(q, np.where(norms == 0, 1.0, norms))


def _cluster_cost(d_to_own: np.ndarray, kind: str) -> float:
    # the quantity each update step provably minimizes
    if kind == "euclidean":
        return float(np.sum(d_to_own ** 2))
    return float(np.sum(d_to_own))


def _lloyd(points: np.ndarray, k: int, kind: str, rng: np.random.Generator,
           max_iters: int, shape) -> Partition:
    n = len(points)
    if n < k:
        raise ValueError("fewer points than clusters")
    work = _transform(points, kind)
    centers = seed_centers(work, k, kind, rng, require_distinct=False)
    labels = None
    prev_cost = np.inf
    for _ in range(max_iters):
        dmat = pairwise_distances(work, centers, kind)
        new_labels = np.argmin(dmat, axis=1)
        cost = _cluster_cost(dmat[np.arange(n), new_labels], kind)
        if cost > prev_cost + _COST_SLACK * max(1.0, abs(prev_cost)):
            raise RuntimeError("within-cluster cost increased")
        prev_cost = cost
        if labels is not None and np.array_equal(new_labels, labels):
            break
        labels = new_labels

        empties = []
        for j in range(k):
            members = work[labels == j]
            if len(members) == 0:
                empties.append(j)
            elif kind == "cityblock":
                centers[j] = np.median(members, axis=0)
            else:
                centers[j] = members.mean(axis=0)
        for j in list(empties):
            # deterministic re-seed: farthest point from the filled centers
            filled = [c for c in range(k) if c not in empties]
            d_near = pairwise_distances(work, centers[filled], kind).min(axis=1)
            centers[j] = work[int(np.argmax(d_near))]
            empties.remove(j)

    return Partition.from_labels(labels.reshape(shape), k)


def _label_shape(features, points):
    if isinstance(features, FeatureField):
        return (features.height, features.width)
    arr = np.asarray(features)
    return arr.shape[:2] if arr.ndim == 3 else (len(points),)


def kmeans(features, cfg: ClusterConfig) -> Partition:
    points = _as_points(features)
    rng = np.random.default_rng(cfg.seed)
    return _lloyd(points, cfg.k, cfg.distance, rng, cfg.max_iters,
                  _label_shape(features, points))


def _gaussian_affinity(a, b, kind, sigma):
    d = pairwise_distances(a, b, kind)
    return np.exp(-(d ** 2) / (2.0 * sigma ** 2))


def _resolve_m(cfg: ClusterConfig, n: int) -> int:
    m = cfg.nystrom_samples if cfg.nystrom_samples is not None \
        else min(1000, n // 64)
    if m < 10 * cfg.k:
        raise ValueError(f"nystrom needs at least {10 * cfg.k} samples, "
                         f"got {m}")
    if m > n:
        raise ValueError("more samples requested than pixels")
    return m


def nystrom_embedding(features, cfg: ClusterConfig,
                      rng: np.random.Generator) -> np.ndarray:
    """Row-normalized top-k eigenvectors of the normalized affinity,
    extended to every pixel from a seeded m-point sample.  The full n x m
    affinity block is never materialized; it is streamed in chunks."""
    points = _as_points(features)
    n = len(points)
    m = _resolve_m(cfg, n)
    idx = rng.choice(n, size=m, replace=False)
    sample = points[idx]

    d_mm = pairwise_distances(sample, sample, kind=cfg.distance)
    if cfg.nystrom_sigma == "auto":
        sigma = float(np.median(d_mm[np.triu_indices(m, 1)]))
        if sigma <= 0:
            sigma = 1.0
    else:
        sigma = float(cfg.nystrom_sigma)
        if sigma <= 0:
            raise ValueError("nystrom_sigma must be positive")
    kernel_mm = np.exp(-(d_mm ** 2) / (2.0 * sigma ** 2))

    # The kernel is PSD only for the euclidean distance; for the other
    # distances the block is structurally indefinite, so inversion acts on
    # the PSD projection of its spectrum.  Eigenvalues numerically AT zero
    # (duplicate samples) are lifted by jitter instead; jitter cannot repair
    # them being there, it just separates them from the deliberate clips.
    for jitter in _JITTERS:
        eigval, eigvec = np.linalg.eigh(kernel_mm + jitter * np.eye(m))
        floor = 1e-12 * max(eigval.max(), np.finfo(float).tiny)
        if not ((eigval >= -floor) & (eigval <= floor)).any():
            break
    else:
        raise RuntimeError("sample affinity block stayed singular "
                           f"after {len(_JITTERS) - 1} jitter retries")

    pos = eigval > floor
    safe = np.where(pos, eigval, 1.0)
    a_inv = (eigvec * np.where(pos, 1.0 / safe, 0.0)) @ eigvec.T
    a_inv_sqrt = (eigvec * np.where(pos, 1.0 / np.sqrt(safe), 0.0)) @ eigvec.T

    # pass 1: column sums t_j = sum_i W_ij over every pixel i
    t = np.zeros(m)
    for lo in range(0, n, _CHUNK):
        t += _gaussian_affinity(points[lo:lo + _CHUNK], sample,
                                cfg.distance, sigma).sum(axis=0)
    s = a_inv @ t

    # pass 2: approximate degrees and the normalized Gram block
    gram = np.zeros((m, m))
    deg = np.empty(n)
    for lo in range(0, n, _CHUNK):
        c = _gaussian_affinity(points[lo:lo + _CHUNK], sample,
                               cfg.distance, sigma)
        deg[lo:lo + len(c)] = np.maximum(c @ s, 1e-12)
        c /= np.sqrt(deg[lo:lo + len(c)])[:, None]
        gram += c.T @ c

    s_mat = a_inv_sqrt @ gram @ a_inv_sqrt
    s_mat = 0.5 * (s_mat + s_mat.T)
    lam, u = np.linalg.eigh(s_mat)
    lam_k = np.maximum(lam[-cfg.k:][::-1], 1e-12)
    u_k = u[:, -cfg.k:][:, ::-1]
    extend = a_inv_sqrt @ (u_k / np.sqrt(lam_k))

    # pass 3: extend the eigenvectors to all pixels
    emb = np.empty((n, cfg.k))
    for lo in range(0, n, _CHUNK):
        c = _gaussian_affinity(points[lo:lo + _CHUNK], sample,
                               cfg.distance, sigma)
        c /= np.sqrt(deg[lo:lo + len(c)])[:, None]
        emb[lo:lo + len(c)] = c @ extend

    norms = np.linalg.norm(emb, axis=1, keepdims=True)
    emb /= np.where(norms == 0, 1.0, norms)
    if not np.isfinite(emb).all():
        raise RuntimeError("non-finite spectral embedding")
    return emb


def nystrom(features, cfg: ClusterConfig) -> Partition:
    points = _as_points(features)
    rng = np.random.default_rng(cfg.seed)
    emb = nystrom_embedding(features, cfg, rng)
    # same generator continues into the embedding-space k-means
    return _lloyd(emb, cfg.k, "euclidean", rng, cfg.max_iters,
                  _label_shape(features, points))


def cluster(features, cfg: ClusterConfig) -> Partition:
    return kmeans(features, cfg) if cfg.method == "kmeans" \
        else nystrom(features, cfg)
