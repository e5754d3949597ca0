"""Option-grid benchmark sweeps over a mosaic dataset.

Every (wavelet, post, window, method, distance) cell is scored on every
dataset image; per-cell mean(std) tables, the full per-image score
records, and an optional score-vs-window plot are written out.  Scores
land in CSVs whose bytes depend only on the dataset and the master
seed: each run draws its seed from (master, cell, image), results are
gathered by index rather than completion order, and wall-clock timings
stay out of the CSVs, living in the plain-text manifest instead.
"""

from __future__ import annotations

import csv
import itertools
import os
import platform
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
import scipy

from .clustering import ClusterConfig, Partition
from .features import PostProcessConfig
from .imgio import load_image, load_labels
from .metrics import METRIC_COLUMNS, MetricReport
from .mosaic import load_dataset
from .pipeline import WAVELET_FAMILIES, RunConfig, run_pipeline

_SVG_COLORS = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e",
               "#8c564b", "#17becf", "#7f7f7f")


@dataclass
class BenchGrid:
    """Option lists whose cartesian product forms the benchmark cells."""

    wavelets: tuple = ("EWTC1",)
    posts: tuple = ("energy",)
    windows: tuple = (19,)
    methods: tuple = ("kmeans",)
    distances: tuple = ("cityblock",)

    def __post_init__(self):
        for axis in ("wavelets", "posts", "windows", "methods", "distances"):
            values = tuple(getattr(self, axis))
            if not values:
                raise ValueError(f"{axis} must not be empty")
            setattr(self, axis, values)
        for wav in self.wavelets:
            if wav not in WAVELET_FAMILIES:
                raise ValueError(f"unknown wavelet family {wav!r}")
        for post in self.posts:
            for window in self.windows:
                PostProcessConfig(mode=post, window=window)
        for method in self.methods:
            for dist in self.distances:
                ClusterConfig(k=2, method=method, distance=dist)

    def cells(self) -> list[tuple]:
        return list(itertools.product(self.wavelets, self.posts,
                                      self.windows, self.methods,
                                      self.distances))


@dataclass
class CellResult:
    """Scores of one option combination across the whole dataset."""

    wavelet: str
    post: str
    window: int
    method: str
    distance: str
    reports: list[MetricReport]
    mean: float
    std: float
    seconds: float

    def __post_init__(self):
        if self.std < 0:
            raise ValueError("negative standard deviation")


@dataclass
class BenchResult:
    grid: BenchGrid
    images: list[str]
    cells: list[CellResult]

    def __post_init__(self):
        if len(self.cells) != len(self.grid.cells()):
            raise ValueError("one result per grid cell required")


def _cell_seed(master: int, cell: int, image: int) -> int:
    return int(np.random.SeedSequence(
        [master, cell, image]).generate_state(1)[0])


def _option_label(grid: BenchGrid, cell: tuple) -> str:
    """Column name for a cell: its non-wavelet coordinates, skipping
    axes the grid does not sweep."""
    parts = []
    for axis, value in (("posts", cell[1]), ("windows", cell[2]),
                        ("methods", cell[3]), ("distances", cell[4])):
        if len(getattr(grid, axis)) > 1:
            prefix = "w" if axis == "windows" else ""
            parts.append(f"{prefix}{value}")
    return "/".join(parts) if parts else "score"


def _run_one(pair, cell, seed, decompose_first):
    img = load_image(pair[0])
    labels = load_labels(pair[1])
    gt = Partition.from_labels(labels, int(labels.max()) + 1)
    wavelet, post, window, method, dist = cell
    cfg = RunConfig(k=gt.k, wavelet=wavelet,
                    post=PostProcessConfig(mode=post, window=window),
                    cluster=ClusterConfig(k=gt.k, method=method,
                                          distance=dist, seed=seed),
                    decompose_first=decompose_first)
    start = time.perf_counter()
    _, rep = run_pipeline(img, gt, cfg)
    return rep, time.perf_counter() - start


def run_benchmark(dataset_dir: str, grid: BenchGrid, out_dir: str,
                  seed: int = 0, threads: int = 1,
                  decompose_first: bool = True) -> BenchResult:
    """Score every grid cell on every dataset image and write the
    tables.  Thread count affects wall time only, never the CSV bytes."""
    pairs = load_dataset(dataset_dir)
    cells = grid.cells()
    os.makedirs(out_dir, exist_ok=True)
    if threads < 1:
        raise ValueError("threads must be positive")

    jobs = [(ci, ii) for ci in range(len(cells))
            for ii in range(len(pairs))]
    reports = {}
    timings = {}
    started = time.perf_counter()

    def work(job):
        ci, ii = job
        return _run_one(pairs[ii], cells[ci],
                        _cell_seed(seed, ci, ii), decompose_first)

    if threads == 1:
        outcomes = [work(job) for job in jobs]
    else:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            outcomes = list(pool.map(work, jobs))
    # keyed by index, so completion order cannot reorder anything
    for job, (rep, dt) in zip(jobs, outcomes):
        reports[job] = rep
        timings[job] = dt
    wall = time.perf_counter() - started

    cell_results = []
    for ci, cell in enumerate(cells):
        cell_reports = [reports[(ci, ii)] for ii in range(len(pairs))]
        means = np.array([r.mean for r in cell_reports])
        cell_results.append(CellResult(
            *cell, reports=cell_reports,
            mean=float(means.mean()), std=float(means.std()),
            seconds=float(np.mean([timings[(ci, ii)]
                                   for ii in range(len(pairs))]))))
    result = BenchResult(grid=grid, images=[p[0] for p in pairs],
                         cells=cell_results)

    write_results_csv(result, os.path.join(out_dir, "results.csv"))
    write_summary_csv(result, os.path.join(out_dir, "summary.csv"))
    _write_manifest(result, dataset_dir, seed, threads, wall,
                    os.path.join(out_dir, "manifest.txt"))
    return result


def write_results_csv(result: BenchResult, path: str) -> None:
    """Long-format record: one row per (cell, image) with all scores."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(("wavelet", "post", "window", "method", "distance",
                         "image") + METRIC_COLUMNS)
        for ci, cell in enumerate(result.cells):
            head = (cell.wavelet, cell.post, cell.window, cell.method,
                    cell.distance)
            for ii, rep in enumerate(cell.reports):
                name = os.path.basename(result.images[ii])
                writer.writerow(head + (name,)
                                + tuple(f"{v:.6f}" for v in rep.as_row()))


def write_summary_csv(result: BenchResult, path: str) -> None:
    """Wide table: rows = wavelet, columns = swept options, cells
    formatted mean(std) to two decimals."""
    grid = result.grid
    labels = []
    table = {}
    for cell_res, cell in zip(result.cells, grid.cells()):
        label = _option_label(grid, cell)
        if label not in labels:
            labels.append(label)
        table[(cell_res.wavelet, label)] = \
            f"{cell_res.mean:.2f}({cell_res.std:.2f})"
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(("wavelet",) + tuple(labels))
        for wavelet in grid.wavelets:
            writer.writerow((wavelet,) + tuple(table[(wavelet, lab)]
                                               for lab in labels))


def _write_manifest(result: BenchResult, dataset_dir: str, seed: int,
                    threads: int, wall: float, path: str) -> None:
    from . import __version__
    grid = result.grid
    lines = [
        f"tool: ewtseg {__version__}",
        f"python: {platform.python_version()} ({sys.platform})",
        f"numpy: {np.__version__}, scipy: {scipy.__version__}",
        f"dataset: {dataset_dir} ({len(result.images)} images)",
        f"master seed: {seed}",
        f"threads: {threads}",
        f"grid: wavelets={list(grid.wavelets)} posts={list(grid.posts)} "
        f"windows={list(grid.windows)} methods={list(grid.methods)} "
        f"distances={list(grid.distances)}",
        "note: built-in mask layouts are synthetic approximations, not "
        "traced from any published benchmark geometry",
        "timing (mean seconds per image, wall clock):",
    ]
    for cell_res, cell in zip(result.cells, grid.cells()):
        label = _option_label(grid, cell)
        lines.append(f"  {cell_res.wavelet} {label}: {cell_res.seconds:.3f}")
    lines.append(f"total wall time: {wall:.3f} s")
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


def _read_results(path: str) -> list[dict]:
    with open(path, newline="") as fh:
        rows = list(csv.DictReader(fh))
    if not rows:
        raise ValueError(f"{path}: empty results file")
    return rows


def plot_window_scores(results_csv: str, out_svg: str) -> None:
    """Score-vs-window curves, one per wavelet, from a results CSV."""
    rows = _read_results(results_csv)
    series = {}
    for row in rows:
        key = (row["wavelet"], int(row["window"]))
        series.setdefault(key, []).append(float(row["mean"]))
    wavelets = sorted({w for w, _ in series})
    windows = sorted({win for _, win in series})
    if len(windows) < 2:
        raise ValueError("need at least two window sizes to plot a curve")
    curves = {w: [float(np.mean(series[(w, win)])) for win in windows]
              for w in wavelets}
    _render_svg(curves, windows, out_svg)


def _render_svg(curves: dict, windows: list, out_svg: str) -> None:
    width, height = 640, 420
    box = (60, 20, width - 180, height - 50)  # left, top, right, bottom
    lo = min(min(v) for v in curves.values())
    hi = max(max(v) for v in curves.values())
    pad = max(1.0, 0.05 * (hi - lo))
    lo, hi = max(0.0, lo - pad), min(100.0, hi + pad)

    def sx(w):
        return box[0] + (w - windows[0]) / (windows[-1] - windows[0]) \
            * (box[2] - box[0])

    def sy(v):
        return box[3] - (v - lo) / (hi - lo) * (box[3] - box[1])

    parts = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" '
             f'height="{height}" viewBox="0 0 {width} {height}">',
             f'<rect width="{width}" height="{height}" fill="white"/>',
             f'<line x1="{box[0]}" y1="{box[3]}" x2="{box[2]}" '
             f'y2="{box[3]}" stroke="black"/>',
             f'<line x1="{box[0]}" y1="{box[1]}" x2="{box[0]}" '
             f'y2="{box[3]}" stroke="black"/>']
    for win in windows:
        x = sx(win)
        parts.append(f'<line x1="{x:.1f}" y1="{box[3]}" x2="{x:.1f}" '
                     f'y2="{box[3] + 4}" stroke="black"/>')
        parts.append(f'<text x="{x:.1f}" y="{box[3] + 18}" font-size="11" '
                     f'text-anchor="middle">{win}</text>')
    for frac in (0.0, 0.25, 0.5, 0.75, 1.0):
        val = lo + frac * (hi - lo)
        y = sy(val)
        parts.append(f'<line x1="{box[0] - 4}" y1="{y:.1f}" x2="{box[0]}" '
                     f'y2="{y:.1f}" stroke="black"/>')
        parts.append(f'<text x="{box[0] - 8}" y="{y + 4:.1f}" font-size="11" '
                     f'text-anchor="end">{val:.1f}</text>')
    parts.append(f'<text x="{(box[0] + box[2]) / 2:.0f}" y="{height - 8}" '
                 f'font-size="12" text-anchor="middle">window size</text>')
    for i, (wavelet, values) in enumerate(sorted(curves.items())):
        color = _SVG_COLORS[i % len(_SVG_COLORS)]
        points = " ".join(f"{sx(w):.1f},{sy(v):.1f}"
                          for w, v in zip(windows, values))
        parts.append(f'<polyline points="{points}" fill="none" '
                     f'stroke="{color}" stroke-width="1.5"/>')
        ly = box[1] + 14 + 16 * i
        parts.append(f'<line x1="{box[2] + 10}" y1="{ly - 4}" '
                     f'x2="{box[2] + 30}" y2="{ly - 4}" stroke="{color}" '
                     f'stroke-width="1.5"/>')
        parts.append(f'<text x="{box[2] + 36}" y="{ly}" font-size="11">'
                     f'{wavelet}</text>')
    parts.append("</svg>")
    with open(out_svg, "w") as fh:
        fh.write("\n".join(parts) + "\n")
