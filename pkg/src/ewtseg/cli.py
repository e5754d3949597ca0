"""Command line front end.

Subcommands mirror the pipeline stages: `mosaic` builds a labeled
dataset, `decompose` / `transform` expose the intermediate products,
`segment` runs one image end to end, `evaluate` scores a result
against a reference map, and `bench` / `plot` drive the full grid.

Every option can also come from a flat config file of `key = value`
lines (`--config`); explicit flags win over the file, the file wins
over built-in defaults.
"""
from __future__ import annotations

import argparse
import csv
import sys
from pathlib import Path

from .bench import BenchGrid, plot_window_scores, run_benchmark
from .cartoon import decompose, default_params
from .clustering import DISTANCES, METHODS, ClusterConfig, Partition
from .ewt2d import detect_radial_boundaries, export_bands_pgm, export_partition_csv
from .features import MODES, PostProcessConfig
from .imgio import load_image, load_labels, save_image, save_labels
from .metrics import METRIC_COLUMNS, report
from .mosaic import MASK_LAYOUTS, generate_dataset
from .pipeline import RunConfig, StageError
from .pipeline import segment as run_segment
from .pipeline import transform as run_transform

_TRUE = ("1", "true", "yes", "on")
_FALSE = ("0", "false", "no", "off")


def _read_config(path: str) -> dict:
    """Flat `key = value` lines; `#` starts a comment."""
    out = {}
    for ln, raw in enumerate(Path(path).read_text().splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, val = (s.strip() for s in line.partition("="))
        if not sep or not key or not val:
            raise ValueError(f"{path}:{ln}: expected key = value, got {raw!r}")
        out[key] = val
    return out


def _coerce(key: str, val: str, kind: str):
    try:
        if kind == "int":
            return int(val)
        if kind == "bool":
            low = val.lower()
            if low in _TRUE:
                return True
            if low in _FALSE:
                return False
            raise ValueError(val)
        if kind == "ints":
            return tuple(int(v) for v in val.split(","))
        if kind == "strs":
            return tuple(v.strip() for v in val.split(","))
        return val
    except ValueError:
        raise ValueError(f"config key {key!r}: cannot read {val!r} as {kind}") \
            from None


class _Options:
    """CLI flag > config file > caller default, config values typed."""

    def __init__(self, args, keys: dict):
        self.cfg = _read_config(args.config) if getattr(args, "config", None) \
            else {}
        unknown = sorted(set(self.cfg) - set(keys))
        if unknown:
            raise ValueError(f"unknown config key(s): {', '.join(unknown)}")
        self.args = args
        self.keys = keys

    def get(self, name: str, default):
        given = getattr(self.args, name, None)
        if given is not None:
            return given
        if name in self.cfg:
            return _coerce(name, self.cfg[name], self.keys[name])
        return default


def _csv_strs(text: str) -> tuple:
    return tuple(part.strip() for part in text.split(","))


def _csv_ints(text: str) -> tuple:
    return tuple(int(part) for part in text.split(","))


def _decompose_first(opts: _Options, args) -> bool:
    # --no-decompose always wins; otherwise the config may turn it off
    if getattr(args, "no_decompose", None):
        return False
    return bool(opts.get("decompose", True))


def _cmd_mosaic(args) -> int:
    opts = _Options(args, {"count": "int", "size": "int", "layouts": "strs",
                           "seed": "int", "pool_size": "int"})
    count = opts.get("count", 20)
    layouts = opts.get("layouts", None)
    generate_dataset(args.out, count,
                     size=opts.get("size", 512),
                     layouts=tuple(layouts) if layouts else None,
                     seed=opts.get("seed", 0),
                     pool_size=opts.get("pool_size", 13))
    print(f"wrote {count} mosaics to {args.out}")
    return 0


def _cmd_decompose(args) -> int:
    img = load_image(args.image)
    cfg = default_params(img, detect_radial_boundaries(img))
    res = decompose(img, cfg)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    save_image(res.cartoon, str(out / "u.pgm"))
    # v is zero mean, so remap affinely for an 8 bit file and log the map
    lo = float(res.texture.min())
    hi = float(res.texture.max())
    span = hi - lo if hi > lo else 1.0
    save_image((res.texture - lo) / span, str(out / "v.pgm"))
    (out / "decompose.txt").write_text(
        f"iterations: {res.iterations_used}\n"
        f"residual: {res.residual_norm:.6e}\n"
        f"mu: {cfg.mu:.6f}\n"
        f"lam: {cfg.lam:.6f}\n"
        f"v remap: lo {lo:.6f} hi {hi:.6f}\n")
    print(f"u.pgm and v.pgm written to {out} "
          f"({res.iterations_used} iterations)")
    return 0


def _cmd_transform(args) -> int:
    opts = _Options(args, {"wavelet": "str"})
    img = load_image(args.image)
    stack = run_transform(img, opts.get("wavelet", "EWTC1"))
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    paths = export_bands_pgm(stack, str(out))
    if stack.bank is not None:
        export_partition_csv(stack.bank, str(out / "partition.csv"))
    print(f"{len(paths)} bands written to {out}")
    return 0


def _cmd_segment(args) -> int:
    opts = _Options(args, {"wavelet": "str", "post": "str", "window": "int",
                           "cluster": "str", "distance": "str", "k": "int",
                           "seed": "int", "decompose": "bool"})
    img = load_image(args.image)
    k = opts.get("k", 2)
    run = RunConfig(
        k=k,
        wavelet=opts.get("wavelet", "EWTC1"),
        post=PostProcessConfig(mode=opts.get("post", "energy"),
                               window=opts.get("window", None)),
        cluster=ClusterConfig(k=k,
                              method=opts.get("cluster", "kmeans"),
                              distance=opts.get("distance", "cityblock"),
                              seed=opts.get("seed", 0)),
        decompose_first=_decompose_first(opts, args),
    )
    part = run_segment(img, run)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    save_labels(part.labels, str(out / "labels.pgm"))
    print(f"{int(part.labels.max()) + 1} regions -> {out / 'labels.pgm'}")
    return 0


def _wrap_labels(path: str) -> "Partition":
    lab = load_labels(path)
    return Partition.from_labels(lab, int(lab.max()) + 1)


def _cmd_evaluate(args) -> int:
    rep = report(_wrap_labels(args.segmentation),
                 _wrap_labels(args.reference))
    writer = csv.writer(sys.stdout)
    writer.writerow(METRIC_COLUMNS)
    writer.writerow([f"{v:.3f}" for v in rep.as_row()])
    return 0


def _cmd_bench(args) -> int:
    opts = _Options(args, {"wavelets": "strs", "posts": "strs",
                           "windows": "ints", "methods": "strs",
                           "distances": "strs", "seed": "int",
                           "threads": "int", "decompose": "bool"})
    grid = BenchGrid(wavelets=tuple(opts.get("wavelets", ("EWTC1",))),
                     posts=tuple(opts.get("posts", ("energy",))),
                     windows=tuple(opts.get("windows", (19,))),
                     methods=tuple(opts.get("methods", ("kmeans",))),
                     distances=tuple(opts.get("distances", ("cityblock",))))
    res = run_benchmark(args.dataset, grid, args.out,
                        seed=opts.get("seed", 0),
                        threads=opts.get("threads", 1),
                        decompose_first=_decompose_first(opts, args))
    print(f"{len(res.cells)} cells x {len(res.images)} images -> {args.out}")
    return 0


def _cmd_plot(args) -> int:
    plot_window_scores(args.results, args.out)
    print(f"wrote {args.out}")
    return 0


def _build_parser() -> argparse.ArgumentParser:
    top = argparse.ArgumentParser(
        prog="ewtseg",
        description="unsupervised texture segmentation with adaptive "
                    "wavelet features")
    sub = top.add_subparsers(dest="command", required=True)

    p = sub.add_parser("mosaic", help="generate a labeled mosaic dataset")
    p.add_argument("--out", required=True, help="dataset directory to create")
    p.add_argument("--config", help="key = value option file")
    p.add_argument("--count", type=int, help="number of images")
    p.add_argument("--size", type=int, help="image side in pixels")
    p.add_argument("--layouts", type=_csv_strs,
                   help="comma separated subset of: "
                        + ", ".join(sorted(MASK_LAYOUTS)))
    p.add_argument("--seed", type=int)
    p.add_argument("--pool-size", type=int, dest="pool_size",
                   help="textures to synthesize")
    p.set_defaults(func=_cmd_mosaic)

    p = sub.add_parser("decompose",
                       help="split an image into cartoon and texture parts")
    p.add_argument("image")
    p.add_argument("--out", default=".", help="output directory")
    p.set_defaults(func=_cmd_decompose)

    p = sub.add_parser("transform",
                       help="write the filter bank responses of an image")
    p.add_argument("image")
    p.add_argument("--config", help="key = value option file")
    p.add_argument("--wavelet", help="family id, see the README table")
    p.add_argument("--out", default=".", help="output directory")
    p.set_defaults(func=_cmd_transform)

    p = sub.add_parser("segment", help="segment one image end to end")
    p.add_argument("image")
    p.add_argument("--config", help="key = value option file")
    p.add_argument("--wavelet")
    p.add_argument("--post", choices=MODES)
    p.add_argument("--window", type=int)
    p.add_argument("--cluster", choices=METHODS)
    p.add_argument("--distance", choices=DISTANCES)
    p.add_argument("--k", type=int, help="number of regions")
    p.add_argument("--seed", type=int)
    p.add_argument("--no-decompose", action="store_true", default=None,
                   help="feed the raw image to the filter bank")
    p.add_argument("--out", default=".", help="output directory")
    p.set_defaults(func=_cmd_segment)

    p = sub.add_parser("evaluate",
                       help="score a label map against a reference")
    p.add_argument("segmentation")
    p.add_argument("reference")
    p.set_defaults(func=_cmd_evaluate)

    p = sub.add_parser("bench", help="run an option grid over a dataset")
    p.add_argument("dataset")
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--config", help="key = value option file")
    p.add_argument("--wavelets", type=_csv_strs, help="comma separated ids")
    p.add_argument("--posts", type=_csv_strs)
    p.add_argument("--windows", type=_csv_ints)
    p.add_argument("--methods", type=_csv_strs)
    p.add_argument("--distances", type=_csv_strs)
    p.add_argument("--seed", type=int)
    p.add_argument("--threads", type=int)
    p.add_argument("--no-decompose", action="store_true", default=None)
    p.set_defaults(func=_cmd_bench)

    p = sub.add_parser("plot", help="score-vs-window curves from a bench run")
    p.add_argument("results", help="results.csv from a bench run")
    p.add_argument("--out", default="curves.svg")
    p.set_defaults(func=_cmd_plot)

    return top


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ValueError, OSError, StageError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
