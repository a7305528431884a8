"""Command-line entry point.

Subcommands: ``gen`` (synthetic dataset), ``segment`` (one video, learned or
baseline), ``eval`` (metrics from stored labels, or CSV aggregation), and
``randm`` (the random-segment-count protocol over a directory of videos).

Exit codes: 0 success, 2 I/O or usage problems, 3 numeric degeneracies and
data inconsistencies.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import replace
from pathlib import Path

import numpy as np

from .baselines import kernel_kmeans_assign, kmeans_centroids, kmeans_segmentation, uniform_segmentation
from .errors import (
    ConsistencyError,
    DegenerateInputError,
    DegenerateScaleError,
    EmptyEvalError,
    KernelSpecError,
    NumericError,
    ParseError,
    ShapeError,
)
from .evaluation import aggregate_rows, evaluate
from .kernels import FAMILIES, KernelSpec, resolve_spec
from .learner import PROFILES, Profile, TrainConfig, preprocess_video, segment_video
from .numerics import make_rng
from .preprocess import load_features, load_labels
from .synthgen import SynthConfig, write_dataset

CSV_COLUMNS = ["video", "mof", "iou", "f1", "boundary_accuracy"]
RANDM_COLUMNS = ["video", "m_used", "mof", "iou", "f1", "boundary_accuracy"]

# Training presets when the requested segment count is deliberately noisy.
NOISY_M_PRESETS = {
    "synthetic": {"epochs": 20, "weight_decay": 1e-4},
    "real": {"epochs": 200, "weight_decay": 1e-4},
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="mmdseg", description=__doc__.strip().splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p_gen = sub.add_parser("gen", help="generate a synthetic moving-glyph dataset")
    p_gen.add_argument("--out", required=True, help="output directory")
    p_gen.add_argument("--seed", type=int, default=0)
    p_gen.add_argument("--videos", type=int, default=50, help="videos per split")
    p_gen.add_argument("--noise", type=float, default=0.0, help="pixel noise std")

    p_seg = sub.add_parser("segment", help="segment one video")
    p_seg.add_argument("--features", required=True)
    p_seg.add_argument("--labels")
    p_seg.add_argument("--m", type=int, required=True, help="number of prototypes / spans")
    p_seg.add_argument("--kernel", choices=FAMILIES, default="gauss_ntk")
    p_seg.add_argument("--epochs", type=int, default=None)
    p_seg.add_argument("--lr", type=float, default=5e-2)
    p_seg.add_argument("--wd", type=float, default=1e-3)
    p_seg.add_argument("--smooth", type=float, default=None, help="override the profile smoothing factor")
    p_seg.add_argument("--profile", choices=sorted(PROFILES), default="synthetic")
    p_seg.add_argument("--normalize", action="store_true", help="L2-normalize frames after smoothing")
    p_seg.add_argument("--seed", type=int, default=0)
    p_seg.add_argument("--no-train", action="store_true")
    p_seg.add_argument("--baseline", choices=["uniform", "kmeans", "kernel-kmeans"])
    p_seg.add_argument("--exclude-bg", type=int, default=None)
    p_seg.add_argument("--boundary-tol", type=int, default=3)
    p_seg.add_argument("--out", required=True)

    p_eval = sub.add_parser("eval", help="evaluate a stored segmentation, or aggregate reports")
    p_eval.add_argument("--pred", help="segmentation JSON produced by `segment`")
    p_eval.add_argument("--labels", help="ground-truth label file")
    p_eval.add_argument("--exclude-bg", type=int, default=None)
    p_eval.add_argument("--boundary-tol", type=int, default=3)
    p_eval.add_argument("--aggregate", nargs="+", metavar="REPORT",
                        help="aggregate report JSONs into a CSV instead of evaluating")
    p_eval.add_argument("--out", required=True)

    p_rm = sub.add_parser("randm", help="segment a directory with per-video randomized M")
    p_rm.add_argument("--features-dir", required=True)
    p_rm.add_argument("--mbar", type=int, required=True, help="average number of actions")
    p_rm.add_argument("--mode", choices=sorted(NOISY_M_PRESETS), default="synthetic")
    p_rm.add_argument("--method", choices=["ours", "uniform"], default="ours")
    p_rm.add_argument("--kernel", choices=FAMILIES, default="gauss_ntk")
    p_rm.add_argument("--profile", choices=sorted(PROFILES), default="synthetic")
    p_rm.add_argument("--boundary-tol", type=int, default=3)
    p_rm.add_argument("--seed", type=int, default=0)
    p_rm.add_argument("--jobs", type=int, default=1)
    p_rm.add_argument("--out", required=True)
    return parser


def _write_json(path, obj) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(obj, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _write_csv(path, columns, rows) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=columns)
        writer.writeheader()
        for row in rows:
            writer.writerow(row)


def cmd_gen(args) -> int:
    cfg = SynthConfig(n_videos=args.videos, seed=args.seed, noise_std=args.noise)
    manifest = write_dataset(args.out, cfg)
    n = sum(len(v) for v in manifest["splits"].values())
    print(f"wrote {n} videos to {args.out}")
    return 0


def _segment_profile(args) -> Profile:
    profile = PROFILES[args.profile]
    if args.smooth is not None:
        profile = replace(profile, name="custom", smooth_s=args.smooth)
    if args.normalize:
        profile = replace(profile, normalize=True)
    return profile


def _default_epochs(profile_name: str) -> int:
    return 10 if profile_name == "synthetic" else 100


def cmd_segment(args) -> int:
    video = load_features(args.features, labels_path=args.labels)
    profile = _segment_profile(args)
    epochs = args.epochs if args.epochs is not None else _default_epochs(args.profile)
    train_log: list[float] = []

    if args.baseline == "uniform":
        seg = uniform_segmentation(video.n_frames, args.m)
    elif args.baseline == "kmeans":
        prepped = preprocess_video(video, args.m, profile)
        seg = kmeans_segmentation(prepped.frames, args.m, make_rng(args.seed, 10))
    elif args.baseline == "kernel-kmeans":
        prepped = preprocess_video(video, args.m, profile)
        centers, _ = kmeans_centroids(prepped.frames, args.m, make_rng(args.seed, 10))
        spec = resolve_spec(prepped.frames, KernelSpec(family=args.kernel), make_rng(args.seed, 0))
        seg = kernel_kmeans_assign(prepped.frames, centers, spec)
    else:
        cfg = TrainConfig(m=args.m, epochs=epochs, learning_rate=args.lr, weight_decay=args.wd,
                          seed=args.seed, no_train=args.no_train,
                          kernel=KernelSpec(family=args.kernel))
        approx, seg = segment_video(video, cfg, profile)
        train_log = approx.train_log

    payload = {"name": video.name, **seg.to_dict(), "train_log": train_log}
    if video.labels is not None:
        report = evaluate(seg, video.labels, exclude_gt=args.exclude_bg,
                          boundary_tol=args.boundary_tol)
        payload["report"] = report.to_dict()
    _write_json(args.out, payload)
    return 0


def cmd_eval(args) -> int:
    if args.aggregate:
        rows = []
        for path in args.aggregate:
            with open(path, "r", encoding="utf-8") as fh:
                rep = json.load(fh)
            rep = rep.get("report", rep)
            rows.append({
                "video": rep.get("video", Path(path).stem),
                "mof": rep["mof"], "iou": rep["iou"], "f1": rep["f1"],
                "boundary_accuracy": rep.get("boundary_accuracy"),
            })
        mean = aggregate_rows(rows)
        rows.append({"video": "mean", **{k: mean.get(k) for k in CSV_COLUMNS[1:]}})
        _write_csv(args.out, CSV_COLUMNS, rows)
        return 0
    if not args.pred or not args.labels:
        raise ConsistencyError("eval needs --pred and --labels (or --aggregate)")
    with open(args.pred, "r", encoding="utf-8") as fh:
        pred = json.load(fh)
    gt = load_labels(args.labels)
    report = evaluate(np.asarray(pred["frame_labels"], dtype=np.int64), gt,
                      exclude_gt=args.exclude_bg, boundary_tol=args.boundary_tol)
    _write_json(args.out, {"video": pred.get("name", Path(args.pred).stem), **report.to_dict()})
    return 0


def draw_m(mbar: int, mode: str, rng: np.random.Generator) -> int:
    """Noisy segment count: synthetic mode mbar +- d with d in 1..5, real
    mode mbar + u with u uniform in [-mbar, mbar]."""
    if mode == "synthetic":
        delta = int(rng.integers(1, 6))
        sign = 1 if rng.integers(0, 2) == 1 else -1
        return mbar + sign * delta
    return mbar + int(rng.integers(-mbar, mbar + 1))


def _randm_task(payload):
    (feat_path, labels_path, m_used, method, kernel_family, profile_name,
     mode, train_seed, boundary_tol) = payload
    video = load_features(feat_path, labels_path=labels_path)
    profile = PROFILES[profile_name]
    if method == "uniform":
        seg = uniform_segmentation(video.n_frames, m_used)
    else:
        preset = NOISY_M_PRESETS[mode]
        cfg = TrainConfig(m=m_used, epochs=preset["epochs"], weight_decay=preset["weight_decay"],
                          seed=train_seed, kernel=KernelSpec(family=kernel_family))
        _, seg = segment_video(video, cfg, profile)
    report = evaluate(seg, video.labels, boundary_tol=boundary_tol)
    return {
        "video": video.name, "m_used": m_used, "mof": report.mof, "iou": report.iou,
        "f1": report.f1, "boundary_accuracy": report.boundary_accuracy,
        "n_labels_used": int(np.unique(seg.frame_labels).size),
    }


def cmd_randm(args) -> int:
    root = Path(args.features_dir)
    feature_files = sorted(root.glob("*_features.txt"))
    if not feature_files:
        raise ConsistencyError(f"no *_features.txt files under {root}")
    tasks = []
    for idx, feat in enumerate(feature_files):
        labels = feat.with_name(feat.name.replace("_features.txt", "_labels.txt"))
        if not labels.exists():
            raise ConsistencyError(f"missing label file for {feat.name}")
        n_frames = sum(1 for line in open(feat, "r", encoding="utf-8") if line.strip())
        m_drawn = draw_m(args.mbar, args.mode, make_rng(args.seed, 50, idx))
        m_used = min(max(1, m_drawn), n_frames)
        if m_used != m_drawn:
            print(f"note: {feat.stem}: drawn M {m_drawn} clamped to {m_used}", file=sys.stderr)
        train_seed = int(np.random.SeedSequence([args.seed, 51, idx]).generate_state(1)[0])
        tasks.append((str(feat), str(labels), m_used, args.method, args.kernel,
                      args.profile, args.mode, train_seed, args.boundary_tol))

    if args.jobs > 1:
        with ProcessPoolExecutor(max_workers=args.jobs) as pool:
            rows = list(pool.map(_randm_task, tasks))
    else:
        rows = [_randm_task(t) for t in tasks]

    collapsed = sum(1 for r in rows if r["n_labels_used"] < r["m_used"])
    for row in rows:
        row.pop("n_labels_used")
    mean = aggregate_rows(rows)
    rows.append({"video": "mean", **{k: mean.get(k) for k in RANDM_COLUMNS[1:]}})
    _write_csv(args.out, RANDM_COLUMNS, rows)
    print(f"{len(tasks)} videos; {collapsed} used fewer labels than their drawn M")
    return 0


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    handlers = {"gen": cmd_gen, "segment": cmd_segment, "eval": cmd_eval, "randm": cmd_randm}
    try:
        return handlers[args.command](args)
    except ParseError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (DegenerateScaleError, DegenerateInputError, ConsistencyError, EmptyEvalError,
            NumericError, ShapeError, KernelSpecError, ValueError) as exc:
        print(f"error [{type(exc).__name__}]: {exc}", file=sys.stderr)
        return 3


def entry() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entry()
