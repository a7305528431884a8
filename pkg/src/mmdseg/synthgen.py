"""Procedural moving-glyph video generator for controlled experiments.

Five action classes, each a fixed (glyph, color, trajectory) triple on a
28x28 RGB canvas. Per video the class order is shuffled, one designated
class may repeat up to three times, and every segment length is drawn from
a small range, so the glyph's speed is inversely proportional to its
segment length (it always completes its full trajectory). Frames are
flattened to 2352-D rows and L2-normalized; ground-truth labels ride along.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .kernels import sphere_project
from .numerics import make_rng
from .preprocess import VideoFeatures, save_features, save_labels

__all__ = [
    "SynthConfig",
    "CANVAS",
    "N_CLASSES",
    "glyph_mask",
    "trajectory_points",
    "render_glyph",
    "generate_video",
    "generate_moving5",
    "write_dataset",
    "SPLITS",
]

CANVAS = 28
N_CLASSES = 5
GLYPH_HALF = 10           # glyph patches are 21x21: large glyphs, short travel
_LO, _HI = GLYPH_HALF, CANVAS - 1 - GLYPH_HALF
_MID = (CANVAS - 1) / 2.0

SPLITS = ("train", "val", "test")

COLORS = np.array([
    [1.00, 0.30, 0.25],
    [0.25, 1.00, 0.30],
    [0.30, 0.50, 1.00],
    [1.00, 0.85, 0.20],
    [0.90, 0.30, 1.00],
])

# (start, end) of each class trajectory as (row, col); the glyph traverses
# the full path within its segment.
TRAJECTORIES = (
    ((_LO, _MID), (_HI, _MID)),    # top-to-bottom
    ((_LO, _LO), (_HI, _HI)),      # diagonal
    ((_LO, _HI), (_HI, _LO)),      # inverse-diagonal
    ((_MID, _HI), (_MID, _LO)),    # right-to-left
    ((_MID, _LO), (_MID, _HI)),    # left-to-right
)


def _build_glyphs(half: int = GLYPH_HALF) -> np.ndarray:
    k = 2 * half + 1
    mid = half
    t = max(2, round(k / 6))          # stroke thickness
    g = np.zeros((N_CLASSES, k, k))
    # tall double bar with a base and serif
    g[0, :, mid - t // 2: mid - t // 2 + t] = 1.0
    g[0, k - t:, 2: k - 2] = 1.0
    g[0, 1: 1 + t, mid - t - 1: mid - 1] = 1.0
    # three stacked bars joined on the right
    for r0 in (0, mid - t // 2, k - t):
        g[1, r0: r0 + t, 1: k - 2] = 1.0
    g[1, :, k - 2 - t: k - 2] = 1.0
    # thick X
    for r in range(k):
        for off in range(-(t // 2), t - t // 2):
            for c in (r + off, k - 1 - r + off):
                if 0 <= c < k:
                    g[2, r, c] = 1.0
    # top bar with a thick falling diagonal
    g[3, 0:t, :] = 1.0
    for r in range(t, k):
        c = k - 1 - r
        for off in range(t + 1):
            if 0 <= c + off < k:
                g[3, r, c + off] = 1.0
    # thick hollow ring
    g[4, 0:t, 1: k - 1] = 1.0
    g[4, k - t:, 1: k - 1] = 1.0
    g[4, :, 0:t] = 1.0
    g[4, :, k - t:] = 1.0
    return g


GLYPHS = _build_glyphs()


def glyph_mask(class_id: int) -> np.ndarray:
    return GLYPHS[class_id].copy()


def trajectory_points(class_id: int, length: int) -> np.ndarray:
    """(row, col) glyph centers for a segment of ``length`` frames."""
    if length < 1:
        raise ValueError("segment length must be at least 1")
    (r0, c0), (r1, c1) = TRAJECTORIES[class_id]
    t = np.linspace(0.0, 1.0, length) if length > 1 else np.array([1.0])
    return np.stack([r0 + (r1 - r0) * t, c0 + (c1 - c0) * t], axis=1)


def render_glyph(class_id: int, position, canvas: np.ndarray | None = None) -> np.ndarray:
    """Stamp the class glyph (in its class color) centered at ``position``."""
    frame = np.zeros((CANVAS, CANVAS, 3)) if canvas is None else canvas
    r = int(np.clip(round(float(position[0])), _LO, _HI))
    c = int(np.clip(round(float(position[1])), _LO, _HI))
    mask = GLYPHS[class_id]
    patch = frame[r - GLYPH_HALF: r + GLYPH_HALF + 1, c - GLYPH_HALF: c + GLYPH_HALF + 1]
    np.maximum(patch, mask[:, :, None] * COLORS[class_id][None, None, :], out=patch)
    return frame


@dataclass(frozen=True)
class SynthConfig:
    """Generator knobs; defaults reproduce the desk-scale controlled setup."""

    n_videos: int = 50
    seg_len_range: tuple[int, int] = (5, 30)
    repeat_class: int = 1
    max_repeats: int = 3
    seed: int = 0
    noise_std: float = 0.0

    def __post_init__(self):
        if not (1 <= self.seg_len_range[0] <= self.seg_len_range[1]):
            raise ValueError("seg_len_range must satisfy 1 <= lo <= hi")
        if not (0 <= self.repeat_class < N_CLASSES):
            raise ValueError(f"repeat_class must be in 0..{N_CLASSES - 1}")
        if not (1 <= self.max_repeats):
            raise ValueError("max_repeats must be at least 1")


def _action_order(rng: np.random.Generator, cfg: SynthConfig) -> list[int]:
    """Shuffled class order with the repeat class occurring 1..max_repeats
    times; reshuffles until no two adjacent segments share a class."""
    repeats = int(rng.integers(1, cfg.max_repeats + 1))
    order = [c for c in range(N_CLASSES) if c != cfg.repeat_class] + [cfg.repeat_class] * repeats
    order = np.asarray(order)
    while True:
        perm = rng.permutation(order)
        if not np.any(perm[1:] == perm[:-1]):
            return [int(c) for c in perm]


def generate_video(rng: np.random.Generator, cfg: SynthConfig, name: str = "") -> VideoFeatures:
    lo, hi = cfg.seg_len_range
    classes = _action_order(rng, cfg)
    lengths = [int(rng.integers(lo, hi + 1)) for _ in classes]
    frames = []
    labels = []
    for class_id, length in zip(classes, lengths):
        for pos in trajectory_points(class_id, length):
            frames.append(render_glyph(class_id, pos).ravel())
            labels.append(class_id)
    flat = np.asarray(frames)
    if cfg.noise_std > 0:
        flat = np.clip(flat + rng.normal(0.0, cfg.noise_std, size=flat.shape), 0.0, 1.0)
    return VideoFeatures(
        frames=sphere_project(flat),
        labels=np.asarray(labels, dtype=np.int64),
        name=name,
    )


def generate_moving5(cfg: SynthConfig, split: str = "train") -> list[VideoFeatures]:
    """One split of videos; splits draw from disjoint substreams of the seed."""
    split_idx = SPLITS.index(split)
    return [
        generate_video(make_rng(cfg.seed, split_idx, i), cfg, name=f"{split}_{i:03d}")
        for i in range(cfg.n_videos)
    ]


def write_dataset(out_dir, cfg: SynthConfig) -> dict:
    """Write features/labels text files for all splits plus a manifest."""
    out_dir = Path(out_dir)
    manifest = {"seed": cfg.seed, "videos_per_split": cfg.n_videos, "n_classes": N_CLASSES,
                "noise_std": cfg.noise_std, "splits": {}}
    for split in SPLITS:
        split_dir = out_dir / split
        split_dir.mkdir(parents=True, exist_ok=True)
        entries = []
        for video in generate_moving5(cfg, split):
            feat = split_dir / f"{video.name}_features.txt"
            labs = split_dir / f"{video.name}_labels.txt"
            save_features(feat, video.frames)
            save_labels(labs, video.labels)
            entries.append({
                "name": video.name,
                "features": str(feat.relative_to(out_dir)),
                "labels": str(labs.relative_to(out_dir)),
                "n_frames": video.n_frames,
            })
        manifest["splits"][split] = entries
    with open(out_dir / "manifest.json", "w", encoding="utf-8") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return manifest
