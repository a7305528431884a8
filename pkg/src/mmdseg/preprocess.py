"""Feature-file ingestion, per-frame L2 normalization, and temporal
Gaussian smoothing.

File formats
------------
Features: UTF-8 text, one frame per line, comma- or whitespace-separated
floats. Labels: one token per line; integer tokens are used as-is, otherwise
all tokens are interned to integers in first-appearance order.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np

from .errors import ConsistencyError, DegenerateInputError, ParseError
from .kernels import sphere_project

__all__ = [
    "VideoFeatures",
    "load_features",
    "load_labels",
    "save_features",
    "save_labels",
    "l2_normalize_rows",
    "temporal_smooth",
]


@dataclass(frozen=True)
class VideoFeatures:
    """Per-frame feature rows plus optional ground-truth labels."""

    frames: np.ndarray
    labels: np.ndarray | None = None
    name: str = ""
    fps: float | None = None

    def __post_init__(self):
        if self.frames.ndim != 2 or self.frames.shape[0] < 1 or self.frames.shape[1] < 1:
            raise ConsistencyError(f"frames must be a nonempty 2-D matrix, got {self.frames.shape}")
        if self.labels is not None and len(self.labels) != self.frames.shape[0]:
            raise ConsistencyError(
                f"{self.name or 'video'}: {self.frames.shape[0]} frames but {len(self.labels)} labels"
            )

    @property
    def n_frames(self) -> int:
        return self.frames.shape[0]


def _parse_feature_line(line: str, lineno: int, path) -> list[float]:
    tokens = line.replace(",", " ").split()
    try:
        return [float(t) for t in tokens]
    except ValueError as exc:
        raise ParseError(f"{path}:{lineno}: bad feature value ({exc})") from None


def load_features(path, labels_path=None, name: str | None = None) -> VideoFeatures:
    """Read a feature file (and optionally a label file) into VideoFeatures."""
    path = Path(path)
    rows: list[list[float]] = []
    width = None
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            row = _parse_feature_line(line, lineno, path)
            if width is None:
                width = len(row)
            elif len(row) != width:
                raise ParseError(f"{path}:{lineno}: expected {width} values, got {len(row)}")
            rows.append(row)
    if not rows:
        raise ParseError(f"{path}: no feature rows found")
    frames = np.asarray(rows, dtype=np.float64)
    if not np.all(np.isfinite(frames)):
        raise ParseError(f"{path}: non-finite feature values")
    labels = load_labels(labels_path) if labels_path is not None else None
    if name is None:
        name = path.stem
        if name.endswith("_features"):
            name = name[: -len("_features")]
    return VideoFeatures(frames=frames, labels=labels, name=name)


def load_labels(path) -> np.ndarray:
    path = Path(path)
    tokens = []
    with open(path, "r", encoding="utf-8") as fh:
        for line in fh:
            tok = line.strip()
            if tok:
                tokens.append(tok)
    if not tokens:
        raise ParseError(f"{path}: no labels found")
    try:
        return np.asarray([int(t) for t in tokens], dtype=np.int64)
    except ValueError:
        interned: dict[str, int] = {}
        for t in tokens:
            interned.setdefault(t, len(interned))
        return np.asarray([interned[t] for t in tokens], dtype=np.int64)


def save_features(path, frames: np.ndarray) -> None:
    """Write frames one per line at 17 significant digits (lossless reload)."""
    frames = np.asarray(frames, dtype=np.float64)
    with open(path, "w", encoding="utf-8") as fh:
        for row in frames:
            fh.write(",".join(f"{v:.17g}" for v in row))
            fh.write("\n")


def save_labels(path, labels) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for lab in labels:
            fh.write(f"{int(lab)}\n")


def l2_normalize_rows(v: VideoFeatures) -> VideoFeatures:
    """Scale every frame to unit Euclidean norm."""
    try:
        normalized = sphere_project(v.frames)
    except DegenerateInputError as exc:
        raise DegenerateInputError(f"{v.name or 'video'}: {exc}") from None
    return replace(v, frames=normalized)


def smoothing_window(s: float, n_frames: int, m: int) -> int:
    """Window size ~ s * N / m, at least one frame."""
    if s <= 0:
        raise ValueError("smoothing factor s must be positive")
    if m < 1:
        raise ValueError("m must be at least 1")
    return max(1, round(s * n_frames / m))


def temporal_smooth(v: VideoFeatures, s: float, m: int) -> VideoFeatures:
    """Gaussian smoothing along time, one pass per feature dimension.

    The kernel spans a window of about s * N / m frames with sigma = w / 4,
    truncated at the window edge, normalized to sum 1; the sequence is
    reflect-padded so boundary frames keep full weight. Labels pass through.
    """
    w = smoothing_window(s, v.n_frames, m)
    radius = min((w - 1) // 2, v.n_frames - 1)
    if radius < 1:
        return replace(v, frames=v.frames.copy())
    sigma = w / 4.0
    offsets = np.arange(-radius, radius + 1, dtype=np.float64)
    kernel = np.exp(-(offsets**2) / (2.0 * sigma**2))
    kernel /= kernel.sum()
    padded = np.pad(v.frames, ((radius, radius), (0, 0)), mode="reflect")
    smoothed = np.empty_like(v.frames)
    for dim in range(v.frames.shape[1]):
        smoothed[:, dim] = np.convolve(padded[:, dim], kernel, mode="valid")
    return replace(v, frames=smoothed)
