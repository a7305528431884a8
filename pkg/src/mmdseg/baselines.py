"""Comparison baselines: uniform splitting, Lloyd k-means with k-means++
seeding, and kernel-space assignment of k-means centroids.
"""

from __future__ import annotations

import numpy as np

from .errors import ShapeError
from .kernels import KernelSpec
from .learner import Segmentation, kernel_argmax_labels, uniform_spans
from .numerics import pairwise_sqdist

__all__ = ["uniform_segmentation", "kmeans_centroids", "kmeans_segmentation", "kernel_kmeans_assign"]


def uniform_segmentation(n: int, m: int) -> Segmentation:
    """m contiguous near-equal spans, span j labeled j."""
    labels = np.empty(n, dtype=np.int64)
    for j, (s, e) in enumerate(uniform_spans(n, m)):
        labels[s:e] = j
    return Segmentation.from_labels(labels)


def _kmeans_pp_seed(frames: np.ndarray, m: int, rng: np.random.Generator) -> np.ndarray:
    """k-means++ seeding: spread initial centroids by squared distance."""
    n = frames.shape[0]
    chosen = [int(rng.integers(n))]
    sqd = pairwise_sqdist(frames, frames[chosen])[:, 0]
    while len(chosen) < m:
        total = sqd.sum()
        if total <= 0.0:
            # Remaining points coincide with a centroid; fill uniformly.
            remaining = np.setdiff1d(np.arange(n), chosen)
            idx = int(remaining[rng.integers(remaining.size)])
        else:
            idx = int(rng.choice(n, p=sqd / total))
        chosen.append(idx)
        sqd = np.minimum(sqd, pairwise_sqdist(frames, frames[[idx]])[:, 0])
    return frames[chosen].copy()


def kmeans_centroids(frames: np.ndarray, m: int, rng: np.random.Generator,
                     iters: int = 100) -> tuple[np.ndarray, np.ndarray]:
    """Lloyd's algorithm; returns (centroids, labels).

    Empty clusters are re-seeded to the point farthest from its assigned
    centroid. The within-cluster sum of squares is checked to be
    non-increasing at every iteration.
    """
    frames = np.asarray(frames, dtype=np.float64)
    n = frames.shape[0]
    if n < m:
        raise ValueError(f"kmeans needs at least {m} frames, got {n}")
    centroids = _kmeans_pp_seed(frames, m, rng)
    prev_obj = np.inf
    labels = None
    for _ in range(iters):
        dists = pairwise_sqdist(frames, centroids)
        new_labels = np.argmin(dists, axis=1)
        closest = dists[np.arange(n), new_labels]

        # Re-seed empty clusters before the update step.
        for j in range(m):
            if not np.any(new_labels == j):
                far = int(np.argmax(closest))
                centroids[j] = frames[far]
                new_labels[far] = j
                closest[far] = 0.0

        obj = float(closest.sum())
        if obj > prev_obj + 1e-9 * max(1.0, abs(prev_obj)):
            raise AssertionError(f"k-means objective increased: {prev_obj} -> {obj}")
        prev_obj = obj
        if labels is not None and np.array_equal(labels, new_labels):
            break
        labels = new_labels
        for j in range(m):
            centroids[j] = frames[labels == j].mean(axis=0)
    return centroids, labels


def kmeans_segmentation(frames: np.ndarray, m: int, rng: np.random.Generator,
                        iters: int = 100) -> Segmentation:
    """Frame labels from plain k-means in Euclidean space."""
    _, labels = kmeans_centroids(frames, m, rng, iters)
    return Segmentation.from_labels(labels)


def kernel_kmeans_assign(frames: np.ndarray, centers: np.ndarray, spec: KernelSpec) -> Segmentation:
    """Assign frames to k-means centroids by kernel similarity instead of L2."""
    frames = np.asarray(frames, dtype=np.float64)
    centers = np.asarray(centers, dtype=np.float64)
    if frames.ndim != 2 or centers.ndim != 2 or frames.shape[1] != centers.shape[1]:
        raise ShapeError(f"kernel_kmeans_assign: incompatible shapes {frames.shape} and {centers.shape}")
    return Segmentation.from_labels(kernel_argmax_labels(frames, centers, spec))
