"""Squared maximum mean discrepancy between two row sets, its analytic
gradient in the second set, and the shuffled batch plan used for training.

The estimator is the biased V-statistic

    mmd2(x, y) = mean(Kxx) + mean(Kyy) - 2 mean(Kxy)

which includes self-pairs and is therefore nonnegative for PSD kernels.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ShapeError
from .kernels import KernelSpec, _grad_coeffs, kernel_matrix

__all__ = ["MmdBatchPlan", "mmd2", "mmd2_grad_y", "make_batch_plan"]


def mmd2(x: np.ndarray, y: np.ndarray, spec: KernelSpec) -> float:
    """Squared MMD between the rows of ``x`` and the rows of ``y``."""
    x = np.atleast_2d(np.asarray(x, dtype=np.float64))
    y = np.atleast_2d(np.asarray(y, dtype=np.float64))
    if x.shape[1] != y.shape[1]:
        raise ShapeError(f"mmd2: dimension mismatch {x.shape[1]} vs {y.shape[1]}")
    kxx = kernel_matrix(x, x, spec).values
    kyy = kernel_matrix(y, y, spec).values
    kxy = kernel_matrix(x, y, spec).values
    return float(kxx.mean() + kyy.mean() - 2.0 * kxy.mean())


def mmd2_grad_y(x: np.ndarray, y: np.ndarray, spec: KernelSpec) -> np.ndarray:
    """Gradient of ``mmd2(x, y)`` with respect to every row of ``y``.

    Row r receives (2/m^2) sum_a grad_b k(y_a, y_r) (the self-pair counted
    once, its two symmetric contributions folded into the factor 2) minus
    (2/nm) sum_i grad_b k(x_i, y_r). Kernel gradients decompose as
    U * a + W * b, so both sums reduce to matrix products.
    """
    x = np.atleast_2d(np.asarray(x, dtype=np.float64))
    y = np.atleast_2d(np.asarray(y, dtype=np.float64))
    if x.shape[1] != y.shape[1]:
        raise ShapeError(f"mmd2_grad_y: dimension mismatch {x.shape[1]} vs {y.shape[1]}")
    n, m = x.shape[0], y.shape[0]

    u_yy, w_yy = _grad_coeffs(y, y, spec)
    u_xy, w_xy = _grad_coeffs(x, y, spec)
    grad_self = u_yy.T @ y + w_yy.sum(axis=0)[:, None] * y
    grad_cross = u_xy.T @ x + w_xy.sum(axis=0)[:, None] * y
    return (2.0 / (m * m)) * grad_self - (2.0 / (n * m)) * grad_cross


@dataclass(frozen=True)
class MmdBatchPlan:
    """One epoch of shuffled batches over ``n`` frames.

    ``batch_size`` is floor(n / m) clamped to at least 1; the final short
    batch is kept (``drop_last`` records the policy, it is never set here).
    """

    batch_size: int
    epoch_permutation: np.ndarray
    drop_last: bool = False

    def batches(self):
        n = self.epoch_permutation.size
        for lo in range(0, n, self.batch_size):
            batch = self.epoch_permutation[lo:lo + self.batch_size]
            if self.drop_last and batch.size < self.batch_size:
                return
            yield batch


def make_batch_plan(n: int, m: int, rng: np.random.Generator) -> MmdBatchPlan:
    """Fresh shuffled batch plan for one epoch: batches of size ~ n/m."""
    if n < 1 or m < 1:
        raise ValueError("make_batch_plan needs n >= 1 and m >= 1")
    return MmdBatchPlan(batch_size=max(1, n // m), epoch_permutation=rng.permutation(n))
