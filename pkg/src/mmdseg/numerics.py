"""Dense numeric substrate: seeded RNG streams, pairwise distances, medians,
a decoupled-weight-decay Adam optimizer, and a central-difference gradient
checker used as the gradient oracle throughout the test suite.

Matrices are plain float64 ``numpy.ndarray`` values; every public operation
returns finite entries or raises.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .errors import NumericError, ShapeError

__all__ = [
    "make_rng",
    "pairwise_sqdist",
    "median",
    "AdamState",
    "adam_init",
    "adam_step",
    "finite_diff_grad",
]


def make_rng(seed: int, *stream: int) -> np.random.Generator:
    """Deterministic generator for ``seed``, optionally on a named substream.

    Extra integers select independent substreams, so the learner, the batcher
    and the synthetic generator can all draw from one user-facing seed without
    interfering: ``make_rng(7, 2)`` and ``make_rng(7, 3)`` never overlap.
    """
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence([int(seed), *map(int, stream)])))


def pairwise_sqdist(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Squared Euclidean distances between all rows of ``a`` and ``b``.

    Returns D with D[i, j] = ||a_i - b_j||^2, clipped at zero so rounding
    never produces small negatives. When ``a`` and ``b`` are the same data
    the diagonal is exactly zero.
    """
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.ndim != 2 or b.ndim != 2 or a.shape[1] != b.shape[1]:
        raise ShapeError(f"pairwise_sqdist: incompatible shapes {a.shape} and {b.shape}")
    sq_a = np.sum(a * a, axis=1)[:, None]
    sq_b = np.sum(b * b, axis=1)[None, :]
    d = sq_a + sq_b - 2.0 * (a @ b.T)
    np.maximum(d, 0.0, out=d)
    if a.shape == b.shape and (a is b or np.array_equal(a, b)):
        np.fill_diagonal(d, 0.0)
    return d


def median(values) -> float:
    """Lower median: for even lengths the smaller of the two middle elements.

    Always returns an element of the input, which keeps data-derived scales
    deterministic across platforms.
    """
    v = np.asarray(values, dtype=np.float64).ravel()
    if v.size == 0:
        raise ValueError("median of an empty sequence")
    if not np.all(np.isfinite(v)):
        raise NumericError("median: input contains non-finite values")
    k = (v.size - 1) // 2
    return float(np.partition(v, k)[k])


@dataclass(frozen=True)
class AdamState:
    """Moments and hyperparameters of one Adam run; owned by a single loop."""

    first_moment: np.ndarray
    second_moment: np.ndarray
    step_count: int
    learning_rate: float
    weight_decay: float
    beta1: float = 0.9
    beta2: float = 0.999
    epsilon: float = 1e-8


def adam_init(params: np.ndarray, learning_rate: float, weight_decay: float = 0.0,
              beta1: float = 0.9, beta2: float = 0.999, epsilon: float = 1e-8) -> AdamState:
    if learning_rate <= 0:
        raise ValueError("learning_rate must be positive")
    if weight_decay < 0:
        raise ValueError("weight_decay must be nonnegative")
    shape = np.shape(params)
    return AdamState(
        first_moment=np.zeros(shape),
        second_moment=np.zeros(shape),
        step_count=0,
        learning_rate=learning_rate,
        weight_decay=weight_decay,
        beta1=beta1,
        beta2=beta2,
        epsilon=epsilon,
    )


def adam_step(params: np.ndarray, grad: np.ndarray, state: AdamState) -> tuple[np.ndarray, AdamState]:
    """One Adam update with bias correction and decoupled weight decay.

    params <- params - lr * m_hat / (sqrt(v_hat) + eps) - lr * wd * params

    Pure: returns fresh arrays and a fresh state, inputs are not mutated.
    """
    params = np.asarray(params, dtype=np.float64)
    grad = np.asarray(grad, dtype=np.float64)
    if params.shape != grad.shape or params.shape != state.first_moment.shape:
        raise ShapeError(
            f"adam_step: params {params.shape}, grad {grad.shape}, "
            f"moments {state.first_moment.shape} must agree"
        )
    t = state.step_count + 1
    m = state.beta1 * state.first_moment + (1.0 - state.beta1) * grad
    v = state.beta2 * state.second_moment + (1.0 - state.beta2) * grad * grad
    m_hat = m / (1.0 - state.beta1 ** t)
    v_hat = v / (1.0 - state.beta2 ** t)
    update = state.learning_rate * m_hat / (np.sqrt(v_hat) + state.epsilon)
    new_params = params - update - state.learning_rate * state.weight_decay * params
    if not np.all(np.isfinite(new_params)):
        raise NumericError("adam_step produced non-finite parameters")
    return new_params, replace(state, first_moment=m, second_moment=v, step_count=t)


def finite_diff_grad(f, x: np.ndarray, h: float = 1e-4) -> np.ndarray:
    """Central-difference gradient of a scalar function of a matrix.

    The universal gradient oracle: every hand-derived analytic gradient in
    this package is tested against it.
    """
    if h <= 0:
        raise ValueError("h must be positive")
    x = np.asarray(x, dtype=np.float64)
    grad = np.empty_like(x)
    it = np.nditer(x, flags=["multi_index"])
    for _ in it:
        idx = it.multi_index
        xp = x.copy()
        xm = x.copy()
        xp[idx] += h
        xm[idx] -= h
        fp = float(f(xp))
        fm = float(f(xm))
        if not (np.isfinite(fp) and np.isfinite(fm)):
            raise NumericError(f"finite_diff_grad: non-finite evaluation at index {idx}")
        grad[idx] = (fp - fm) / (2.0 * h)
    return grad
