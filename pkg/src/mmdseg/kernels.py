"""Closed-form kernels and their analytic gradients.

Families
--------
``gauss``             exp(-||a - b||^2 / lengthscale^2)
``nngp``              output covariance of an infinitely wide Dense->ReLU->Dense
                      network at initialization
``ntk``               tangent kernel of the same network: the infinite-width
                      limit of the summed inner products of parameter gradients
``ntk_sphere``        ``ntk`` evaluated on rows projected to the unit sphere
``gauss_ntk``         alpha * ntk * gauss (elementwise product, rescaled)
``gauss_ntk_sphere``  alpha * ntk_sphere * gauss

Closed form for the Dense->ReLU->Dense network with weight variance sw2 and
bias variance sb2, inputs of dimension d:

    K0(a, b)  = sw2 * <a, b> / d + sb2
    c         = K0(a, b) / sqrt(K0(a, a) * K0(b, b)),  clamped away from +-1
    theta     = arccos(c)
    NNGP      = sw2 * sqrt(K0(a,a) K0(b,b)) * (sin t + (pi - t) cos t)/(2 pi) + sb2
    NTK       = NNGP + K0(a, b) * sw2 * (pi - theta) / (2 pi)

The arccos clamp keeps gradients finite: whenever the raw cosine falls outside
the clamped interval, the gradient path through theta is zeroed, which is the
exact derivative of the clamped evaluation.

Gradients with respect to the second argument decompose as

    grad_b k(a, b) = U(a, b) * a + W(a, b) * b

for scalar coefficient fields U, W. ``_grad_coeffs`` returns the full
coefficient matrices so that MMD gradients reduce to matrix products.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .errors import (
    DegenerateInputError,
    DegenerateScaleError,
    KernelSpecError,
    NumericError,
    ShapeError,
)
from .numerics import make_rng, median, pairwise_sqdist

__all__ = [
    "FAMILIES",
    "PRODUCT_FAMILIES",
    "KernelSpec",
    "KernelMatrix",
    "sphere_project",
    "gauss_kernel",
    "ntk_base",
    "kernel_matrix",
    "kernel_grad_b",
    "median_lengthscale",
    "alpha_rescale",
    "resolve_spec",
]

FAMILIES = ("gauss", "nngp", "ntk", "ntk_sphere", "gauss_ntk", "gauss_ntk_sphere")
PRODUCT_FAMILIES = ("gauss_ntk", "gauss_ntk_sphere")

# Pair-sampling caps used when deriving lengthscale / rescaling from data.
MAX_SCALE_FRAMES = 2000
MAX_SCALE_PAIRS = 2_000_000


@dataclass(frozen=True)
class KernelSpec:
    """Kernel family plus fixed parameters; immutable once constructed.

    ``lengthscale`` and ``alpha`` are data-derived per video (median
    heuristics) and frozen before any training step.
    """

    family: str = "gauss_ntk"
    sigma_w_sq: float = 2.0
    sigma_b_sq: float = 0.1
    lengthscale: float = 1.0
    alpha: float = 1.0
    clamp_eps: float = 1e-7

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise KernelSpecError(f"unknown kernel family {self.family!r}; choose from {FAMILIES}")
        if self.sigma_w_sq <= 0:
            raise KernelSpecError("sigma_w_sq must be positive")
        if self.sigma_b_sq < 0:
            raise KernelSpecError("sigma_b_sq must be nonnegative")
        if self.lengthscale <= 0:
            raise KernelSpecError("lengthscale must be positive")
        if self.alpha <= 0:
            raise KernelSpecError("alpha must be positive")
        if not (0.0 < self.clamp_eps < 1e-3):
            raise KernelSpecError("clamp_eps must lie in (0, 1e-3)")


@dataclass(frozen=True)
class KernelMatrix:
    """Kernel evaluations between two row sets, with the spec snapshot."""

    values: np.ndarray
    spec: KernelSpec


def _as_2d(x) -> np.ndarray:
    x = np.asarray(x, dtype=np.float64)
    if x.ndim == 1:
        x = x[None, :]
    if x.ndim != 2 or x.shape[1] < 1:
        raise ShapeError(f"expected a nonempty 2-D array, got shape {x.shape}")
    return x


def sphere_project(x: np.ndarray) -> np.ndarray:
    """Divide each row by its Euclidean norm; rejects all-zero rows."""
    x = _as_2d(x)
    norms = np.linalg.norm(x, axis=1)
    if np.any(norms == 0.0):
        bad = int(np.flatnonzero(norms == 0.0)[0])
        raise DegenerateInputError(f"cannot sphere-project all-zero row {bad}")
    return x / norms[:, None]


def gauss_kernel(a: np.ndarray, b: np.ndarray, spec: KernelSpec) -> KernelMatrix:
    """Gaussian kernel matrix exp(-||a_i - b_j||^2 / lengthscale^2)."""
    a, b = _as_2d(a), _as_2d(b)
    if a.shape[1] != b.shape[1]:
        raise ShapeError(f"gauss_kernel: dimension mismatch {a.shape[1]} vs {b.shape[1]}")
    values = np.exp(-pairwise_sqdist(a, b) / spec.lengthscale**2)
    return KernelMatrix(values=values, spec=spec)


def _ntk_closed_form(k0_ab: np.ndarray, p: np.ndarray, spec: KernelSpec) -> dict:
    """Shared arc-cosine closed form; works elementwise on any shape."""
    c_raw = k0_ab / p
    lo, hi = -1.0 + spec.clamp_eps, 1.0 - spec.clamp_eps
    c = np.clip(c_raw, lo, hi)
    theta = np.arccos(c)
    sin_t = np.sqrt(1.0 - c * c)
    coef = spec.sigma_w_sq / (2.0 * math.pi)
    g = sin_t + (math.pi - theta) * c
    nngp = coef * p * g + spec.sigma_b_sq
    ntk_dot = coef * (math.pi - theta)
    return {
        "c_raw": c_raw, "c": c, "theta": theta, "sin_t": sin_t, "g": g,
        "nngp": nngp, "ntk_dot": ntk_dot, "ntk": nngp + k0_ab * ntk_dot,
        "inside": (c_raw > lo) & (c_raw < hi),
    }


def _ntk_terms(a: np.ndarray, b: np.ndarray, spec: KernelSpec) -> dict:
    """Closed form over all row pairs of two matrices."""
    d = a.shape[1]
    s = spec.sigma_w_sq / d
    k0_ab = s * (a @ b.T) + spec.sigma_b_sq
    k0_aa = s * np.sum(a * a, axis=1) + spec.sigma_b_sq
    k0_bb = s * np.sum(b * b, axis=1) + spec.sigma_b_sq
    p = np.sqrt(np.outer(k0_aa, k0_bb))
    if np.any(p == 0.0):
        raise DegenerateInputError(
            "NTK closed form undefined for a zero-variance input (zero row with sigma_b_sq = 0)"
        )
    terms = _ntk_closed_form(k0_ab, p, spec)
    terms.update(s=s, k0_ab=k0_ab, k0_aa=k0_aa, p=p)
    return terms


def ntk_base(a_row: np.ndarray, b_row: np.ndarray, spec: KernelSpec) -> tuple[float, float, float]:
    """Closed-form (K0, NNGP, NTK) for a single pair of vectors."""
    a, b = _as_2d(a_row), _as_2d(b_row)
    if a.shape != b.shape or a.shape[0] != 1:
        raise ShapeError(f"ntk_base expects two equal-length vectors, got {a.shape} and {b.shape}")
    t = _ntk_terms(a, b, spec)
    return float(t["k0_ab"][0, 0]), float(t["nngp"][0, 0]), float(t["ntk"][0, 0])


def _family_values(a: np.ndarray, b: np.ndarray, spec: KernelSpec) -> np.ndarray:
    if spec.family == "gauss":
        return np.exp(-pairwise_sqdist(a, b) / spec.lengthscale**2)
    if spec.family == "nngp":
        return _ntk_terms(a, b, spec)["nngp"]
    if spec.family == "ntk":
        return _ntk_terms(a, b, spec)["ntk"]
    if spec.family == "ntk_sphere":
        return _ntk_terms(sphere_project(a), sphere_project(b), spec)["ntk"]
    gauss = np.exp(-pairwise_sqdist(a, b) / spec.lengthscale**2)
    if spec.family == "gauss_ntk":
        return spec.alpha * _ntk_terms(a, b, spec)["ntk"] * gauss
    if spec.family == "gauss_ntk_sphere":
        ntk = _ntk_terms(sphere_project(a), sphere_project(b), spec)["ntk"]
        return spec.alpha * ntk * gauss
    raise KernelSpecError(f"unknown kernel family {spec.family!r}")


def kernel_matrix(a: np.ndarray, b: np.ndarray, spec: KernelSpec) -> KernelMatrix:
    """Kernel evaluations between the rows of ``a`` and the rows of ``b``."""
    a, b = _as_2d(a), _as_2d(b)
    if a.shape[1] != b.shape[1]:
        raise ShapeError(f"kernel_matrix: dimension mismatch {a.shape[1]} vs {b.shape[1]}")
    values = _family_values(a, b, spec)
    if not np.all(np.isfinite(values)):
        raise NumericError(f"kernel family {spec.family!r} produced non-finite values")
    return KernelMatrix(values=values, spec=spec)


def _ntk_grad_coeffs(a: np.ndarray, b: np.ndarray, spec: KernelSpec, want: str):
    """(U, W) with grad_b k(a_i, b_j) = U[i,j] a_i + W[i,j] b_j, raw inputs."""
    t = _ntk_terms(a, b, spec)
    s, p, k0_ab = t["s"], t["p"], t["k0_ab"]
    k0_aa = t["k0_aa"][:, None]
    coef = spec.sigma_w_sq / (2.0 * math.pi)
    gate = t["inside"].astype(np.float64)
    pi_m_t = math.pi - t["theta"]

    u_nngp = coef * pi_m_t * gate * s
    w_nngp = coef * s * k0_aa / p * (t["g"] - pi_m_t * gate * t["c_raw"])
    if want == "nngp":
        return u_nngp, w_nngp

    # d(pi - theta)/dc = 1/sin(theta); the clamp gate keeps it finite.
    dot_c = coef * gate / t["sin_t"]
    u_dot = dot_c * s / p
    w_dot = -dot_c * t["c_raw"] * s * k0_aa / (p * p)
    u_ntk = u_nngp + t["ntk_dot"] * s + k0_ab * u_dot
    w_ntk = w_nngp + k0_ab * w_dot
    return u_ntk, w_ntk


def _sphere_grad_coeffs(a: np.ndarray, b: np.ndarray, spec: KernelSpec):
    """Chain the raw-input NTK coefficients through per-row normalization."""
    na = np.linalg.norm(a, axis=1)
    nb = np.linalg.norm(b, axis=1)
    if np.any(na == 0.0) or np.any(nb == 0.0):
        raise DegenerateInputError("cannot sphere-project an all-zero row")
    ah, bh = a / na[:, None], b / nb[:, None]
    u, _ = _ntk_grad_coeffs(ah, bh, spec, want="ntk")
    cos_ab = ah @ bh.T
    # Tangential projection kills the b-hat component of the upstream gradient.
    u_raw = u / (na[:, None] * nb[None, :])
    w_raw = -u * cos_ab / (nb[None, :] ** 2)
    return u_raw, w_raw


def _grad_coeffs(a: np.ndarray, b: np.ndarray, spec: KernelSpec):
    """Coefficient matrices (U, W) of grad_b k for any family."""
    if spec.family == "gauss":
        kg = np.exp(-pairwise_sqdist(a, b) / spec.lengthscale**2)
        f = 2.0 / spec.lengthscale**2
        return f * kg, -f * kg
    if spec.family == "nngp":
        return _ntk_grad_coeffs(a, b, spec, want="nngp")
    if spec.family == "ntk":
        return _ntk_grad_coeffs(a, b, spec, want="ntk")
    if spec.family == "ntk_sphere":
        return _sphere_grad_coeffs(a, b, spec)
    if spec.family in PRODUCT_FAMILIES:
        kg = np.exp(-pairwise_sqdist(a, b) / spec.lengthscale**2)
        f = 2.0 / spec.lengthscale**2
        ug, wg = f * kg, -f * kg
        if spec.family == "gauss_ntk":
            kn = _ntk_terms(a, b, spec)["ntk"]
            un, wn = _ntk_grad_coeffs(a, b, spec, want="ntk")
        else:
            kn = _ntk_terms(sphere_project(a), sphere_project(b), spec)["ntk"]
            un, wn = _sphere_grad_coeffs(a, b, spec)
        u = spec.alpha * (kg * un + kn * ug)
        w = spec.alpha * (kg * wn + kn * wg)
        return u, w
    raise KernelSpecError(f"unknown kernel family {spec.family!r}")


def kernel_grad_b(a_row: np.ndarray, b_row: np.ndarray, spec: KernelSpec) -> np.ndarray:
    """Gradient of k(a, b) with respect to ``b`` for a single pair."""
    a, b = _as_2d(a_row), _as_2d(b_row)
    if a.shape != b.shape or a.shape[0] != 1:
        raise ShapeError(f"kernel_grad_b expects two equal-length vectors, got {a.shape} and {b.shape}")
    u, w = _grad_coeffs(a, b, spec)
    grad = u[0, 0] * a[0] + w[0, 0] * b[0]
    if not np.all(np.isfinite(grad)):
        raise NumericError("kernel gradient is non-finite")
    return grad


def _sampled_pairs(x: np.ndarray, max_pairs: int, rng, max_frames: int):
    """Distinct-pair index arrays (i, j) into a possibly subsampled ``x``."""
    n = x.shape[0]
    if n > max_frames:
        keep = np.sort(rng.choice(n, size=max_frames, replace=False))
        x = x[keep]
        n = max_frames
    n_pairs = n * (n - 1) // 2
    if n_pairs <= max_pairs:
        i, j = np.triu_indices(n, k=1)
    else:
        i = rng.integers(0, n, size=max_pairs)
        j = rng.integers(0, n, size=max_pairs)
        clash = i == j
        while np.any(clash):
            j[clash] = rng.integers(0, n, size=int(clash.sum()))
            clash = i == j
    return x, i, j


def median_lengthscale(x: np.ndarray, max_pairs: int = MAX_SCALE_PAIRS,
                       rng: np.random.Generator | None = None,
                       max_frames: int = MAX_SCALE_FRAMES) -> float:
    """Median of squared pairwise distances over distinct rows of ``x``.

    Long inputs are subsampled (seeded) to at most ``max_frames`` rows and
    ``max_pairs`` pairs before taking the median.
    """
    x = _as_2d(x)
    if x.shape[0] < 2:
        raise ValueError("median_lengthscale needs at least 2 rows")
    rng = rng if rng is not None else make_rng(0)
    x, i, j = _sampled_pairs(x, max_pairs, rng, max_frames)
    lam = median(pairwise_sqdist(x, x)[i, j])
    if lam <= 0.0:
        raise DegenerateScaleError(
            "median squared distance is zero (are most frames identical?)"
        )
    return lam


def alpha_rescale(x: np.ndarray, spec: KernelSpec, max_pairs: int = MAX_SCALE_PAIRS,
                  rng: np.random.Generator | None = None,
                  max_frames: int = MAX_SCALE_FRAMES) -> float:
    """Ratio med(gauss) / med(ntk) over sampled distinct row pairs of ``x``.

    Brings the two factors of a product kernel into the same range. Uses the
    NTK variant the product family calls for (sphere-projected or raw).
    """
    x = _as_2d(x)
    if x.shape[0] < 2:
        raise ValueError("alpha_rescale needs at least 2 rows")
    rng = rng if rng is not None else make_rng(0)
    x, i, j = _sampled_pairs(x, max_pairs, rng, max_frames)
    gauss_vals = np.exp(-pairwise_sqdist(x, x)[i, j] / spec.lengthscale**2)

    xs = sphere_project(x) if spec.family in ("ntk_sphere", "gauss_ntk_sphere") else x
    s = spec.sigma_w_sq / xs.shape[1]
    gram = xs @ xs.T
    k0_diag = s * np.diag(gram) + spec.sigma_b_sq
    k0_ab = s * gram[i, j] + spec.sigma_b_sq
    p = np.sqrt(k0_diag[i] * k0_diag[j])
    if np.any(p == 0.0):
        raise DegenerateInputError("NTK undefined for zero-variance rows")
    med_ntk = median(_ntk_closed_form(k0_ab, p, spec)["ntk"])
    if med_ntk <= 0.0:
        raise DegenerateScaleError("median NTK value is not positive; cannot rescale")
    return median(gauss_vals) / med_ntk


def resolve_spec(frames: np.ndarray, spec: KernelSpec,
                 rng: np.random.Generator | None = None,
                 max_pairs: int = MAX_SCALE_PAIRS,
                 max_frames: int = MAX_SCALE_FRAMES) -> KernelSpec:
    """Freeze the data-derived parameters of ``spec`` for one video.

    Sets the Gaussian lengthscale from the median heuristic and, for product
    families, the ntk/gauss rescaling; both are computed once, before any
    optimization, and never touched again.
    """
    rng = rng if rng is not None else make_rng(0)
    resolved = replace(spec, lengthscale=median_lengthscale(frames, max_pairs, rng, max_frames))
    if spec.family in PRODUCT_FAMILIES:
        resolved = replace(resolved, alpha=alpha_rescale(frames, resolved, max_pairs, rng, max_frames))
    return resolved
