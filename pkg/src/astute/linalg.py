"""Dense linear-algebra kernel shared by the rest of the package.

Matrices are 2-D float64 numpy arrays (row-major), vectors are 1-D arrays.
Every operation here is a pure function over its inputs.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np


class SingularSystemError(ValueError):
    """The normal equations are singular; the caller should pass ridge > 0."""


def as_matrix(m) -> np.ndarray:
    m = np.asarray(m, dtype=np.float64)
    if m.ndim != 2 or m.size == 0:
        raise ValueError(f"expected a nonempty 2-D matrix, got shape {m.shape}")
    if not np.all(np.isfinite(m)):
        raise ValueError("matrix entries must be finite")
    return m


def as_vector(v) -> np.ndarray:
    v = np.asarray(v, dtype=np.float64)
    if v.ndim != 1 or v.size == 0:
        raise ValueError(f"expected a nonempty 1-D vector, got shape {v.shape}")
    if not np.all(np.isfinite(v)):
        raise ValueError("vector entries must be finite")
    return v


def frobenius_norm(m) -> float:
    m = as_matrix(m)
    return float(np.sqrt(np.sum(m * m)))


@dataclass(frozen=True)
class SpectralNormEstimate:
    """Largest singular value estimate plus the power-iteration status."""

    value: float
    converged: bool
    iterations: int


def spectral_norm(m, tol: float = 1e-10, max_iter: int = 10_000) -> SpectralNormEstimate:
    """Largest singular value of ``m`` by power iteration on its Gram matrix.

    Iterates on the smaller of M'M / MM'. The start vector is the normalized
    all-ones vector; if that lands in the nullspace of a nonzero matrix the
    iteration restarts from a seeded random vector. Convergence means the
    relative change of the singular-value estimate dropped below ``tol``;
    otherwise the best estimate is returned with ``converged=False``.
    """
    m = as_matrix(m)
    if tol <= 0:
        raise ValueError("tol must be positive")
    fro = frobenius_norm(m)
    if fro == 0.0:
        return SpectralNormEstimate(0.0, True, 0)

    gram = m.T @ m if m.shape[1] <= m.shape[0] else m @ m.T
    k = gram.shape[0]
    v = np.ones(k) / np.sqrt(k)
    rng = np.random.default_rng(0)
    sigma_sq = 0.0
    for iteration in range(1, max_iter + 1):
        w = gram @ v
        norm_w = float(np.linalg.norm(w))
        if norm_w == 0.0:
            # Start vector orthogonal to the range of a nonzero matrix.
            v = rng.standard_normal(k)
            v /= np.linalg.norm(v)
            continue
        new_sigma_sq = float(v @ w)  # Rayleigh quotient of the PSD Gram matrix
        v = w / norm_w
        if new_sigma_sq > 0.0 and abs(new_sigma_sq - sigma_sq) <= tol * new_sigma_sq:
            # sigma <= ||M||_F always holds; clamp numerical overshoot.
            value = min(float(np.sqrt(new_sigma_sq)), fro)
            return SpectralNormEstimate(value, True, iteration)
        sigma_sq = new_sigma_sq
    value = min(float(np.sqrt(max(sigma_sq, 0.0))), fro)
    return SpectralNormEstimate(value, False, max_iter)


def weighted_least_squares(a, b, w, ridge: float = 0.0) -> np.ndarray:
    """Minimize sum_i w_i (a_i . beta - b_i)^2 + ridge * ||beta||^2.

    Solved through the normal equations. A singular system with ridge == 0
    raises SingularSystemError instead of returning garbage.
    """
    a = as_matrix(a)
    b = as_vector(b)
    w = as_vector(w)
    if not (a.shape[0] == b.shape[0] == w.shape[0]):
        raise ValueError(
            f"row mismatch: a has {a.shape[0]} rows, b has {b.shape[0]}, w has {w.shape[0]}"
        )
    if np.any(w < 0):
        raise ValueError("weights must be nonnegative")
    if ridge < 0:
        raise ValueError("ridge must be nonnegative")

    aw = a * w[:, None]
    gram = a.T @ aw
    if ridge > 0:
        gram = gram + ridge * np.eye(a.shape[1])
    rhs = aw.T @ b
    try:
        # PSD Gram: Cholesky succeeding certifies positive definiteness.
        np.linalg.cholesky(gram)
    except np.linalg.LinAlgError:
        raise SingularSystemError(
            "weighted normal equations are singular; pass ridge > 0"
        ) from None
    return np.linalg.solve(gram, rhs)


def pairwise_sq_dist(x) -> np.ndarray:
    """Matrix of squared Euclidean distances between the rows of ``x``.

    Computed from explicit coordinate differences (not the Gram expansion),
    so the result is exactly symmetric, exactly nonnegative and has an
    exactly zero diagonal. Work is chunked over rows to bound memory.
    """
    x = as_matrix(x)
    n, d = x.shape
    out = np.empty((n, n))
    chunk = max(1, 8_000_000 // max(1, n * d))
    for start in range(0, n, chunk):
        stop = min(start + chunk, n)
        diff = x[start:stop, None, :] - x[None, :, :]
        out[start:stop] = np.einsum("ijk,ijk->ij", diff, diff)
    return out
