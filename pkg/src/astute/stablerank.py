"""Stable rank and Lipschitz bounds from embedding distance matrices.

Stable rank here is the norm ratio ||M||_F / ||M||_2. The Lipschitz lower
bound comes from the squared-distance matrices of inputs (Y) and embeddings
(D): (||D||_F^2 / ||Y||_F^2)^(1/4). The upper bound is the product of layer
spectral norms. A candidate closed-form expansion of ||D||_F^2 is evaluated
as a diagnostic; the direct computation is the production value and
the discrepancy between the two is reported, never asserted away.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .datasets import Dataset
from .linalg import as_matrix, frobenius_norm, pairwise_sq_dist, spectral_norm
from .nn import Mlp, activation_lipschitz, layer_embedding


class InconsistentDistancePathsError(RuntimeError):
    """Direct and Gram-identity distance computations disagreed."""


@dataclass(frozen=True)
class StableRankReport:
    """Norm-ratio stable rank with its components."""

    value: float
    matrix_shape: tuple[int, int]
    frobenius: float
    spectral: float
    converged: bool


@dataclass(frozen=True)
class LipschitzBounds:
    """Lower/upper Lipschitz bounds for one embedding layer of a model."""

    lower: float
    upper: float
    layer: int
    converged: bool


@dataclass(frozen=True)
class ClosedFormDiagnostic:
    """Direct ||D||_F^2 vs the candidate closed-form expansion."""

    direct: float
    closed_form: float
    relative_discrepancy: float


def stable_rank(m) -> StableRankReport:
    """||M||_F / ||M||_2; undefined (error) for the zero matrix."""
    m = as_matrix(m)
    fro = frobenius_norm(m)
    if fro == 0.0:
        raise ValueError("stable rank of the zero matrix is undefined")
    spec = spectral_norm(m)
    return StableRankReport(
        value=fro / spec.value,
        matrix_shape=(m.shape[0], m.shape[1]),
        frobenius=fro,
        spectral=spec.value,
        converged=spec.converged,
    )


def _gram_identity_sq_dist(embeddings: np.ndarray) -> np.ndarray:
    gram = embeddings @ embeddings.T
    diag = np.diag(gram)
    return diag[:, None] + diag[None, :] - 2.0 * gram


def distance_matrices(inputs, embeddings) -> tuple[np.ndarray, np.ndarray]:
    """Squared-distance matrices (Y from inputs, D from embeddings).

    D is computed directly from coordinate differences and cross-checked
    against the Gram-matrix identity; the two paths must agree within 1e-8
    relative to the matrix scale.
    """
    inputs = as_matrix(inputs)
    embeddings = as_matrix(embeddings)
    if inputs.shape[0] != embeddings.shape[0]:
        raise ValueError("inputs and embeddings must have the same number of rows")
    if inputs.shape[0] < 2:
        raise ValueError("need at least 2 points")
    y = pairwise_sq_dist(inputs)
    d = pairwise_sq_dist(embeddings)
    gram_d = _gram_identity_sq_dist(embeddings)
    scale = max(1.0, float(np.max(d)))
    if float(np.max(np.abs(d - gram_d))) > 1e-8 * scale:
        raise InconsistentDistancePathsError(
            "direct and Gram-identity distance paths disagree beyond 1e-8"
        )
    return y, d


def lipschitz_lower_bound(y, d) -> float:
    """(||D||_F^2 / ||Y||_F^2)^(1/4); requires at least two distinct points."""
    y = as_matrix(y)
    d = as_matrix(d)
    y_norm_sq = float(np.sum(y * y))
    if y_norm_sq == 0.0:
        raise ValueError("all input points are identical; Y is zero")
    d_norm_sq = float(np.sum(d * d))
    return (d_norm_sq / y_norm_sq) ** 0.25


def max_pair_ratio(y, d) -> float:
    """max over pairs of sqrt(D_ij / Y_ij); the empirical Lipschitz quotient."""
    y = as_matrix(y)
    d = as_matrix(d)
    mask = y > 0
    if not np.any(mask):
        raise ValueError("all input points are identical; Y is zero")
    return float(np.sqrt(np.max(d[mask] / y[mask])))


def closed_form_D_frobenius(embeddings) -> ClosedFormDiagnostic:
    """Evaluate the candidate closed form of ||D||_F^2 next to ground truth.

    The closed form is 4(n-2) sum_i G_ii^2 - 8 tr(J G diag(G)) + 2 ||X||_F^4
    with G the embedding Gram matrix and J the all-ones-off-diagonal matrix.
    Its discrepancy against the direct computation is returned, not asserted:
    the expansion does not hold exactly (see the diagnostic's consumers).
    """
    embeddings = as_matrix(embeddings)
    n = embeddings.shape[0]
    if n < 3:
        raise ValueError("need at least 3 points")
    d = pairwise_sq_dist(embeddings)
    direct = float(np.sum(d * d))

    gram = embeddings @ embeddings.T
    diag_vec = np.diag(gram)
    diag_mat = np.diag(diag_vec)
    j = np.ones((n, n)) - np.eye(n)
    term1 = 4.0 * (n - 2) * float(np.sum(diag_vec**2))
    term2 = -8.0 * float(np.trace(j @ gram @ diag_mat))
    term3 = 2.0 * frobenius_norm(embeddings) ** 4
    closed = term1 + term2 + term3

    denom = max(abs(direct), np.finfo(float).tiny)
    return ClosedFormDiagnostic(
        direct=direct,
        closed_form=closed,
        relative_discrepancy=abs(closed - direct) / denom,
    )


@dataclass(frozen=True)
class LayerSweepEntry:
    layer: int
    stable_rank: StableRankReport
    bounds: LipschitzBounds
    closed_form: ClosedFormDiagnostic


def lipschitz_upper_bound_detailed(m: Mlp) -> tuple[float, bool]:
    """Product of layer spectral norms with an aggregate convergence flag."""
    bound = 1.0
    converged = True
    for w in m.weights:
        est = spectral_norm(w)
        bound *= est.value
        converged = converged and est.converged
    factor = activation_lipschitz(m.activation, m.activation_param)
    return bound * factor ** (m.depth - 1), converged


def stable_rank_sweep(model: Mlp, ds: Dataset, layers) -> list[LayerSweepEntry]:
    """Per-layer stable rank and Lipschitz bounds against the inputs."""
    upper, upper_converged = lipschitz_upper_bound_detailed(model)
    entries = []
    for layer in layers:
        emb = layer_embedding(model, ds, int(layer))
        rank = stable_rank(emb)
        y, d = distance_matrices(ds.X, emb)
        bounds = LipschitzBounds(
            lower=lipschitz_lower_bound(y, d),
            upper=upper,
            layer=int(layer),
            converged=rank.converged and upper_converged,
        )
        entries.append(
            LayerSweepEntry(
                layer=int(layer),
                stable_rank=rank,
                bounds=bounds,
                closed_form=closed_form_D_frobenius(emb),
            )
        )
    return entries
