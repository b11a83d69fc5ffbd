"""Post hoc explainers: Integrated Gradients, SmoothGrad, LIME, KernelSHAP.

All four operate on the post-softmax probability of a target class (the
model's predicted class at the explained point unless overridden) and are
deterministic under fixed seeds.
"""
from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations
from math import comb

import numpy as np

from .datasets import Dataset, median_pairwise_distance
from .linalg import weighted_least_squares
from .nn import Mlp, forward, forward_batch, input_gradient, input_gradient_batch


@dataclass(frozen=True)
class NeighborhoodConfig:
    """Sampling neighborhood for SmoothGrad and LIME.

    ``sd`` scales the Gaussian perturbations, ``kernel_sigma`` is the sigma
    of the proximity kernel exp(-||x - y||^2 / sigma^2).
    """

    num_samples: int = 50
    sd: float = 0.1
    kernel_sigma: float = 1.0
    seed: int = 0

    def __post_init__(self):
        if self.num_samples < 2:
            raise ValueError("num_samples must be >= 2")
        if self.sd < 0:
            raise ValueError("sd must be nonnegative")
        if self.kernel_sigma <= 0:
            raise ValueError("kernel_sigma must be positive")


@dataclass(frozen=True)
class Explanation:
    """Attribution vector for one input, with provenance."""

    attributions: np.ndarray
    explainer: str
    target_class: int
    config_snapshot: dict

    def __post_init__(self):
        attr = np.asarray(self.attributions, dtype=np.float64)
        if attr.ndim != 1 or not np.all(np.isfinite(attr)):
            raise ValueError("attributions must be a finite 1-D vector")
        attr.setflags(write=False)
        object.__setattr__(self, "attributions", attr)


def _resolve_target(m: Mlp, x: np.ndarray, target: int | None) -> int:
    if target is None:
        return int(np.argmax(forward(m, x)))
    if not 0 <= target < m.output_dim:
        raise ValueError(f"target must be in [0, {m.output_dim})")
    return int(target)


def integrated_gradients(
    m: Mlp,
    x,
    baseline=None,
    steps: int = 64,
    target: int | None = None,
) -> Explanation:
    """(x - baseline) times the midpoint-rule average gradient along the path.

    The path is the straight line from ``baseline`` (zero vector by default)
    to ``x``, split into ``steps`` midpoint intervals.
    """
    x = np.asarray(x, dtype=np.float64)
    baseline = np.zeros_like(x) if baseline is None else np.asarray(baseline, float)
    if baseline.shape != x.shape:
        raise ValueError("baseline and x must have the same shape")
    if steps < 1:
        raise ValueError("steps must be >= 1")
    target = _resolve_target(m, x, target)
    alphas = (np.arange(steps) + 0.5) / steps
    path = baseline[None, :] + alphas[:, None] * (x - baseline)[None, :]
    grads = input_gradient_batch(m, path, target)
    attr = (x - baseline) * grads.mean(axis=0)
    return Explanation(
        attr, "ig", target, {"steps": steps, "baseline": baseline.tolist()}
    )


def smoothgrad(
    m: Mlp, x, cfg: NeighborhoodConfig, target: int | None = None
) -> Explanation:
    """Mean input gradient over a Gaussian neighborhood of ``x``.

    ``sd == 0`` degenerates to the plain input gradient at ``x`` exactly.
    """
    x = np.asarray(x, dtype=np.float64)
    target = _resolve_target(m, x, target)
    snapshot = {"num_samples": cfg.num_samples, "sd": cfg.sd, "seed": cfg.seed}
    if cfg.sd == 0.0:
        attr = input_gradient(m, x, target)
        return Explanation(attr, "sg", target, snapshot)
    rng = np.random.default_rng(cfg.seed)
    samples = x[None, :] + cfg.sd * rng.standard_normal((cfg.num_samples, x.size))
    grads = input_gradient_batch(m, samples, target)
    return Explanation(grads.mean(axis=0), "sg", target, snapshot)


def gaussian_kernel_weights(x, points, kernel_sigma: float) -> np.ndarray:
    """Proximity weights exp(-||x - p||^2 / sigma^2); the weight of x itself is 1."""
    x = np.asarray(x, dtype=np.float64)
    points = np.asarray(points, dtype=np.float64)
    sq_dist = np.sum((points - x) ** 2, axis=1)
    return np.exp(-sq_dist / kernel_sigma**2)


def lime(
    m: Mlp,
    x,
    cfg: NeighborhoodConfig,
    target: int | None = None,
    ridge: float = 0.0,
) -> Explanation:
    """Coefficients of the kernel-weighted local linear surrogate.

    The neighborhood is ``x`` itself plus ``num_samples`` Gaussian
    perturbations; sample weights are exp(-||x - a||^2 / sigma^2), so the
    weight of ``x`` against itself is exactly 1. The surrogate is fitted in
    coordinates centered at ``x`` (same argmin, far better conditioning);
    the intercept is fitted but excluded from the attributions.
    """
    x = np.asarray(x, dtype=np.float64)
    if ridge < 0:
        raise ValueError("ridge must be nonnegative")
    target = _resolve_target(m, x, target)
    rng = np.random.default_rng(cfg.seed)
    offsets = cfg.sd * rng.standard_normal((cfg.num_samples, x.size))
    neighborhood = np.vstack([x[None, :], x[None, :] + offsets])
    weights = gaussian_kernel_weights(x, neighborhood, cfg.kernel_sigma)
    targets_values = forward_batch(m, neighborhood)[:, target]
    design = np.hstack(
        [neighborhood - x, np.ones((neighborhood.shape[0], 1))]
    )
    beta = weighted_least_squares(design, targets_values, weights, ridge=ridge)
    snapshot = {
        "num_samples": cfg.num_samples,
        "sd": cfg.sd,
        "kernel_sigma": cfg.kernel_sigma,
        "seed": cfg.seed,
        "ridge": ridge,
    }
    return Explanation(beta[:-1], "lime", target, snapshot)


def _shapley_kernel_weight(d: int, size: int) -> float:
    return (d - 1) / (comb(d, size) * size * (d - size))


def _shap_coalitions(d: int, budget: int, seed: int) -> tuple[np.ndarray, np.ndarray]:
    """Coalition masks and weights for the KernelSHAP regression.

    Complete subset sizes are enumerated with exact Shapley-kernel weights
    while they fit the budget (paired s with d-s, most-weighted first); any
    leftover budget is sampled from the remaining sizes, with the sampled
    group weighted by the leftover kernel mass.
    """
    sizes = list(range(1, d))
    size_mass = {s: (d - 1) / (s * (d - s)) for s in sizes}

    # pair up (s, d-s), ordered by decreasing per-subset weight
    order: list[tuple[int, ...]] = []
    for s in range(1, d // 2 + 1):
        order.append((s,) if s == d - s else (s, d - s))

    masks: list[np.ndarray] = []
    weights: list[float] = []
    remaining = budget
    enumerated: set[int] = set()
    for group in order:
        group_count = sum(comb(d, s) for s in group)
        if group_count > remaining:
            break
        for s in group:
            w = _shapley_kernel_weight(d, s)
            for subset in combinations(range(d), s):
                mask = np.zeros(d)
                mask[list(subset)] = 1.0
                masks.append(mask)
                weights.append(w)
            enumerated.add(s)
        remaining -= group_count

    leftover_sizes = [s for s in sizes if s not in enumerated]
    if leftover_sizes and remaining > 0:
        rng = np.random.default_rng(seed)
        probs = np.array([size_mass[s] for s in leftover_sizes])
        probs /= probs.sum()
        per_size = rng.multinomial(remaining, probs)
        sampled_rows = []
        for s, count in zip(leftover_sizes, per_size):
            if count == 0:
                continue
            # first s columns of row-wise random orderings = uniform subsets
            orderings = np.argsort(rng.random((count, d)), axis=1)[:, :s]
            block = np.zeros((count, d))
            np.put_along_axis(block, orderings, 1.0, axis=1)
            sampled_rows.append(block)
        sampled = np.vstack(sampled_rows)
        unique, counts = np.unique(sampled, axis=0, return_counts=True)
        leftover_mass = sum(size_mass[s] for s in leftover_sizes)
        scale = leftover_mass / remaining
        for mask, count in zip(unique, counts):
            masks.append(mask)
            weights.append(count * scale)
    return np.asarray(masks), np.asarray(weights)


def kernel_shap(
    m: Mlp,
    x,
    background,
    num_coalitions: int | None = None,
    seed: int = 0,
    target: int | None = None,
) -> Explanation:
    """Shapley-kernel weighted regression over sampled feature coalitions.

    Absent features are imputed by background feature means; the base value
    is the mean model output over the background rows, and the efficiency
    identity sum(phi) = f(x) - base is enforced by a constrained solve.
    """
    x = np.asarray(x, dtype=np.float64)
    bg = background.X if isinstance(background, Dataset) else np.asarray(background, float)
    if bg.ndim != 2 or bg.shape[0] == 0:
        raise ValueError("background must be a nonempty matrix of points")
    if bg.shape[1] != x.size:
        raise ValueError("background feature count must match x")
    d = x.size
    if num_coalitions is None:
        num_coalitions = 2 * d + 64
    if num_coalitions < d + 2:
        raise ValueError("num_coalitions must be >= d + 2")

    target = _resolve_target(m, x, target)
    base_value = float(forward_batch(m, bg)[:, target].mean())
    fx = float(forward(m, x)[target])
    delta = fx - base_value
    snapshot = {"num_coalitions": num_coalitions, "seed": seed}
    if d == 1:
        # the efficiency constraint pins the single attribution
        return Explanation(np.array([delta]), "shap", target, snapshot)

    masks, weights = _shap_coalitions(d, num_coalitions, seed)
    bg_mean = bg.mean(axis=0)
    inputs = np.where(masks > 0, x[None, :], bg_mean[None, :])
    values = forward_batch(m, inputs)[:, target] - base_value

    # minimize sum w (mask . phi - value)^2 subject to sum(phi) = delta
    gram = masks.T @ (masks * weights[:, None])
    rhs = masks.T @ (weights * values)
    kkt = np.zeros((d + 1, d + 1))
    kkt[:d, :d] = gram
    kkt[:d, d] = 1.0
    kkt[d, :d] = 1.0
    full_rhs = np.concatenate([rhs, [delta]])
    try:
        solution = np.linalg.solve(kkt, full_rhs)
    except np.linalg.LinAlgError:
        kkt[:d, :d] += 1e-10 * np.eye(d)
        solution = np.linalg.solve(kkt, full_rhs)
    return Explanation(solution[:d], "shap", target, snapshot)


def smoothgrad_defaults(ds: Dataset, seed: int = 0, num_samples: int = 50) -> NeighborhoodConfig:
    """SmoothGrad default: sd = 0.1 x the largest per-feature range."""
    spread = float(np.max(ds.X.max(axis=0) - ds.X.min(axis=0)))
    return NeighborhoodConfig(
        num_samples=num_samples, sd=0.1 * spread, kernel_sigma=max(spread, 1e-12), seed=seed
    )


def lime_defaults(ds: Dataset, seed: int = 0, num_samples: int = 100) -> NeighborhoodConfig:
    """LIME default: kernel sigma = median pairwise distance, sd = sigma/sqrt(d).

    The per-coordinate sd is scaled by 1/sqrt(d) so a perturbation's norm is
    about one kernel sigma regardless of dimension; per-coordinate sd equal
    to sigma itself drives every kernel weight to exp(-d) and the weighted
    fit degenerates in high dimension.
    """
    sigma = median_pairwise_distance(ds)
    if sigma <= 0:
        raise ValueError("degenerate dataset: median pairwise distance is 0")
    return NeighborhoodConfig(
        num_samples=num_samples,
        sd=sigma / np.sqrt(ds.dim),
        kernel_sigma=sigma,
        seed=seed,
    )


def explain_points(
    m: Mlp,
    points,
    method: str,
    *,
    seed: int = 0,
    targets=None,
    ig_steps: int = 64,
    ig_baseline=None,
    neighborhood: NeighborhoodConfig | None = None,
    ridge: float = 0.0,
    background=None,
    num_coalitions: int | None = None,
) -> np.ndarray:
    """Explain each row of ``points``; returns an (n, d) attribution matrix.

    Stochastic methods get a distinct per-point seed derived from ``seed``,
    so results are order-independent and reproducible.
    """
    points = np.asarray(points, dtype=np.float64)
    n = points.shape[0]
    out = np.empty_like(points)
    for i in range(n):
        x = points[i]
        target = None if targets is None else int(targets[i])
        point_seed = seed + i
        if method == "ig":
            exp = integrated_gradients(m, x, ig_baseline, ig_steps, target)
        elif method == "sg":
            cfg = neighborhood or NeighborhoodConfig()
            exp = smoothgrad(
                m,
                x,
                NeighborhoodConfig(cfg.num_samples, cfg.sd, cfg.kernel_sigma, point_seed),
                target,
            )
        elif method == "lime":
            cfg = neighborhood or NeighborhoodConfig()
            exp = lime(
                m,
                x,
                NeighborhoodConfig(cfg.num_samples, cfg.sd, cfg.kernel_sigma, point_seed),
                target,
                ridge,
            )
        elif method == "shap":
            if background is None:
                raise ValueError("kernel_shap needs a background dataset")
            exp = kernel_shap(m, x, background, num_coalitions, point_seed, target)
        else:
            raise ValueError(f"unknown explainer {method!r}")
        out[i] = exp.attributions
    return out
