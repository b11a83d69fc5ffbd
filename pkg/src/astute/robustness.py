"""Robustness metrics for explainers and classifiers.

Empirical probabilistic Lipschitzness, explainer astuteness, astuteness
curves with the normalised AUC, per-point local Lipschitz estimates and
average sensitivity, and the three theoretical astuteness bounds (one per
explainer) together with their empirical verification.

All estimates enumerate the eligible dataset pairs exactly; nothing here is
Monte Carlo.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .datasets import Dataset, PairSet, eligible_pairs
from .explainers import explain_points, lime_defaults, smoothgrad_defaults
from .nn import Mlp, forward_batch


class NoEligiblePairsError(ValueError):
    """No pairs fall within the radius; increase r."""


EXPLAINER_LAMBDAS = ("ig", "lime", "sg")


@dataclass(frozen=True)
class ProbLipEstimate:
    """Empirical probabilistic-Lipschitz estimate over eligible pairs."""

    L: float
    r: float
    alpha: float
    num_pairs: int


@dataclass(frozen=True)
class AstutenessCurve:
    """Astuteness probability as a function of lambda on [0, lambda_max].

    ``degenerate`` marks the constant-explainer case (all pair ratios zero),
    where the curve collapses to the single point (0, 1).
    """

    lambdas: np.ndarray
    probs: np.ndarray
    lambda_max: float
    degenerate: bool = False

    def __post_init__(self):
        lam = np.asarray(self.lambdas, dtype=np.float64)
        p = np.asarray(self.probs, dtype=np.float64)
        if lam.shape != p.shape or lam.ndim != 1 or lam.size == 0:
            raise ValueError("lambdas and probs must be matching 1-D sequences")
        if lam[0] != 0.0 or np.any(np.diff(lam) < 0):
            raise ValueError("lambdas must increase from 0")
        if np.any(np.diff(p) < 0) or p[-1] != 1.0:
            raise ValueError("probs must be nondecreasing and end at 1")
        if lam[-1] != self.lambda_max:
            raise ValueError("lambdas must end at lambda_max")
        lam.setflags(write=False)
        p.setflags(write=False)
        object.__setattr__(self, "lambdas", lam)
        object.__setattr__(self, "probs", p)


def pair_ratios(values, pairs: PairSet) -> np.ndarray:
    """||v_i - v_j|| / ||x_i - x_j|| for every eligible pair.

    ``values`` holds one row per dataset point (attributions, model outputs,
    or any other per-point vectors).
    """
    if len(pairs) == 0:
        raise NoEligiblePairsError("no eligible pairs; increase r")
    values = np.asarray(values, dtype=np.float64)
    if values.ndim == 1:
        values = values[:, None]
    i, j = pairs.pairs[:, 0], pairs.pairs[:, 1]
    diffs = values[i] - values[j]
    return np.sqrt(np.sum(diffs * diffs, axis=1)) / pairs.distances


def empirical_prob_lipschitz(outputs, pairs: PairSet, L: float) -> ProbLipEstimate:
    """Fraction of eligible pairs satisfying the L-Lipschitz inequality."""
    if L < 0:
        raise ValueError("L must be nonnegative")
    ratios = pair_ratios(outputs, pairs)
    satisfied = float(np.mean(ratios <= L))
    return ProbLipEstimate(
        L=float(L), r=pairs.radius, alpha=1.0 - satisfied, num_pairs=len(pairs)
    )


def explainer_astuteness(explanations, pairs: PairSet, lam: float) -> float:
    """Probability that paired explanations stay within lam times the distance."""
    if lam < 0:
        raise ValueError("lambda must be nonnegative")
    ratios = pair_ratios(explanations, pairs)
    return float(np.mean(ratios <= lam))


def astuteness_curve(explanations, pairs: PairSet, grid_size: int = 256) -> AstutenessCurve:
    """Astuteness on a uniform lambda grid over [0, max pair ratio]."""
    if grid_size < 2:
        raise ValueError("grid_size must be >= 2")
    ratios = np.sort(pair_ratios(explanations, pairs))
    lam_max = float(ratios[-1])
    if lam_max == 0.0:
        return AstutenessCurve(
            np.array([0.0]), np.array([1.0]), 0.0, degenerate=True
        )
    lambdas = np.linspace(0.0, lam_max, grid_size)
    probs = np.searchsorted(ratios, lambdas, side="right") / ratios.size
    return AstutenessCurve(lambdas, probs, lam_max)


def normalised_astuteness_auc(curve: AstutenessCurve) -> float:
    """Trapezoidal AUC of the curve with lambda rescaled by 1/lambda_max."""
    if curve.degenerate:
        return 1.0
    t = curve.lambdas / curve.lambda_max
    return float(np.trapezoid(curve.probs, t))


def local_lipschitz_estimate(explanations, points, point_index: int, neighbor_indices) -> float:
    """Max explanation/input ratio over the point's neighborhood; NaN if empty."""
    return _neighborhood_stat(explanations, points, point_index, neighbor_indices, max)


def average_sensitivity(explanations, points, point_index: int, neighbor_indices) -> float:
    """Mean explanation/input ratio over the point's neighborhood; NaN if empty."""
    return _neighborhood_stat(
        explanations, points, point_index, neighbor_indices, lambda v: sum(v) / len(v)
    )


def _neighborhood_stat(explanations, points, point_index, neighbor_indices, reduce):
    explanations = np.asarray(explanations, dtype=np.float64)
    points = np.asarray(points, dtype=np.float64)
    neighbors = [int(j) for j in neighbor_indices]
    ratios = []
    for j in neighbors:
        dist = float(np.linalg.norm(points[point_index] - points[j]))
        if dist == 0.0:
            continue
        num = float(np.linalg.norm(explanations[point_index] - explanations[j]))
        ratios.append(num / dist)
    if not ratios:
        return math.nan  # flagged missing; callers exclude NaNs from aggregates
    return float(reduce(ratios))


def neighborhood_metrics(explanations, points, pairs: PairSet) -> tuple[np.ndarray, np.ndarray]:
    """Per-point LLE and AS using the pair set as the neighborhood graph.

    Points without neighbors get NaN in both outputs.
    """
    explanations = np.asarray(explanations, dtype=np.float64)
    points = np.asarray(points, dtype=np.float64)
    n = points.shape[0]
    ratios = pair_ratios(explanations, pairs)
    lle = np.full(n, math.nan)
    avg = np.full(n, math.nan)
    sums = np.zeros(n)
    counts = np.zeros(n, dtype=np.int64)
    maxes = np.full(n, -math.inf)
    for (i, j), ratio in zip(pairs.pairs, ratios):
        for k in (int(i), int(j)):
            sums[k] += ratio
            counts[k] += 1
            maxes[k] = max(maxes[k], ratio)
    touched = counts > 0
    lle[touched] = maxes[touched]
    avg[touched] = sums[touched] / counts[touched]
    return lle, avg


@dataclass(frozen=True)
class ExplainerMetrics:
    """Robustness summary for one explainer on one (model, dataset, r)."""

    auc: float
    lambda_max: float
    curve: AstutenessCurve
    lle: np.ndarray
    avg_sensitivity: np.ndarray

    def __post_init__(self):
        if not 0.0 <= self.auc <= 1.0:
            raise ValueError("auc must lie in [0, 1]")
        lle = np.asarray(self.lle, dtype=np.float64)
        avg = np.asarray(self.avg_sensitivity, dtype=np.float64)
        both = ~(np.isnan(lle) | np.isnan(avg))
        if np.any(avg[both] > lle[both] + 1e-12):
            raise ValueError("average sensitivity exceeded the local Lipschitz estimate")
        object.__setattr__(self, "lle", lle)
        object.__setattr__(self, "avg_sensitivity", avg)


@dataclass(frozen=True)
class RobustnessReport:
    """Per-explainer robustness metrics for one run."""

    dataset: str
    model: str
    seed: int
    r: float
    per_explainer: dict[str, ExplainerMetrics]


def compute_explainer_metrics(
    explanations, points, pairs: PairSet, grid_size: int = 256
) -> ExplainerMetrics:
    """Astuteness curve + AUC + per-point LLE/AS for one explanation table."""
    curve = astuteness_curve(explanations, pairs, grid_size)
    lle, avg = neighborhood_metrics(explanations, points, pairs)
    return ExplainerMetrics(
        auc=normalised_astuteness_auc(curve),
        lambda_max=curve.lambda_max,
        curve=curve,
        lle=lle,
        avg_sensitivity=avg,
    )


def theoretical_lambda_ig(L: float, n: int, sup_d: float, inf_d: float) -> float:
    """Astuteness threshold for Integrated Gradients: 3 L sqrt(n) sup/inf."""
    _check_inf_d(inf_d)
    return 3.0 * L * math.sqrt(n) * (sup_d / inf_d)


def theoretical_lambda_lime(L: float, dataset_size: int, r: float, inf_d: float) -> float:
    """Astuteness threshold for LIME: L + 2 sqrt(2|D| + L^2 r^2) / inf."""
    _check_inf_d(inf_d)
    c = 2.0 * math.sqrt(2.0 * dataset_size + (L * r) ** 2)
    return L + c / inf_d


def theoretical_lambda_sg(L: float, inf_d: float) -> float:
    """Astuteness threshold for SmoothGrad: 2 L / inf."""
    _check_inf_d(inf_d)
    return 2.0 * L / inf_d


def _check_inf_d(inf_d: float) -> None:
    if inf_d <= 0:
        raise ValueError("inf_d must be positive (identical points are excluded)")


@dataclass(frozen=True)
class TheoremCheck:
    L: float
    alpha: float
    lam: float
    astuteness: float
    passed: bool
    margin: float


@dataclass(frozen=True)
class TheoremVerification:
    explainer: str
    r: float
    num_pairs: int
    sup_d: float
    inf_d: float
    checks: tuple[TheoremCheck, ...]

    @property
    def all_passed(self) -> bool:
        return all(c.passed for c in self.checks)


def verify_theorem(
    explainer: str,
    model: Mlp,
    ds: Dataset,
    r: float,
    L_grid=None,
    seed: int = 0,
    ig_steps: int = 64,
    num_samples: int = 50,
    lime_ridge: float = 0.0,
) -> TheoremVerification:
    """Empirically check one astuteness lower bound on a trained model.

    For each L in ``L_grid``: estimate alpha from the model-output pair
    ratios, evaluate the explainer's theoretical lambda, and require the
    explainer astuteness at that lambda to reach 1 - alpha. ``L_grid`` of
    None uses the empirical max output ratio (the alpha = 0 setting).
    sup/inf distances are taken over the eligible pairs, consistent with the
    d(x, y) <= r conditioning.
    """
    if explainer not in EXPLAINER_LAMBDAS:
        raise ValueError(f"explainer must be one of {EXPLAINER_LAMBDAS}")
    pairs = eligible_pairs(ds, r)
    if len(pairs) == 0:
        raise NoEligiblePairsError("no eligible pairs; increase r")
    outputs = forward_batch(model, ds.X)
    output_ratios = pair_ratios(outputs, pairs)
    if L_grid is None:
        L_grid = [float(np.max(output_ratios))]

    if explainer == "ig":
        explanations = explain_points(model, ds.X, "ig", seed=seed, ig_steps=ig_steps)
    elif explainer == "sg":
        cfg = smoothgrad_defaults(ds, seed=seed, num_samples=num_samples)
        explanations = explain_points(model, ds.X, "sg", seed=seed, neighborhood=cfg)
    else:
        cfg = lime_defaults(ds, seed=seed, num_samples=max(num_samples, ds.dim + 10))
        explanations = explain_points(
            model, ds.X, "lime", seed=seed, neighborhood=cfg, ridge=lime_ridge
        )
    explanation_ratios = pair_ratios(explanations, pairs)

    sup_d = float(np.max(pairs.distances))
    inf_d = float(np.min(pairs.distances))
    checks = []
    for L in L_grid:
        L = float(L)
        alpha = 1.0 - float(np.mean(output_ratios <= L))
        if explainer == "ig":
            lam = theoretical_lambda_ig(L, ds.dim, sup_d, inf_d)
        elif explainer == "sg":
            lam = theoretical_lambda_sg(L, inf_d)
        else:
            lam = theoretical_lambda_lime(L, ds.n, r, inf_d)
        astuteness = float(np.mean(explanation_ratios <= lam))
        margin = astuteness - (1.0 - alpha)
        checks.append(
            TheoremCheck(
                L=L,
                alpha=alpha,
                lam=lam,
                astuteness=astuteness,
                passed=margin >= 0.0,
                margin=margin,
            )
        )
    return TheoremVerification(
        explainer=explainer,
        r=float(r),
        num_pairs=len(pairs),
        sup_d=sup_d,
        inf_d=inf_d,
        checks=tuple(checks),
    )
