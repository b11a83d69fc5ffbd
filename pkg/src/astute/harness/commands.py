"""Experiment commands behind the CLI: train, explain, robustness,
stablerank, verify, autoencoder.

Every command follows the multi-seed protocol (per-seed artifacts plus a
median aggregate where it makes sense), writes deterministic CSVs with
17-significant-digit decimals, and finishes with a manifest listing every
emitted file and its hash.
"""
from __future__ import annotations

import json
import math
from pathlib import Path

import numpy as np

from ..datasets import (
    Dataset,
    gen_xor,
    load_iris,
    load_mnist,
    median_pairwise_distance,
    eligible_pairs,
    train_eval_split,
)
from ..explainers import (
    NeighborhoodConfig,
    explain_points,
    lime_defaults,
    smoothgrad_defaults,
)
from ..ioutil import fmt, write_csv
from ..nn import (
    TrainConfig,
    accuracy,
    forward_batch,
    init_mlp,
    lipschitz_upper_bound,
    load_mlp,
    psnr,
    save_mlp,
    train,
)
from ..robustness import (
    RobustnessReport,
    compute_explainer_metrics,
    verify_theorem,
)
from ..stablerank import (
    distance_matrices,
    lipschitz_lower_bound,
    stable_rank,
    stable_rank_sweep,
)
from .config import ConfigError, ExperimentConfig
from .manifest import StageTimer, write_manifest
from .svg import polyline_chart

REPORT_SCHEMA = "astute-robustness-report/1"


def build_dataset(cfg: ExperimentConfig, seed: int) -> Dataset:
    ds_cfg = cfg.dataset
    if ds_cfg.kind == "xor":
        return gen_xor(ds_cfg.n, noise_sd=ds_cfg.noise_sd, seed=seed)
    if ds_cfg.kind == "iris":
        return load_iris(
            ds_cfg.path, features=ds_cfg.features, standardize=ds_cfg.standardize
        )
    return load_mnist(
        ds_cfg.images, ds_cfg.labels, limit=ds_cfg.limit, downsample=ds_cfg.downsample
    )


def split_dataset(ds: Dataset, cfg: ExperimentConfig, seed: int):
    return train_eval_split(ds, eval_count=cfg.dataset.eval_count, seed=seed)


def pick_split(name: str, full: Dataset, train_ds: Dataset, eval_ds: Dataset) -> Dataset:
    return {"train": train_ds, "eval": eval_ds, "all": full}[name]


def build_model(cfg: ExperimentConfig, ds: Dataset, seed: int):
    m_cfg = cfg.model
    dims = [ds.dim] + [m_cfg.width] * (m_cfg.depth - 1) + [ds.num_classes]
    return init_mlp(
        dims,
        activation=m_cfg.activation,
        output_mode="softmax_classifier",
        seed=seed,
        activation_param=m_cfg.activation_param,
    )


def train_model(cfg: ExperimentConfig, model, ds: Dataset, seed: int):
    t_cfg = cfg.train
    return train(
        model,
        ds,
        TrainConfig(
            epochs=t_cfg.epochs,
            batch_size=t_cfg.batch_size,
            learning_rate=t_cfg.learning_rate,
            seed=seed,
            loss=t_cfg.loss,
        ),
    )


def resolve_r(cfg: ExperimentConfig, ds: Dataset) -> float:
    if cfg.robustness.r_policy == "fixed":
        return float(cfg.robustness.r_value)
    return median_pairwise_distance(ds)


def run_explainer(cfg: ExperimentConfig, method, model, points, targets, eval_ds, train_ds, seed):
    ex = cfg.explainers
    if method == "ig":
        return explain_points(
            model, points, "ig", seed=seed, targets=targets, ig_steps=ex.ig.steps
        )
    if method == "sg":
        base = smoothgrad_defaults(eval_ds, seed=seed, num_samples=ex.sg.num_samples)
        sd = base.sd if ex.sg.sd is None else ex.sg.sd
        cfg_sg = NeighborhoodConfig(ex.sg.num_samples, sd, base.kernel_sigma, seed)
        return explain_points(
            model, points, "sg", seed=seed, targets=targets, neighborhood=cfg_sg
        )
    if method == "lime":
        base = lime_defaults(eval_ds, seed=seed, num_samples=ex.lime.num_samples)
        sd = base.sd if ex.lime.sd is None else ex.lime.sd
        sigma = base.kernel_sigma if ex.lime.kernel_sigma is None else ex.lime.kernel_sigma
        cfg_lime = NeighborhoodConfig(ex.lime.num_samples, sd, sigma, seed)
        return explain_points(
            model,
            points,
            "lime",
            seed=seed,
            targets=targets,
            neighborhood=cfg_lime,
            ridge=ex.lime.ridge,
        )
    return explain_points(
        model,
        points,
        "shap",
        seed=seed,
        targets=targets,
        background=train_ds,
        num_coalitions=ex.shap.num_coalitions,
    )


def write_explanations_csv(path, explanations, targets) -> Path:
    d = explanations.shape[1]
    header = ["point_index", "target_class"] + [f"feature_{i}" for i in range(d)]
    rows = [
        [str(i), str(int(targets[i]))] + [fmt(v) for v in explanations[i]]
        for i in range(explanations.shape[0])
    ]
    return write_csv(path, header, rows)


def _out_dir(cfg: ExperimentConfig) -> Path:
    out = Path(cfg.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    return out


def run_train(cfg: ExperimentConfig) -> Path:
    out = _out_dir(cfg)
    timer = StageTimer()
    artifacts = []
    summary_rows = []
    for seed in cfg.seeds:
        with timer.time("dataset"):
            full = build_dataset(cfg, seed)
            train_ds, eval_ds = split_dataset(full, cfg, seed)
        with timer.time("train"):
            model = build_model(cfg, full, seed)
            trained, losses = train_model(cfg, model, train_ds, seed)
        with timer.time("write"):
            artifacts.append(save_mlp(trained, out / f"model_seed{seed}.json"))
            artifacts.append(
                write_csv(
                    out / f"loss_seed{seed}.csv",
                    ["epoch", "mean_loss"],
                    [[str(e), fmt(v)] for e, v in enumerate(losses)],
                )
            )
            summary_rows.append(
                [
                    str(seed),
                    fmt(losses[-1]),
                    fmt(accuracy(trained, train_ds)),
                    fmt(accuracy(trained, eval_ds)),
                ]
            )
    artifacts.append(
        write_csv(
            out / "train_summary.csv",
            ["seed", "final_loss", "train_accuracy", "eval_accuracy"],
            summary_rows,
        )
    )
    write_manifest(out, "train", cfg.raw, timer.stages, artifacts)
    return out


def run_explain(cfg: ExperimentConfig) -> Path:
    if cfg.explain is None:
        raise ConfigError("an [explain] section is required for the explain command")
    out = _out_dir(cfg)
    timer = StageTimer()
    artifacts = []
    with timer.time("load_model"):
        model = load_mlp(cfg.explain.model)
    for seed in cfg.seeds:
        with timer.time("dataset"):
            full = build_dataset(cfg, seed)
            train_ds, eval_ds = split_dataset(full, cfg, seed)
            points_ds = pick_split(cfg.explain.split, full, train_ds, eval_ds)
        with timer.time("explain"):
            targets = forward_batch(model, points_ds.X).argmax(axis=1)
            explanations = run_explainer(
                cfg, cfg.explain.explainer, model, points_ds.X, targets,
                points_ds, train_ds, seed,
            )
        with timer.time("write"):
            artifacts.append(
                write_explanations_csv(
                    out / f"explanations_{cfg.explain.explainer}_seed{seed}.csv",
                    explanations,
                    targets,
                )
            )
    write_manifest(out, "explain", cfg.raw, timer.stages, artifacts)
    return out


def _report_doc(report: RobustnessReport, num_pairs: int) -> dict:
    return {
        "schema": REPORT_SCHEMA,
        "dataset": report.dataset,
        "model": report.model,
        "seed": report.seed,
        "r": report.r,
        "num_pairs": num_pairs,
        "explainers": {
            name: {
                "auc": metrics.auc,
                "lambda_max": metrics.lambda_max,
                "lle": [None if math.isnan(v) else v for v in metrics.lle],
                "average_sensitivity": [
                    None if math.isnan(v) else v for v in metrics.avg_sensitivity
                ],
            }
            for name, metrics in report.per_explainer.items()
        },
    }


def _lle_summary_row(seed, name, metrics):
    lle = metrics.lle[~np.isnan(metrics.lle)]
    avg = metrics.avg_sensitivity[~np.isnan(metrics.avg_sensitivity)]
    q = np.percentile(lle, [0, 25, 50, 75, 100]) if lle.size else [math.nan] * 5
    return [
        str(seed),
        name,
        fmt(q[0]),
        fmt(q[1]),
        fmt(q[2]),
        fmt(q[3]),
        fmt(q[4]),
        fmt(float(np.mean(lle)) if lle.size else math.nan),
        fmt(float(np.mean(avg)) if avg.size else math.nan),
        str(int(np.isnan(metrics.lle).sum())),
    ]


def run_robustness(cfg: ExperimentConfig) -> Path:
    """Train per seed, explain the chosen split, and emit curves + metrics.

    Alongside the configured explainers, a "classifier" row measures the
    astuteness of the model's own softmax output map (the assumed reading of
    classifier astuteness: the explainer pipeline applied to f itself).
    """
    out = _out_dir(cfg)
    timer = StageTimer()
    artifacts = []
    auc_rows = []
    lle_rows = []
    auc_by_name: dict[str, list[float]] = {}
    for seed in cfg.seeds:
        with timer.time("dataset"):
            full = build_dataset(cfg, seed)
            train_ds, eval_ds = split_dataset(full, cfg, seed)
            points_ds = pick_split(cfg.robustness.split, full, train_ds, eval_ds)
        with timer.time("train"):
            trained, _ = train_model(cfg, build_model(cfg, full, seed), train_ds, seed)
        with timer.time("metrics"):
            r = resolve_r(cfg, points_ds)
            pairs = eligible_pairs(points_ds, r)
            targets = forward_batch(trained, points_ds.X).argmax(axis=1)
            per_explainer = {}
            outputs = forward_batch(trained, points_ds.X)
            per_explainer["classifier"] = compute_explainer_metrics(
                outputs, points_ds.X, pairs, cfg.robustness.grid_size
            )
            for method in cfg.robustness.explainers:
                explanations = run_explainer(
                    cfg, method, trained, points_ds.X, targets,
                    points_ds, train_ds, seed,
                )
                per_explainer[method] = compute_explainer_metrics(
                    explanations, points_ds.X, pairs, cfg.robustness.grid_size
                )
        with timer.time("write"):
            report = RobustnessReport(
                dataset=points_ds.name,
                model=f"{cfg.model.activation}-depth{cfg.model.depth}-width{cfg.model.width}",
                seed=seed,
                r=r,
                per_explainer=per_explainer,
            )
            curve_rows = []
            series = []
            for name, metrics in report.per_explainer.items():
                curve = metrics.curve
                lam_axis = (
                    curve.lambdas / curve.lambda_max
                    if curve.lambda_max > 0
                    else curve.lambdas
                )
                for lam, prob in zip(curve.lambdas, curve.probs):
                    curve_rows.append([name, fmt(lam), fmt(prob)])
                series.append((name, lam_axis, curve.probs))
                auc_rows.append(
                    [str(seed), name, fmt(metrics.auc), fmt(metrics.lambda_max)]
                )
                lle_rows.append(_lle_summary_row(seed, name, metrics))
                auc_by_name.setdefault(name, []).append(metrics.auc)
            artifacts.append(
                write_csv(
                    out / f"astuteness_curves_seed{seed}.csv",
                    ["explainer", "lambda", "astuteness"],
                    curve_rows,
                )
            )
            artifacts.append(
                polyline_chart(
                    out / f"astuteness_curves_seed{seed}.svg",
                    series,
                    title=f"normalised astuteness (seed {seed})",
                    xlabel="lambda / lambda_max",
                    ylabel="astuteness",
                )
            )
            report_path = out / f"report_seed{seed}.json"
            report_path.write_text(
                json.dumps(_report_doc(report, len(pairs)), indent=1), encoding="utf-8"
            )
            artifacts.append(report_path)
    artifacts.append(
        write_csv(
            out / "auc_summary.csv",
            ["seed", "explainer", "auc", "lambda_max"],
            auc_rows,
        )
    )
    artifacts.append(
        write_csv(
            out / "lle_as_summary.csv",
            [
                "seed", "explainer", "lle_min", "lle_q1", "lle_median",
                "lle_q3", "lle_max", "lle_mean", "as_mean", "missing_points",
            ],
            lle_rows,
        )
    )
    artifacts.append(
        write_csv(
            out / "auc_aggregate.csv",
            ["explainer", "median_auc", "min_auc", "max_auc"],
            [
                [name, fmt(float(np.median(v))), fmt(min(v)), fmt(max(v))]
                for name, v in sorted(auc_by_name.items())
            ],
        )
    )
    write_manifest(out, "robustness", cfg.raw, timer.stages, artifacts)
    return out


def run_stablerank(cfg: ExperimentConfig) -> Path:
    out = _out_dir(cfg)
    timer = StageTimer()
    artifacts = []
    for seed in cfg.seeds:
        with timer.time("dataset"):
            full = build_dataset(cfg, seed)
            train_ds, eval_ds = split_dataset(full, cfg, seed)
            points_ds = pick_split(cfg.stablerank.split, full, train_ds, eval_ds)
        with timer.time("train"):
            trained, _ = train_model(cfg, build_model(cfg, full, seed), train_ds, seed)
        with timer.time("sweep"):
            layers = (
                cfg.stablerank.layers
                if cfg.stablerank.layers is not None
                else tuple(range(trained.depth + 1))
            )
            entries = stable_rank_sweep(trained, points_ds, layers)
        with timer.time("write"):
            rows = [
                [
                    str(e.layer),
                    fmt(e.stable_rank.value),
                    fmt(e.stable_rank.frobenius),
                    fmt(e.stable_rank.spectral),
                    fmt(e.bounds.lower),
                    fmt(e.bounds.upper),
                    fmt(e.closed_form.relative_discrepancy),
                ]
                for e in entries
            ]
            artifacts.append(
                write_csv(
                    out / f"stablerank_seed{seed}.csv",
                    [
                        "layer", "stable_rank", "frobenius", "spectral",
                        "lipschitz_lower", "lipschitz_upper", "closed_form_discrepancy",
                    ],
                    rows,
                )
            )
    write_manifest(out, "stablerank", cfg.raw, timer.stages, artifacts)
    return out


def run_verify(cfg: ExperimentConfig) -> Path:
    out = _out_dir(cfg)
    timer = StageTimer()
    artifacts = []
    rows = []
    for seed in cfg.seeds:
        with timer.time("dataset"):
            full = build_dataset(cfg, seed)
            train_ds, eval_ds = split_dataset(full, cfg, seed)
            points_ds = pick_split(cfg.verify.split, full, train_ds, eval_ds)
        with timer.time("train"):
            trained, _ = train_model(cfg, build_model(cfg, full, seed), train_ds, seed)
        with timer.time("verify"):
            r = resolve_r(cfg, points_ds)
            l_grid = None if cfg.verify.l_grid is None else list(cfg.verify.l_grid)
            for tag in cfg.verify.explainers:
                result = verify_theorem(
                    tag,
                    trained,
                    points_ds,
                    r,
                    L_grid=l_grid,
                    seed=seed,
                    ig_steps=cfg.explainers.ig.steps,
                    num_samples=cfg.explainers.sg.num_samples,
                    lime_ridge=cfg.explainers.lime.ridge,
                )
                for check in result.checks:
                    rows.append(
                        [
                            str(seed),
                            tag,
                            fmt(check.L),
                            fmt(check.alpha),
                            fmt(check.lam),
                            fmt(check.astuteness),
                            "pass" if check.passed else "fail",
                            fmt(check.margin),
                        ]
                    )
    artifacts.append(
        write_csv(
            out / "theorem_checks.csv",
            ["seed", "explainer", "L", "alpha", "lambda", "astuteness", "result", "margin"],
            rows,
        )
    )
    write_manifest(out, "verify", cfg.raw, timer.stages, artifacts)
    return out


def _autoencoder_init_scale(a: float) -> float:
    # keep initial pre-activations within the gaussian bump width
    return min(1.0, 4.0 * a)


def run_autoencoder(cfg: ExperimentConfig) -> Path:
    """Train sharp vs distorted gaussian autoencoders and compare them.

    Per seed and per variant: PSNR on the eval split, the astuteness curve
    of the reconstruction map, the output-layer Lipschitz lower bound, the
    spectral-norm upper bound, and the stable rank of the reconstruction
    matrix. A handful of reconstructions are dumped for inspection.
    """
    out = _out_dir(cfg)
    ae = cfg.autoencoder
    timer = StageTimer()
    artifacts = []
    summary_rows = []
    for seed in cfg.seeds:
        with timer.time("dataset"):
            full = build_dataset(cfg, seed)
            train_ds, eval_ds = split_dataset(full, cfg, seed)
        series = []
        curve_rows = []
        for variant, a in (("sharp", ae.sharp_a), ("distorted", ae.distorted_a)):
            with timer.time("train"):
                model = init_mlp(
                    [full.dim, ae.bottleneck, full.dim],
                    activation="gaussian",
                    output_mode="identity_regressor",
                    seed=seed,
                    activation_param=a,
                    init_scale=_autoencoder_init_scale(a),
                )
                trained, _ = train(
                    model,
                    train_ds,
                    TrainConfig(
                        epochs=ae.epochs,
                        batch_size=ae.batch_size,
                        learning_rate=ae.learning_rate,
                        seed=seed,
                        loss="mse",
                    ),
                )
            with timer.time("metrics"):
                recon = forward_batch(trained, eval_ds.X)
                mean_psnr = float(
                    np.mean([psnr(eval_ds.X[i], recon[i], 1.0) for i in range(eval_ds.n)])
                )
                r = median_pairwise_distance(eval_ds)
                pairs = eligible_pairs(eval_ds, r)
                metrics = compute_explainer_metrics(
                    recon, eval_ds.X, pairs, ae.grid_size
                )
                y, d = distance_matrices(eval_ds.X, recon)
                lower = lipschitz_lower_bound(y, d)
                upper = lipschitz_upper_bound(trained)
                rank = stable_rank(recon)
            with timer.time("write"):
                curve = metrics.curve
                lam_axis = (
                    curve.lambdas / curve.lambda_max
                    if curve.lambda_max > 0
                    else curve.lambdas
                )
                series.append((variant, lam_axis, curve.probs))
                for lam, prob in zip(curve.lambdas, curve.probs):
                    curve_rows.append([variant, fmt(lam), fmt(prob)])
                summary_rows.append(
                    [
                        str(seed),
                        variant,
                        fmt(a),
                        fmt(mean_psnr),
                        fmt(metrics.auc),
                        fmt(lower),
                        fmt(upper),
                        fmt(rank.value),
                    ]
                )
                keep = min(8, eval_ds.n)
                recon_rows = [
                    [str(i)] + [fmt(v) for v in recon[i]] for i in range(keep)
                ]
                artifacts.append(
                    write_csv(
                        out / f"reconstructions_{variant}_seed{seed}.csv",
                        ["point_index"] + [f"feature_{i}" for i in range(full.dim)],
                        recon_rows,
                    )
                )
        with timer.time("write"):
            artifacts.append(
                write_csv(
                    out / f"autoencoder_curves_seed{seed}.csv",
                    ["variant", "lambda", "astuteness"],
                    curve_rows,
                )
            )
            artifacts.append(
                polyline_chart(
                    out / f"autoencoder_curves_seed{seed}.svg",
                    series,
                    title=f"autoencoder astuteness (seed {seed})",
                    xlabel="lambda / lambda_max",
                    ylabel="astuteness",
                )
            )
    artifacts.append(
        write_csv(
            out / "autoencoder_summary.csv",
            [
                "seed", "variant", "activation_param", "psnr", "astuteness_auc",
                "lipschitz_lower", "lipschitz_upper", "stable_rank",
            ],
            summary_rows,
        )
    )
    write_manifest(out, "autoencoder", cfg.raw, timer.stages, artifacts)
    return out
