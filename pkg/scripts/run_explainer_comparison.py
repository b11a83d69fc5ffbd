"""Explainer robustness comparison across datasets and depths.

Reproduces the normalised-astuteness-AUC table for SHAP, LIME and
Integrated Gradients on XOR, Iris and the MNIST-style digit subset.
Run scripts/make_synthetic_mnist.py first to create the digit IDX files.
"""
import argparse
import csv
import dataclasses
from pathlib import Path

from astute.harness.commands import run_robustness
from astute.harness.config import load_config

CONFIGS = (
    ("xor", "configs/xor_relu.toml"),
    ("iris-d2", "configs/iris_depth2.toml"),
    ("iris-d4", "configs/iris_depth4.toml"),
    ("mnist-d2", "configs/mnist_depth2.toml"),
    ("mnist-d4", "configs/mnist_depth4.toml"),
)


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--out", default="runs/explainer_comparison")
    args = parser.parse_args()

    table = {}
    for name, config_path in CONFIGS:
        cfg = load_config(config_path)
        out_dir = Path(args.out) / name
        run_robustness(dataclasses.replace(cfg, out_dir=str(out_dir)))
        rows = list(csv.DictReader(open(out_dir / "auc_aggregate.csv")))
        table[name] = {row["explainer"]: float(row["median_auc"]) for row in rows}
        print(f"finished {name}")

    print("\n=== median normalised astuteness AUC ===")
    print(f"{'run':<12}{'SHAP':>10}{'LIME':>10}{'IG':>10}")
    for name, aucs in table.items():
        print(
            f"{name:<12}{aucs.get('shap', float('nan')):>10.4f}"
            f"{aucs.get('lime', float('nan')):>10.4f}"
            f"{aucs.get('ig', float('nan')):>10.4f}"
        )


if __name__ == "__main__":
    main()
