"""XOR study: ReLU vs tanh 2-layer MLPs.

Runs the robustness and stable-rank pipelines for both activations and
prints the activation-comparison table (astuteness AUCs and output-layer
stable rank per seed, with medians).
"""
import argparse
import csv
from pathlib import Path

from astute.harness.commands import run_robustness, run_stablerank
from astute.harness.config import load_config


def median(values):
    values = sorted(values)
    mid = len(values) // 2
    if len(values) % 2:
        return values[mid]
    return 0.5 * (values[mid - 1] + values[mid])


def read_auc(out_dir):
    rows = list(csv.DictReader(open(Path(out_dir) / "auc_summary.csv")))
    per = {}
    for row in rows:
        per.setdefault(row["explainer"], []).append(float(row["auc"]))
    return per


def read_output_stable_rank(out_dir, seeds, depth):
    values = []
    for seed in seeds:
        rows = list(csv.DictReader(open(Path(out_dir) / f"stablerank_seed{seed}.csv")))
        values.append(float(next(r for r in rows if int(r["layer"]) == depth)["stable_rank"]))
    return values


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--out", default="runs/xor_study")
    args = parser.parse_args()

    results = {}
    for name in ("xor_relu", "xor_tanh"):
        cfg = load_config(Path("configs") / f"{name}.toml")
        import dataclasses

        rb_dir = Path(args.out) / f"{name}_robustness"
        sr_dir = Path(args.out) / f"{name}_stablerank"
        run_robustness(dataclasses.replace(cfg, out_dir=str(rb_dir)))
        run_stablerank(dataclasses.replace(cfg, out_dir=str(sr_dir)))
        results[name] = {
            "auc": read_auc(rb_dir),
            "stable_rank": read_output_stable_rank(sr_dir, cfg.seeds, cfg.model.depth),
        }

    print("\n=== XOR 2-layer MLP: ReLU vs tanh (median over seeds) ===")
    print(f"{'quantity':<28}{'ReLU':>12}{'tanh':>12}")
    relu, tanh = results["xor_relu"], results["xor_tanh"]
    print(
        f"{'output stable rank':<28}"
        f"{median(relu['stable_rank']):>12.4f}{median(tanh['stable_rank']):>12.4f}"
    )
    for key, label in (
        ("classifier", "classifier astuteness AUC"),
        ("ig", "integrated gradients AUC"),
        ("lime", "LIME AUC"),
        ("shap", "SHAP AUC"),
    ):
        print(
            f"{label:<28}"
            f"{median(relu['auc'][key]):>12.4f}{median(tanh['auc'][key]):>12.4f}"
        )


if __name__ == "__main__":
    main()
