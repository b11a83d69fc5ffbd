"""Sharp vs distorted gaussian autoencoders on the digit subset.

Trains both variants per seed and prints PSNR, output-layer Lipschitz lower
bound and reconstruction stable rank. Run scripts/make_synthetic_mnist.py
first to create the digit IDX files.
"""
import argparse
import csv
import dataclasses
from pathlib import Path

from astute.harness.commands import run_autoencoder
from astute.harness.config import load_config


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--config", default="configs/autoencoder.toml")
    parser.add_argument("--out", default="runs/autoencoder_study")
    args = parser.parse_args()

    cfg = load_config(args.config)
    out_dir = Path(args.out)
    run_autoencoder(dataclasses.replace(cfg, out_dir=str(out_dir)))

    rows = list(csv.DictReader(open(out_dir / "autoencoder_summary.csv")))
    print(f"{'seed':<6}{'variant':<12}{'psnr':>9}{'L_lower':>9}{'stable_rank':>13}")
    for row in rows:
        print(
            f"{row['seed']:<6}{row['variant']:<12}"
            f"{float(row['psnr']):>9.2f}{float(row['lipschitz_lower']):>9.3f}"
            f"{float(row['stable_rank']):>13.3f}"
        )


if __name__ == "__main__":
    main()
