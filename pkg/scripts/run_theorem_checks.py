"""Verify the three explainer astuteness bounds on trained XOR models."""
import argparse
import csv
import dataclasses
from pathlib import Path

from astute.harness.commands import run_verify
from astute.harness.config import load_config


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--config", default="configs/xor_verify.toml")
    parser.add_argument("--out", default="runs/theorem_checks")
    args = parser.parse_args()

    cfg = load_config(args.config)
    run_verify(dataclasses.replace(cfg, out_dir=args.out))
    rows = list(csv.DictReader(open(Path(args.out) / "theorem_checks.csv")))
    print(f"{'seed':<6}{'explainer':<10}{'lambda':>14}{'astuteness':>12}{'margin':>10}  result")
    for row in rows:
        print(
            f"{row['seed']:<6}{row['explainer']:<10}"
            f"{float(row['lambda']):>14.4g}{float(row['astuteness']):>12.4f}"
            f"{float(row['margin']):>10.4f}  {row['result']}"
        )
    failures = [r for r in rows if r["result"] != "pass"]
    print(f"\n{len(rows) - len(failures)}/{len(rows)} checks passed")


if __name__ == "__main__":
    main()
