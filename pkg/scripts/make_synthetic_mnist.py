"""Generate the synthetic digit corpus as canonical MNIST-style IDX files.

Real MNIST IDX files drop in transparently (same loader, same layout); this
script produces an offline stand-in with the same shapes and value range.
"""
import argparse
from pathlib import Path

from astute.datasets import gen_digits, write_idx_images, write_idx_labels


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--out", default="data/synthetic-mnist", help="output directory")
    parser.add_argument("--count", type=int, default=800, help="number of images")
    parser.add_argument("--seed", type=int, default=0)
    args = parser.parse_args()

    out = Path(args.out)
    images, labels = gen_digits(args.count, seed=args.seed)
    ipath = write_idx_images(out / "train-images-idx3-ubyte", images)
    lpath = write_idx_labels(out / "train-labels-idx1-ubyte", labels)
    print(f"wrote {args.count} images to {ipath}")
    print(f"wrote {args.count} labels to {lpath}")


if __name__ == "__main__":
    main()
