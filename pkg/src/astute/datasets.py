"""Datasets and pair enumeration.

Covers the three experiment datasets (XOR, Iris, MNIST-style digit images in
IDX files), radius-eligible pair enumeration, and the median-distance
heuristic for picking the radius. Real MNIST IDX files load through
``load_mnist``; ``gen_digits`` + the IDX writers produce a synthetic digit
corpus in the identical on-disk format for offline runs.
"""
from __future__ import annotations

import csv
import gzip
import struct
import warnings
from dataclasses import dataclass
from importlib import resources
from io import StringIO
from pathlib import Path

import numpy as np

from .linalg import pairwise_sq_dist


class DatasetFormatError(ValueError):
    """An input file violates the expected on-disk format."""


@dataclass(frozen=True)
class Dataset:
    """Row-major feature matrix with integer labels and provenance.

    ``num_classes`` may be pinned explicitly so that subsets of a dataset
    keep the parent's label space even when a class is missing from the
    subset.
    """

    name: str
    X: np.ndarray
    labels: np.ndarray
    feature_names: tuple[str, ...] | None = None
    standardized: bool = False
    num_classes: int | None = None

    def __post_init__(self):
        x = np.asarray(self.X, dtype=np.float64)
        y = np.asarray(self.labels, dtype=np.int64)
        if x.ndim != 2:
            raise ValueError(f"X must be 2-D, got shape {x.shape}")
        if x.shape[0] < 2:
            raise ValueError("a dataset needs at least 2 points")
        if not np.all(np.isfinite(x)):
            raise ValueError("features must be finite")
        if y.shape != (x.shape[0],):
            raise ValueError("labels must be one integer per point")
        if np.any(y < 0):
            raise ValueError("labels must be nonnegative")
        k = self.num_classes if self.num_classes is not None else int(y.max()) + 1
        if np.any(y >= k):
            raise ValueError(f"labels must lie in [0, {k})")
        if self.feature_names is not None and len(self.feature_names) != x.shape[1]:
            raise ValueError("feature_names length must match the feature count")
        x.setflags(write=False)
        y.setflags(write=False)
        object.__setattr__(self, "X", x)
        object.__setattr__(self, "labels", y)
        object.__setattr__(self, "num_classes", k)

    @property
    def n(self) -> int:
        return self.X.shape[0]

    @property
    def dim(self) -> int:
        return self.X.shape[1]

    def subset(self, indices, name_suffix: str = "") -> "Dataset":
        idx = np.asarray(indices, dtype=np.int64)
        return Dataset(
            name=self.name + name_suffix,
            X=self.X[idx].copy(),
            labels=self.labels[idx].copy(),
            feature_names=self.feature_names,
            standardized=self.standardized,
            num_classes=self.num_classes,
        )


@dataclass(frozen=True)
class PairSet:
    """Unordered index pairs (i < j) within ``radius``; identical points excluded."""

    radius: float
    pairs: np.ndarray
    distances: np.ndarray

    def __post_init__(self):
        pairs = np.asarray(self.pairs, dtype=np.int64).reshape(-1, 2)
        dist = np.asarray(self.distances, dtype=np.float64).reshape(-1)
        if pairs.shape[0] != dist.shape[0]:
            raise ValueError("pairs and distances must have matching lengths")
        if pairs.size and not np.all(pairs[:, 0] < pairs[:, 1]):
            raise ValueError("pairs must be stored with i < j")
        if np.any(dist <= 0) or np.any(dist > self.radius):
            raise ValueError("distances must lie in (0, radius]")
        pairs.setflags(write=False)
        dist.setflags(write=False)
        object.__setattr__(self, "pairs", pairs)
        object.__setattr__(self, "distances", dist)

    def __len__(self) -> int:
        return self.pairs.shape[0]


def xor_label(point) -> int:
    """1 iff the point's coordinates have strictly opposite signs."""
    x0, x1 = float(point[0]), float(point[1])
    return int(np.sign(x0) * np.sign(x1) < 0)


def gen_xor(n: int, noise_sd: float = 0.0, seed: int = 0) -> Dataset:
    """Uniform points on [-1, 1]^2 labeled by the sign rule, then jittered.

    Labels come from the clean positions; Gaussian feature noise of standard
    deviation ``noise_sd`` is added afterwards. Deterministic under ``seed``.
    """
    if n < 4:
        raise ValueError("gen_xor needs n >= 4")
    if noise_sd < 0:
        raise ValueError("noise_sd must be nonnegative")
    rng = np.random.default_rng(seed)
    base = rng.uniform(-1.0, 1.0, size=(n, 2))
    labels = (np.sign(base[:, 0]) * np.sign(base[:, 1]) < 0).astype(np.int64)
    x = base + noise_sd * rng.standard_normal((n, 2))
    return Dataset("xor", x, labels, ("x0", "x1"), standardized=False, num_classes=2)


IRIS_FEATURES = ("sepal_length", "sepal_width", "petal_length", "petal_width")


def load_iris(
    path: str | Path = "bundled",
    features: tuple[str, ...] | list[str] | None = None,
    standardize: bool = True,
) -> Dataset:
    """Load the Iris CSV (4 numeric columns + class, header optional).

    Class names map alphabetically to 0..2. ``features`` selects a named
    column subset. Per-feature standardization (zero mean, unit variance) is
    on by default and recorded on the Dataset.
    """
    if path == "bundled":
        text = resources.files("astute.data").joinpath("iris.csv").read_text("utf-8")
    else:
        text = Path(path).read_text("utf-8")

    rows = []
    class_names = []
    for lineno, record in enumerate(csv.reader(StringIO(text)), start=1):
        if not record or (len(record) == 1 and not record[0].strip()):
            continue
        if lineno == 1:
            try:
                float(record[0])
            except ValueError:
                continue  # header row
        if len(record) != 5:
            raise DatasetFormatError(
                f"line {lineno}: expected 5 columns, got {len(record)}"
            )
        try:
            values = [float(v) for v in record[:4]]
        except ValueError as exc:
            raise DatasetFormatError(f"line {lineno}: {exc}") from None
        rows.append(values)
        class_names.append(record[4].strip())

    if not rows:
        raise DatasetFormatError("no data rows found")
    x = np.asarray(rows, dtype=np.float64)
    ordered = sorted(set(class_names))
    labels = np.asarray([ordered.index(c) for c in class_names], dtype=np.int64)

    names = IRIS_FEATURES
    if features is not None:
        missing = [f for f in features if f not in IRIS_FEATURES]
        if missing:
            raise ValueError(f"unknown iris features {missing}; choose from {IRIS_FEATURES}")
        cols = [IRIS_FEATURES.index(f) for f in features]
        x = x[:, cols]
        names = tuple(features)

    if standardize:
        sd = x.std(axis=0)
        sd[sd == 0] = 1.0
        x = (x - x.mean(axis=0)) / sd
    return Dataset(
        "iris", x, labels, names, standardized=standardize, num_classes=len(ordered)
    )


_IDX_IMAGES_MAGIC = 0x00000803
_IDX_LABELS_MAGIC = 0x00000801


def _read_idx_bytes(path) -> bytes:
    data = Path(path).read_bytes()
    if data[:2] == b"\x1f\x8b":
        data = gzip.decompress(data)
    return data


def load_mnist(
    images_path,
    labels_path,
    limit: int = 500,
    downsample: int = 1,
) -> Dataset:
    """Load IDX image/label files into flat [0, 1] features.

    Big-endian IDX layout: images carry magic 0x00000803 then [n, rows, cols]
    and unsigned bytes; labels carry magic 0x00000801 then [n] bytes.
    ``downsample`` average-pools by that factor (e.g. 28 -> 14 for factor 2).
    A ``limit`` beyond the file count truncates with a warning.
    """
    if limit < 1:
        raise ValueError("limit must be >= 1")
    if downsample < 1:
        raise ValueError("downsample must be >= 1")

    img = _read_idx_bytes(images_path)
    if len(img) < 16:
        raise DatasetFormatError(f"{images_path}: truncated IDX header")
    magic, count, rows, cols = struct.unpack(">IIII", img[:16])
    if magic != _IDX_IMAGES_MAGIC:
        raise DatasetFormatError(
            f"{images_path}: bad image magic 0x{magic:08x}, expected 0x{_IDX_IMAGES_MAGIC:08x}"
        )
    if len(img) < 16 + count * rows * cols:
        raise DatasetFormatError(f"{images_path}: payload shorter than header promises")

    lab = _read_idx_bytes(labels_path)
    if len(lab) < 8:
        raise DatasetFormatError(f"{labels_path}: truncated IDX header")
    lmagic, lcount = struct.unpack(">II", lab[:8])
    if lmagic != _IDX_LABELS_MAGIC:
        raise DatasetFormatError(
            f"{labels_path}: bad label magic 0x{lmagic:08x}, expected 0x{_IDX_LABELS_MAGIC:08x}"
        )
    if lcount != count:
        raise DatasetFormatError(
            f"label count {lcount} does not match image count {count}"
        )
    if len(lab) < 8 + count:
        raise DatasetFormatError(f"{labels_path}: payload shorter than header promises")

    if limit > count:
        warnings.warn(
            f"limit {limit} exceeds file count {count}; truncating", stacklevel=2
        )
    take = min(limit, count)
    images = np.frombuffer(img, dtype=np.uint8, count=take * rows * cols, offset=16)
    x = images.astype(np.float64).reshape(take, rows, cols) / 255.0
    if downsample > 1:
        if rows % downsample or cols % downsample:
            raise ValueError(
                f"downsample {downsample} must divide image dims {rows}x{cols}"
            )
        r, c = rows // downsample, cols // downsample
        x = x.reshape(take, r, downsample, c, downsample).mean(axis=(2, 4))
    x = x.reshape(take, -1)
    labels = np.frombuffer(lab, dtype=np.uint8, count=take, offset=8).astype(np.int64)
    return Dataset("mnist", x, labels, None, standardized=False, num_classes=10)


def write_idx_images(path, images: np.ndarray) -> Path:
    """Write uint8 images of shape (n, rows, cols) in canonical IDX layout."""
    images = np.ascontiguousarray(images, dtype=np.uint8)
    if images.ndim != 3:
        raise ValueError("images must have shape (n, rows, cols)")
    n, rows, cols = images.shape
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "wb") as fh:
        fh.write(struct.pack(">IIII", _IDX_IMAGES_MAGIC, n, rows, cols))
        fh.write(images.tobytes())
    return path


def write_idx_labels(path, labels) -> Path:
    labels = np.ascontiguousarray(labels, dtype=np.uint8)
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "wb") as fh:
        fh.write(struct.pack(">II", _IDX_LABELS_MAGIC, labels.size))
        fh.write(labels.tobytes())
    return path


# 5x7 stroke glyphs for the synthetic digit corpus.
_GLYPHS = {
    0: (" ### ", "#   #", "#  ##", "# # #", "##  #", "#   #", " ### "),
    1: ("  #  ", " ##  ", "  #  ", "  #  ", "  #  ", "  #  ", " ### "),
    2: (" ### ", "#   #", "    #", "   # ", "  #  ", " #   ", "#####"),
    3: (" ### ", "#   #", "    #", "  ## ", "    #", "#   #", " ### "),
    4: ("   # ", "  ## ", " # # ", "#  # ", "#####", "   # ", "   # "),
    5: ("#####", "#    ", "#### ", "    #", "    #", "#   #", " ### "),
    6: ("  ## ", " #   ", "#    ", "#### ", "#   #", "#   #", " ### "),
    7: ("#####", "    #", "   # ", "  #  ", " #   ", " #   ", " #   "),
    8: (" ### ", "#   #", "#   #", " ### ", "#   #", "#   #", " ### "),
    9: (" ### ", "#   #", "#   #", " ####", "    #", "   # ", " ##  "),
}


def _box_blur(img: np.ndarray) -> np.ndarray:
    padded = np.pad(img, 1, mode="edge")
    acc = np.zeros_like(img)
    for dr in (0, 1, 2):
        for dc in (0, 1, 2):
            acc += padded[dr : dr + img.shape[0], dc : dc + img.shape[1]]
    return acc / 9.0


def gen_digits(n: int, seed: int = 0, side: int = 28) -> tuple[np.ndarray, np.ndarray]:
    """Synthetic digit-style images: jittered, blurred 5x7 stroke glyphs.

    Returns uint8 images of shape (n, side, side) and labels 0..9. Serves as
    an offline stand-in with the same shape, value range and IDX packaging
    as MNIST.
    """
    if side < 24:
        raise ValueError("side must be >= 24 to fit the glyphs")
    rng = np.random.default_rng(seed)
    labels = rng.integers(0, 10, size=n)
    images = np.zeros((n, side, side), dtype=np.uint8)
    scale = 3
    glyph_h, glyph_w = 7 * scale, 5 * scale
    for i, digit in enumerate(labels):
        bitmap = np.array(
            [[ch == "#" for ch in row] for row in _GLYPHS[int(digit)]], dtype=np.float64
        )
        canvas = np.zeros((side, side))
        big = np.kron(bitmap, np.ones((scale, scale)))
        big *= rng.uniform(0.7, 1.0)
        top = rng.integers(1, side - glyph_h - 1)
        left = rng.integers(1, side - glyph_w - 1)
        canvas[top : top + glyph_h, left : left + glyph_w] = big
        canvas = _box_blur(_box_blur(canvas))
        canvas += 0.04 * rng.standard_normal(canvas.shape)
        images[i] = np.clip(canvas * 255.0, 0, 255).astype(np.uint8)
    return images, labels.astype(np.int64)


def median_pairwise_distance(ds: Dataset) -> float:
    """Median of all n(n-1)/2 Euclidean distances between dataset points."""
    d2 = pairwise_sq_dist(ds.X)
    iu = np.triu_indices(ds.n, k=1)
    med = float(np.median(np.sqrt(d2[iu])))
    if med == 0.0:
        warnings.warn("degenerate dataset: median pairwise distance is 0", stacklevel=2)
    return med


def eligible_pairs(ds: Dataset, r: float) -> PairSet:
    """All unordered pairs with 0 < distance <= r, in (i, j) index order."""
    if r < 0:
        raise ValueError("r must be nonnegative")
    d2 = pairwise_sq_dist(ds.X)
    iu = np.triu_indices(ds.n, k=1)
    dist = np.sqrt(d2[iu])
    mask = (dist > 0) & (dist <= r)
    pairs = np.column_stack((iu[0][mask], iu[1][mask]))
    return PairSet(radius=float(r), pairs=pairs, distances=dist[mask])


def train_eval_split(ds: Dataset, eval_count: int, seed: int = 0) -> tuple[Dataset, Dataset]:
    """Seeded shuffle split into (train, eval) with ``eval_count`` held out."""
    if not 2 <= eval_count <= ds.n - 2:
        raise ValueError(f"eval_count must be in [2, {ds.n - 2}]")
    order = np.random.default_rng(seed).permutation(ds.n)
    return (
        ds.subset(np.sort(order[eval_count:]), "/train"),
        ds.subset(np.sort(order[:eval_count]), "/eval"),
    )
