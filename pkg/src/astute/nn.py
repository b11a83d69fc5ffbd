"""Small fully-connected networks with manual backpropagation.

Supports softmax classifiers and identity-output regressors (used as
autoencoders), relu/tanh/gaussian activations, input gradients for the
gradient-based explainers, per-layer embeddings, the spectral-norm product
upper bound on the Lipschitz constant, and PSNR for reconstructions.

Forward and backward passes are vectorized over row batches. ``train``
returns a new model; nothing here mutates its inputs.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .datasets import Dataset
from .ioutil import fmt
from .linalg import spectral_norm

ACTIVATIONS = ("relu", "tanh", "gaussian")
OUTPUT_MODES = ("softmax_classifier", "identity_regressor")
LOSSES = ("cross_entropy", "mse")

MODEL_SCHEMA = "astute-mlp/1"


class DivergedTrainingError(RuntimeError):
    """Training produced a non-finite loss."""


@dataclass
class Mlp:
    """Sequence of affine layers with a shared activation.

    ``weights[k]`` has shape (out_k, in_k); the activation is applied after
    every layer except the last. ``softmax_classifier`` ends in a softmax,
    ``identity_regressor`` returns the last affine output unchanged.
    """

    weights: list[np.ndarray]
    biases: list[np.ndarray]
    activation: str = "relu"
    activation_param: float | None = None
    output_mode: str = "softmax_classifier"

    def __post_init__(self):
        if self.activation not in ACTIVATIONS:
            raise ValueError(f"unknown activation {self.activation!r}")
        if self.output_mode not in OUTPUT_MODES:
            raise ValueError(f"unknown output mode {self.output_mode!r}")
        if self.activation == "gaussian":
            if not self.activation_param:
                raise ValueError("gaussian activation needs a nonzero parameter")
        if len(self.weights) != len(self.biases) or not self.weights:
            raise ValueError("need matching, nonempty weight/bias lists")
        self.weights = [np.asarray(w, dtype=np.float64) for w in self.weights]
        self.biases = [np.asarray(b, dtype=np.float64) for b in self.biases]
        for k, (w, b) in enumerate(zip(self.weights, self.biases)):
            if w.ndim != 2 or b.shape != (w.shape[0],):
                raise ValueError(f"layer {k}: weight/bias shapes incompatible")
            if k > 0 and w.shape[1] != self.weights[k - 1].shape[0]:
                raise ValueError(f"layer {k}: input dim does not match layer {k - 1}")

    @property
    def depth(self) -> int:
        return len(self.weights)

    @property
    def input_dim(self) -> int:
        return self.weights[0].shape[1]

    @property
    def output_dim(self) -> int:
        return self.weights[-1].shape[0]

    def copy(self) -> "Mlp":
        return Mlp(
            [w.copy() for w in self.weights],
            [b.copy() for b in self.biases],
            self.activation,
            self.activation_param,
            self.output_mode,
        )


@dataclass(frozen=True)
class TrainConfig:
    epochs: int = 300
    batch_size: int = 32
    learning_rate: float = 0.1
    seed: int = 0
    loss: str = "cross_entropy"

    def __post_init__(self):
        if self.epochs < 1:
            raise ValueError("epochs must be >= 1")
        if self.batch_size < 1:
            raise ValueError("batch_size must be >= 1")
        if self.learning_rate < 0:
            raise ValueError("learning_rate must be nonnegative")
        if self.loss not in LOSSES:
            raise ValueError(f"unknown loss {self.loss!r}")


def init_mlp(
    layer_dims,
    activation: str = "relu",
    output_mode: str = "softmax_classifier",
    seed: int = 0,
    activation_param: float | None = None,
    init_scale: float = 1.0,
) -> Mlp:
    """Seeded symmetric-uniform init scaled by init_scale / sqrt(fan_in)."""
    dims = list(layer_dims)
    if len(dims) < 2:
        raise ValueError("need at least input and output dims")
    rng = np.random.default_rng(seed)
    weights, biases = [], []
    for fan_in, fan_out in zip(dims[:-1], dims[1:]):
        bound = init_scale / math.sqrt(fan_in)
        weights.append(rng.uniform(-bound, bound, size=(fan_out, fan_in)))
        biases.append(np.zeros(fan_out))
    return Mlp(weights, biases, activation, activation_param, output_mode)


def _act(z: np.ndarray, name: str, a: float | None) -> np.ndarray:
    if name == "relu":
        return np.maximum(z, 0.0)
    if name == "tanh":
        return np.tanh(z)
    return np.exp(-0.5 * (z / a) ** 2)


def _act_deriv(z: np.ndarray, name: str, a: float | None) -> np.ndarray:
    if name == "relu":
        return (z > 0).astype(np.float64)  # subgradient at 0 defined as 0
    if name == "tanh":
        t = np.tanh(z)
        return 1.0 - t * t
    return -(z / (a * a)) * np.exp(-0.5 * (z / a) ** 2)


def activation_lipschitz(name: str, a: float | None = None) -> float:
    """Per-layer Lipschitz factor of the activation (max |derivative|)."""
    if name in ("relu", "tanh"):
        return 1.0
    return math.exp(-0.5) / abs(a)


def _softmax(z: np.ndarray) -> np.ndarray:
    shifted = z - z.max(axis=1, keepdims=True)
    e = np.exp(shifted)
    return e / e.sum(axis=1, keepdims=True)


def _forward_trace(m: Mlp, x: np.ndarray):
    """Return (pre-activations per layer, hidden activations incl. input, output)."""
    a = x
    pre = []
    hidden = [x]
    for k in range(m.depth):
        z = a @ m.weights[k].T + m.biases[k]
        pre.append(z)
        if k < m.depth - 1:
            a = _act(z, m.activation, m.activation_param)
            hidden.append(a)
    out = _softmax(pre[-1]) if m.output_mode == "softmax_classifier" else pre[-1]
    return pre, hidden, out


def forward_batch(m: Mlp, x) -> np.ndarray:
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 2 or x.shape[1] != m.input_dim:
        raise ValueError(f"expected (n, {m.input_dim}) inputs, got {x.shape}")
    return _forward_trace(m, x)[2]


def forward(m: Mlp, x) -> np.ndarray:
    """Model output for one point: softmax probabilities or raw outputs."""
    x = np.asarray(x, dtype=np.float64)
    if x.shape != (m.input_dim,):
        raise ValueError(f"expected a length-{m.input_dim} vector, got {x.shape}")
    return forward_batch(m, x[None, :])[0]


def input_gradient_batch(m: Mlp, x, class_indices) -> np.ndarray:
    """Row-wise gradient of the selected output w.r.t. each input row.

    For classifiers the selected output is the post-softmax probability of
    ``class_indices[i]``; for regressors it is the raw output coordinate.
    """
    x = np.asarray(x, dtype=np.float64)
    idx = np.asarray(class_indices, dtype=np.int64)
    if idx.ndim == 0:
        idx = np.full(x.shape[0], int(idx))
    if np.any(idx < 0) or np.any(idx >= m.output_dim):
        raise ValueError(f"class index out of range [0, {m.output_dim})")
    pre, _, out = _forward_trace(m, x)
    n = x.shape[0]
    rows = np.arange(n)
    if m.output_mode == "softmax_classifier":
        p = out
        pt = p[rows, idx]
        dz = -p * pt[:, None]
        dz[rows, idx] += pt
    else:
        dz = np.zeros((n, m.output_dim))
        dz[rows, idx] = 1.0
    for k in range(m.depth - 1, 0, -1):
        da = dz @ m.weights[k]
        dz = da * _act_deriv(pre[k - 1], m.activation, m.activation_param)
    return dz @ m.weights[0]


def input_gradient(m: Mlp, x, class_index: int) -> np.ndarray:
    x = np.asarray(x, dtype=np.float64)
    return input_gradient_batch(m, x[None, :], class_index)[0]


def train(m: Mlp, ds: Dataset, cfg: TrainConfig) -> tuple[Mlp, list[float]]:
    """Mini-batch SGD; returns (trained copy, per-epoch mean loss).

    ``cross_entropy`` trains against ``ds.labels`` (classifier mode);
    ``mse`` trains the model to reconstruct its input (autoencoder use).
    Deterministic given the initial model and ``cfg.seed``.
    """
    model = m.copy()
    x = ds.X
    if cfg.loss == "cross_entropy":
        if model.output_mode != "softmax_classifier":
            raise ValueError("cross_entropy requires a softmax classifier")
        if model.output_dim < ds.num_classes:
            raise ValueError("output dim smaller than the number of classes")
        targets = ds.labels
    else:
        if model.output_dim != ds.dim:
            raise ValueError("mse reconstruction needs output dim == input dim")
        targets = x
    rng = np.random.default_rng(cfg.seed)
    losses: list[float] = []
    n = ds.n
    # a diverging run overflows before the loss check catches it; keep that
    # silent and surface it as DivergedTrainingError below
    with np.errstate(over="ignore", invalid="ignore"):
        return _sgd_loop(model, x, targets, cfg, rng, losses, n)


def _sgd_loop(model, x, targets, cfg, rng, losses, n):
    for epoch in range(cfg.epochs):
        order = rng.permutation(n)
        total = 0.0
        for start in range(0, n, cfg.batch_size):
            batch = order[start : start + cfg.batch_size]
            xb = x[batch]
            bsz = len(batch)
            pre, hidden, out = _forward_trace(model, xb)
            if cfg.loss == "cross_entropy":
                yb = targets[batch]
                picked = np.clip(out[np.arange(bsz), yb], 1e-300, None)
                total += float(-np.log(picked).sum())
                dz = out.copy()
                dz[np.arange(bsz), yb] -= 1.0
                dz /= bsz
            else:
                diff = out - targets[batch]
                total += float(np.mean(diff * diff, axis=1).sum())
                dz = 2.0 * diff / (bsz * model.output_dim)
            for k in range(model.depth - 1, -1, -1):
                dw = dz.T @ hidden[k]
                db = dz.sum(axis=0)
                if k > 0:
                    da = dz @ model.weights[k]
                    dz = da * _act_deriv(
                        pre[k - 1], model.activation, model.activation_param
                    )
                model.weights[k] -= cfg.learning_rate * dw
                model.biases[k] -= cfg.learning_rate * db
        mean_loss = total / n
        if not math.isfinite(mean_loss):
            raise DivergedTrainingError(f"training diverged at epoch {epoch}")
        losses.append(mean_loss)
    return model, losses


def accuracy(m: Mlp, ds: Dataset) -> float:
    preds = forward_batch(m, ds.X).argmax(axis=1)
    return float(np.mean(preds == ds.labels))


def layer_embedding(m: Mlp, ds: Dataset, layer_k: int) -> np.ndarray:
    """Post-activation values at layer ``layer_k`` for every dataset point.

    layer 0 is the input matrix itself; layer ``depth`` is the model output.
    """
    if not 0 <= layer_k <= m.depth:
        raise ValueError(f"layer_k must be in [0, {m.depth}]")
    if layer_k == 0:
        return ds.X.copy()
    pre, hidden, out = _forward_trace(m, ds.X)
    if layer_k == m.depth:
        return out
    return hidden[layer_k]


def lipschitz_upper_bound(m: Mlp) -> float:
    """Product of layer spectral norms times activation Lipschitz factors."""
    bound = 1.0
    for w in m.weights:
        bound *= spectral_norm(w).value
    factor = activation_lipschitz(m.activation, m.activation_param)
    return bound * factor ** (m.depth - 1)


def psnr(original, reconstruction, max_val: float = 1.0) -> float:
    """Peak signal-to-noise ratio in dB; +inf for a perfect reconstruction."""
    original = np.asarray(original, dtype=np.float64)
    reconstruction = np.asarray(reconstruction, dtype=np.float64)
    if original.shape != reconstruction.shape:
        raise ValueError("original and reconstruction must have equal shapes")
    if max_val <= 0:
        raise ValueError("max_val must be positive")
    mse = float(np.mean((original - reconstruction) ** 2))
    if mse == 0.0:
        return math.inf
    return 10.0 * math.log10(max_val * max_val / mse)


def save_mlp(m: Mlp, path) -> Path:
    """Write the model as versioned JSON with 17-significant-digit decimals."""
    doc = {
        "schema": MODEL_SCHEMA,
        "activation": m.activation,
        "activation_param": None
        if m.activation_param is None
        else fmt(m.activation_param),
        "output_mode": m.output_mode,
        "layers": [
            {
                "shape": list(w.shape),
                "weights": [fmt(v) for v in w.ravel()],
                "biases": [fmt(v) for v in b],
            }
            for w, b in zip(m.weights, m.biases)
        ],
    }
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(doc, indent=1), encoding="utf-8")
    return path


def load_mlp(path) -> Mlp:
    doc = json.loads(Path(path).read_text(encoding="utf-8"))
    if doc.get("schema") != MODEL_SCHEMA:
        raise ValueError(f"unsupported model schema {doc.get('schema')!r}")
    weights, biases = [], []
    for layer in doc["layers"]:
        shape = tuple(layer["shape"])
        weights.append(np.array([float(v) for v in layer["weights"]]).reshape(shape))
        biases.append(np.array([float(v) for v in layer["biases"]]))
    param = doc["activation_param"]
    return Mlp(
        weights,
        biases,
        doc["activation"],
        None if param is None else float(param),
        doc["output_mode"],
    )
