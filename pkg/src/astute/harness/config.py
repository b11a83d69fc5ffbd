"""TOML experiment configs with a strict, versioned schema.

Unknown keys are rejected by name; enum-like fields are validated on
construction. The parsed raw table is kept alongside the typed config so the
manifest can hash a canonical form of exactly what the user wrote.
"""
from __future__ import annotations

import dataclasses
import sys
from dataclasses import dataclass, field
from pathlib import Path

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

SCHEMA_VERSION = 1

DATASET_KINDS = ("xor", "iris", "mnist")
ACTIVATIONS = ("relu", "tanh", "gaussian")
LOSSES = ("cross_entropy", "mse")
SPLITS = ("train", "eval", "all")
R_POLICIES = ("median", "fixed")
EXPLAINER_NAMES = ("ig", "lime", "shap", "sg")
MODEL_DEPTHS = (2, 4, 8, 16)


class ConfigError(ValueError):
    """The config file violates the schema."""


@dataclass(frozen=True)
class DatasetConfig:
    kind: str = "xor"
    # xor
    n: int = 300
    noise_sd: float = 0.05
    # iris
    path: str = "bundled"
    features: tuple[str, ...] | None = None
    standardize: bool = True
    # mnist (IDX files)
    images: str | None = None
    labels: str | None = None
    limit: int = 700
    downsample: int = 2
    # split
    eval_count: int = 100

    def __post_init__(self):
        if self.kind not in DATASET_KINDS:
            raise ConfigError(f"dataset.kind must be one of {DATASET_KINDS}")
        if self.kind == "mnist" and (self.images is None or self.labels is None):
            raise ConfigError("dataset.images and dataset.labels are required for mnist")
        if self.eval_count < 2:
            raise ConfigError("dataset.eval_count must be >= 2")


@dataclass(frozen=True)
class ModelConfig:
    depth: int = 2
    width: int = 16
    activation: str = "relu"
    activation_param: float | None = None

    def __post_init__(self):
        if self.depth not in MODEL_DEPTHS:
            raise ConfigError(f"model.depth must be one of {MODEL_DEPTHS}")
        if self.width < 1:
            raise ConfigError("model.width must be >= 1")
        if self.activation not in ACTIVATIONS:
            raise ConfigError(f"model.activation must be one of {ACTIVATIONS}")
        if self.activation == "gaussian" and not self.activation_param:
            raise ConfigError("model.activation_param required for gaussian activation")


@dataclass(frozen=True)
class TrainSection:
    epochs: int = 200
    batch_size: int = 16
    learning_rate: float = 0.1
    loss: str = "cross_entropy"

    def __post_init__(self):
        if self.epochs < 1:
            raise ConfigError("train.epochs must be >= 1")
        if self.batch_size < 1:
            raise ConfigError("train.batch_size must be >= 1")
        if self.learning_rate <= 0:
            raise ConfigError("train.learning_rate must be positive")
        if self.loss not in LOSSES:
            raise ConfigError(f"train.loss must be one of {LOSSES}")


@dataclass(frozen=True)
class IgSection:
    steps: int = 64
    baseline: str = "zero"

    def __post_init__(self):
        if self.steps < 1:
            raise ConfigError("explainers.ig.steps must be >= 1")
        if self.baseline != "zero":
            raise ConfigError("explainers.ig.baseline supports only 'zero'")


@dataclass(frozen=True)
class SgSection:
    num_samples: int = 50
    sd: float | None = None  # None: 0.1 x feature range


@dataclass(frozen=True)
class LimeSection:
    num_samples: int = 100
    sd: float | None = None  # None: median distance / sqrt(d)
    kernel_sigma: float | None = None  # None: median distance
    ridge: float = 0.0


@dataclass(frozen=True)
class ShapSection:
    num_coalitions: int | None = None  # None: 2d + 64


@dataclass(frozen=True)
class ExplainersSection:
    ig: IgSection = field(default_factory=IgSection)
    sg: SgSection = field(default_factory=SgSection)
    lime: LimeSection = field(default_factory=LimeSection)
    shap: ShapSection = field(default_factory=ShapSection)


@dataclass(frozen=True)
class RobustnessSection:
    r_policy: str = "median"
    r_value: float | None = None
    grid_size: int = 256
    split: str = "eval"
    explainers: tuple[str, ...] = ("ig", "lime", "shap")

    def __post_init__(self):
        if self.r_policy not in R_POLICIES:
            raise ConfigError(f"robustness.r_policy must be one of {R_POLICIES}")
        if self.r_policy == "fixed" and (self.r_value is None or self.r_value <= 0):
            raise ConfigError("robustness.r_value must be > 0 when r_policy is fixed")
        if self.grid_size < 2:
            raise ConfigError("robustness.grid_size must be >= 2")
        if self.split not in SPLITS:
            raise ConfigError(f"robustness.split must be one of {SPLITS}")
        for name in self.explainers:
            if name not in EXPLAINER_NAMES:
                raise ConfigError(f"unknown explainer {name!r} in robustness.explainers")


@dataclass(frozen=True)
class ExplainSection:
    model: str = ""
    explainer: str = "ig"
    split: str = "eval"

    def __post_init__(self):
        if not self.model:
            raise ConfigError("explain.model (a model file path) is required")
        if self.explainer not in EXPLAINER_NAMES:
            raise ConfigError(f"explain.explainer must be one of {EXPLAINER_NAMES}")
        if self.split not in SPLITS:
            raise ConfigError(f"explain.split must be one of {SPLITS}")


@dataclass(frozen=True)
class StablerankSection:
    layers: tuple[int, ...] | None = None  # None: every layer 0..depth
    split: str = "eval"

    def __post_init__(self):
        if self.split not in SPLITS:
            raise ConfigError(f"stablerank.split must be one of {SPLITS}")


@dataclass(frozen=True)
class VerifySection:
    explainers: tuple[str, ...] = ("ig", "lime", "sg")
    l_grid: tuple[float, ...] | None = None  # None: empirical max ratio (alpha = 0)
    split: str = "eval"

    def __post_init__(self):
        for name in self.explainers:
            if name not in ("ig", "lime", "sg"):
                raise ConfigError(
                    f"verify.explainers supports ig/lime/sg, got {name!r}"
                )
        if self.split not in SPLITS:
            raise ConfigError(f"verify.split must be one of {SPLITS}")


@dataclass(frozen=True)
class AutoencoderSection:
    bottleneck: int = 32
    sharp_a: float = 0.05
    distorted_a: float = 0.5
    epochs: int = 250
    batch_size: int = 16
    learning_rate: float = 0.2
    grid_size: int = 256

    def __post_init__(self):
        if self.bottleneck < 1:
            raise ConfigError("autoencoder.bottleneck must be >= 1")
        if self.sharp_a <= 0 or self.distorted_a <= 0:
            raise ConfigError("autoencoder activation parameters must be positive")


@dataclass(frozen=True)
class ExperimentConfig:
    dataset: DatasetConfig
    model: ModelConfig = field(default_factory=ModelConfig)
    train: TrainSection = field(default_factory=TrainSection)
    explainers: ExplainersSection = field(default_factory=ExplainersSection)
    robustness: RobustnessSection = field(default_factory=RobustnessSection)
    explain: ExplainSection | None = None
    stablerank: StablerankSection = field(default_factory=StablerankSection)
    verify: VerifySection = field(default_factory=VerifySection)
    autoencoder: AutoencoderSection = field(default_factory=AutoencoderSection)
    seeds: tuple[int, ...] = (0, 1, 2, 3, 4)
    out_dir: str = "runs/out"
    raw: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        if not self.seeds:
            raise ConfigError("at least one seed is required")


_SECTION_TYPES = {
    "dataset": DatasetConfig,
    "model": ModelConfig,
    "train": TrainSection,
    "robustness": RobustnessSection,
    "explain": ExplainSection,
    "stablerank": StablerankSection,
    "verify": VerifySection,
    "autoencoder": AutoencoderSection,
}

_EXPLAINER_SECTION_TYPES = {
    "ig": IgSection,
    "sg": SgSection,
    "lime": LimeSection,
    "shap": ShapSection,
}


def _build_section(section_name: str, cls, table):
    if not isinstance(table, dict):
        raise ConfigError(f"[{section_name}] must be a table")
    known = {f.name for f in dataclasses.fields(cls)}
    kwargs = {}
    for key, value in table.items():
        if key not in known:
            raise ConfigError(f"unknown key '{section_name}.{key}'")
        if isinstance(value, list):
            value = tuple(value)
        elif isinstance(value, int) and not isinstance(value, bool):
            # TOML writes whole numbers as ints even for float fields
            default = cls.__dataclass_fields__[key].default
            if isinstance(default, float):
                value = float(value)
        kwargs[key] = value
    try:
        return cls(**kwargs)
    except ConfigError:
        raise
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"[{section_name}]: {exc}") from None


def parse_config(raw: dict) -> ExperimentConfig:
    """Validate a parsed TOML table into an ExperimentConfig."""
    if not isinstance(raw, dict):
        raise ConfigError("config root must be a table")
    table = dict(raw)
    version = table.pop("schema_version", None)
    if version != SCHEMA_VERSION:
        raise ConfigError(
            f"schema_version must be {SCHEMA_VERSION}, got {version!r}"
        )
    kwargs = {}
    seeds = table.pop("seeds", None)
    if seeds is not None:
        if not isinstance(seeds, list) or not all(isinstance(s, int) for s in seeds):
            raise ConfigError("seeds must be a list of integers")
        kwargs["seeds"] = tuple(seeds)
    out_dir = table.pop("out_dir", None)
    if out_dir is not None:
        kwargs["out_dir"] = str(out_dir)

    explainers_table = table.pop("explainers", None)
    if explainers_table is not None:
        if not isinstance(explainers_table, dict):
            raise ConfigError("[explainers] must be a table")
        sub = {}
        for key, sub_table in explainers_table.items():
            if key not in _EXPLAINER_SECTION_TYPES:
                raise ConfigError(f"unknown key 'explainers.{key}'")
            sub[key] = _build_section(
                f"explainers.{key}", _EXPLAINER_SECTION_TYPES[key], sub_table
            )
        kwargs["explainers"] = ExplainersSection(**sub)

    for name, sub_table in table.items():
        if name not in _SECTION_TYPES:
            raise ConfigError(f"unknown key '{name}'")
        kwargs[name] = _build_section(name, _SECTION_TYPES[name], sub_table)

    if "dataset" not in kwargs:
        raise ConfigError("a [dataset] section is required")
    return ExperimentConfig(raw=dict(raw), **kwargs)


def load_config(path) -> ExperimentConfig:
    path = Path(path)
    try:
        raw = tomllib.loads(path.read_text(encoding="utf-8"))
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"{path}: {exc}") from None
    return parse_config(raw)
