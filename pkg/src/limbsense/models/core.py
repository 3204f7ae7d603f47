"""Model specs, standardization, training dispatch, and model files.

Feature standardization (training mean/sd, population variance) is applied
for the margin- and distance-based kinds; tree ensembles are split-invariant
and train on raw features. Model files are versioned JSON records whose
floats use shortest round-trip repr, so save/load is exact.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from ..errors import (
    DimensionMismatchError,
    IoFailureError,
    NonFiniteFeatureError,
    SingleClassTrainingError,
)
from .boosting import GradientBoostingModel
from .knn import KnnModel
from .logistic import LogisticModel
from .naive_bayes import NaiveBayesModel
from .forest import RandomForestModel
from .svm import LinearSvmModel

MODEL_FORMAT = "limbsense.model.v1"

MODEL_KINDS = (
    "logistic_regression",
    "naive_bayes",
    "knn",
    "random_forest",
    "gradient_boosting",
    "linear_svm",
)

_TRAINERS = {
    "logistic_regression": LogisticModel,
    "naive_bayes": NaiveBayesModel,
    "knn": KnnModel,
    "random_forest": RandomForestModel,
    "gradient_boosting": GradientBoostingModel,
    "linear_svm": LinearSvmModel,
}

# Kinds whose geometry depends on feature scale.
STANDARDIZED_KINDS = frozenset(
    {"logistic_regression", "naive_bayes", "knn", "linear_svm"}
)

ALLOWED_HYPERPARAMETERS = {
    "logistic_regression": frozenset({"reg"}),
    "naive_bayes": frozenset(),
    "knn": frozenset({"k"}),
    "random_forest": frozenset({"n_trees", "max_depth", "bootstrap"}),
    "gradient_boosting": frozenset({"n_rounds", "learning_rate", "depth"}),
    "linear_svm": frozenset({"reg", "n_epochs"}),
}

DEFAULT_GRIDS: dict[str, dict[str, list]] = {
    "logistic_regression": {"reg": [0.01, 0.1, 1.0]},
    "naive_bayes": {},
    "knn": {"k": [3, 5, 7, 9]},
    "random_forest": {"n_trees": [50, 100], "max_depth": [3, 5, None]},
    "gradient_boosting": {
        "n_rounds": [50, 100],
        "learning_rate": [0.05, 0.1],
        "depth": [1, 2],
    },
    "linear_svm": {"reg": [0.01, 0.1, 1.0]},
}


@dataclass(frozen=True)
class ModelSpec:
    kind: str
    hyperparameters: dict = field(default_factory=dict)

    def __post_init__(self) -> None:
        if self.kind not in MODEL_KINDS:
            raise ValueError(f"unknown model kind {self.kind!r}")
        unknown = set(self.hyperparameters) - ALLOWED_HYPERPARAMETERS[self.kind]
        if unknown:
            raise ValueError(
                f"{self.kind} does not accept hyperparameters {sorted(unknown)}"
            )


@dataclass(frozen=True)
class Standardizer:
    mean: np.ndarray
    sd: np.ndarray  # zero-variance dimensions carry divisor 1

    def __post_init__(self) -> None:
        self.mean.setflags(write=False)
        self.sd.setflags(write=False)

    @classmethod
    def fit(cls, X: np.ndarray) -> "Standardizer":
        if len(X) < 2:
            raise ValueError("standardizer needs at least 2 rows")
        sd = X.std(axis=0)
        sd = np.where(sd > 0.0, sd, 1.0)
        return cls(mean=X.mean(axis=0), sd=sd)

    def apply(self, X: np.ndarray) -> np.ndarray:
        return (X - self.mean) / self.sd

    def to_dict(self) -> dict:
        return {"mean": self.mean.tolist(), "sd": self.sd.tolist()}

    @classmethod
    def from_dict(cls, d: dict) -> "Standardizer":
        return cls(
            mean=np.asarray(d["mean"], dtype=np.float64),
            sd=np.asarray(d["sd"], dtype=np.float64),
        )


def standardize_fit(X: np.ndarray) -> Standardizer:
    return Standardizer.fit(X)


def standardize_apply(standardizer: Standardizer, X: np.ndarray) -> np.ndarray:
    return standardizer.apply(np.atleast_2d(np.asarray(X, dtype=np.float64)))


@dataclass(frozen=True)
class Dataset:
    """Rows of (patient id, feature vector, 0/1 label) for one window length."""

    patient_ids: tuple[str, ...]
    X: np.ndarray
    y: np.ndarray
    window_minutes: int

    def __post_init__(self) -> None:
        if self.X.ndim != 2 or not (
            len(self.X) == len(self.y) == len(self.patient_ids)
        ):
            raise ValueError("inconsistent dataset shapes")
        self.X.setflags(write=False)
        self.y.setflags(write=False)

    def __len__(self) -> int:
        return len(self.y)

    @property
    def patients(self) -> list[str]:
        return sorted(set(self.patient_ids))

    def subset(self, indices: np.ndarray) -> "Dataset":
        return Dataset(
            patient_ids=tuple(self.patient_ids[i] for i in indices),
            X=self.X[indices].copy(),
            y=self.y[indices].copy(),
            window_minutes=self.window_minutes,
        )


def _validate_training_rows(X: np.ndarray, y: np.ndarray, kind: str) -> None:
    if not np.all(np.isfinite(X)):
        raise NonFiniteFeatureError("training features contain NaN or infinity")
    classes = set(np.unique(y).tolist())
    if not classes <= {0, 1}:
        raise ValueError(f"labels must be 0/1, got {sorted(classes)}")
    if len(classes) < 2 and kind != "knn":
        raise SingleClassTrainingError(f"{kind} needs both classes to train")


@dataclass
class TrainedModel:
    spec: ModelSpec
    standardizer: Standardizer | None
    model: object
    n_features: int
    seed: int
    metadata: dict = field(default_factory=dict)

    def score_rows(self, X: np.ndarray) -> np.ndarray:
        X = np.atleast_2d(np.asarray(X, dtype=np.float64))
        if X.shape[1] != self.n_features:
            raise DimensionMismatchError(
                f"expected {self.n_features} features, got {X.shape[1]}"
            )
        if self.standardizer is not None:
            X = self.standardizer.apply(X)
        return self.model.raw_score(X)

    def to_dict(self) -> dict:
        return {
            "format": MODEL_FORMAT,
            "kind": self.spec.kind,
            "hyperparameters": self.spec.hyperparameters,
            "standardizer": None
            if self.standardizer is None
            else self.standardizer.to_dict(),
            "params": self.model.to_dict(),
            "n_features": self.n_features,
            "seed": self.seed,
            "metadata": self.metadata,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "TrainedModel":
        if d.get("format") != MODEL_FORMAT:
            raise ValueError(f"unsupported model format {d.get('format')!r}")
        kind = d["kind"]
        return cls(
            spec=ModelSpec(kind=kind, hyperparameters=d["hyperparameters"]),
            standardizer=None
            if d["standardizer"] is None
            else Standardizer.from_dict(d["standardizer"]),
            model=_TRAINERS[kind].from_dict(d["params"]),
            n_features=int(d["n_features"]),
            seed=int(d["seed"]),
            metadata=d.get("metadata", {}),
        )


def train_model(
    spec: ModelSpec, X: np.ndarray, y: np.ndarray, seed: int
) -> TrainedModel:
    """Fit one classifier; standardization is handled per kind internally."""
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.int64)
    _validate_training_rows(X, y, spec.kind)
    standardizer = None
    if spec.kind in STANDARDIZED_KINDS:
        standardizer = Standardizer.fit(X)
        X = standardizer.apply(X)
    model = _TRAINERS[spec.kind].fit(X, y, seed, **spec.hyperparameters)
    return TrainedModel(
        spec=spec,
        standardizer=standardizer,
        model=model,
        n_features=X.shape[1],
        seed=seed,
    )


def score(model: TrainedModel, row: np.ndarray) -> float:
    """Severity score of one row; higher means more severe."""
    return float(model.score_rows(np.asarray(row, dtype=np.float64)[np.newaxis, :])[0])


def model_to_json(model: TrainedModel) -> str:
    return json.dumps(model.to_dict(), sort_keys=True, indent=1) + "\n"


def save_model(model: TrainedModel, path: Path) -> None:
    try:
        Path(path).write_text(model_to_json(model), encoding="utf-8")
    except OSError as exc:
        raise IoFailureError(f"cannot write model file {path}: {exc}") from exc


def load_model(path: Path) -> TrainedModel:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise IoFailureError(f"cannot read model file {path}: {exc}") from exc
    return TrainedModel.from_dict(json.loads(text))
