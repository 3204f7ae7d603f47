"""Six binary severity classifiers with patient-grouped model selection."""

from .core import (
    ALLOWED_HYPERPARAMETERS,
    DEFAULT_GRIDS,
    MODEL_KINDS,
    STANDARDIZED_KINDS,
    Dataset,
    ModelSpec,
    Standardizer,
    TrainedModel,
    load_model,
    model_to_json,
    save_model,
    score,
    standardize_apply,
    standardize_fit,
    train_model,
)
from .selection import (
    GridEntry,
    expand_grid,
    grid_search,
    kfold,
    patient_split,
    split_patients,
)

__all__ = [
    "ALLOWED_HYPERPARAMETERS",
    "DEFAULT_GRIDS",
    "MODEL_KINDS",
    "STANDARDIZED_KINDS",
    "Dataset",
    "GridEntry",
    "ModelSpec",
    "Standardizer",
    "TrainedModel",
    "expand_grid",
    "grid_search",
    "kfold",
    "load_model",
    "model_to_json",
    "patient_split",
    "save_model",
    "score",
    "split_patients",
    "standardize_apply",
    "standardize_fit",
    "train_model",
]
