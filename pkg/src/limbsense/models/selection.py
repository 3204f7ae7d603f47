"""Patient-level splitting, grouped cross-validation, and grid search."""

from __future__ import annotations

import itertools
import logging
from dataclasses import dataclass

import numpy as np

from ..errors import (
    DegenerateSplitError,
    LimbsenseError,
    SingleClassLabelsError,
    TooFewGroupsError,
)
from ..metrics import roc_curve
from .core import Dataset, ModelSpec, train_model

log = logging.getLogger(__name__)


def split_patients(
    patients: list[str], train_fraction: float, seed: int
) -> tuple[list[str], list[str]]:
    """Shuffle the sorted patient list and cut at floor(fraction * n)."""
    ordered = sorted(patients)
    if len(ordered) < 2:
        raise DegenerateSplitError("need at least 2 distinct patients")
    rng = np.random.default_rng(seed)
    permuted = [ordered[i] for i in rng.permutation(len(ordered))]
    n_train = int(train_fraction * len(ordered))
    return permuted[:n_train], permuted[n_train:]


def patient_split(
    dataset: Dataset, train_fraction: float = 0.8, seed: int = 0
) -> tuple[Dataset, Dataset]:
    """Split rows by patient; no patient appears on both sides."""
    train_patients, test_patients = split_patients(
        dataset.patients, train_fraction, seed
    )
    ids = np.asarray(dataset.patient_ids)
    train_mask = np.isin(ids, train_patients)
    train = dataset.subset(np.nonzero(train_mask)[0])
    test = dataset.subset(np.nonzero(~train_mask)[0])
    if len(train) == 0 or len(test) == 0:
        raise DegenerateSplitError(
            f"split left {len(train)} train / {len(test)} test rows"
        )
    if len(np.unique(train.y)) < 2:
        raise DegenerateSplitError("training side holds a single class")
    return train, test


def kfold(
    dataset: Dataset,
    k: int = 5,
    seed: int = 0,
    group_by_patient: bool = True,
) -> list[tuple[np.ndarray, np.ndarray]]:
    """Disjoint, exhaustive (train_idx, val_idx) folds by seeded shuffle.

    Grouped folds partition patients, so no patient straddles a fold
    boundary; the ungrouped mode partitions rows directly.
    """
    rng = np.random.default_rng(seed)
    if group_by_patient:
        patients = dataset.patients
        if len(patients) < k:
            raise TooFewGroupsError(f"{len(patients)} patients < {k} folds")
        permuted = [patients[i] for i in rng.permutation(len(patients))]
        chunks = _near_equal_chunks(permuted, k)
        ids = np.asarray(dataset.patient_ids)
        folds = []
        for chunk in chunks:
            val_mask = np.isin(ids, chunk)
            folds.append((np.nonzero(~val_mask)[0], np.nonzero(val_mask)[0]))
        return folds
    if len(dataset) < k:
        raise TooFewGroupsError(f"{len(dataset)} rows < {k} folds")
    permuted_rows = rng.permutation(len(dataset))
    chunks = _near_equal_chunks(list(permuted_rows), k)
    folds = []
    for chunk in chunks:
        val_idx = np.sort(np.asarray(chunk))
        train_idx = np.setdiff1d(np.arange(len(dataset)), val_idx)
        folds.append((train_idx, val_idx))
    return folds


def _near_equal_chunks(items: list, k: int) -> list[list]:
    """First (n mod k) chunks get one extra item."""
    base, extra = divmod(len(items), k)
    chunks = []
    start = 0
    for i in range(k):
        size = base + (1 if i < extra else 0)
        chunks.append(items[start : start + size])
        start += size
    return chunks


@dataclass(frozen=True)
class GridEntry:
    spec: ModelSpec
    fold_aucs: tuple[float, ...]  # NaN marks a fold with single-class validation
    mean_auc: float


def expand_grid(kind: str, grid: dict[str, list]) -> list[ModelSpec]:
    """Cartesian product of the per-parameter value lists, in declared order."""
    if not grid:
        return [ModelSpec(kind=kind)]
    names = list(grid)
    specs = []
    for values in itertools.product(*(grid[name] for name in names)):
        specs.append(ModelSpec(kind=kind, hyperparameters=dict(zip(names, values))))
    return specs


def grid_search(
    kind: str,
    grid: dict[str, list],
    dataset: Dataset,
    k: int = 5,
    seed: int = 0,
    group_by_patient: bool = True,
) -> tuple[ModelSpec, list[GridEntry]]:
    """Pick the spec with the best mean validation AUC over k folds.

    Ties keep the earliest spec in grid order. A combination whose training
    fails scores -inf and is logged rather than aborting the search.
    """
    specs = expand_grid(kind, grid)
    folds = kfold(dataset, k=k, seed=seed, group_by_patient=group_by_patient)
    table = []
    for spec in specs:
        fold_aucs = []
        failed = False
        for train_idx, val_idx in folds:
            try:
                model = train_model(
                    spec, dataset.X[train_idx], dataset.y[train_idx], seed
                )
            except (LimbsenseError, ValueError) as exc:
                log.warning("grid combination %s failed: %s", spec, exc)
                failed = True
                break
            try:
                scores = model.score_rows(dataset.X[val_idx])
                fold_aucs.append(roc_curve(scores, dataset.y[val_idx]).auc)
            except SingleClassLabelsError:
                fold_aucs.append(float("nan"))
        if failed or not np.any(np.isfinite(fold_aucs)):
            mean_auc = float("-inf")
            fold_aucs += [float("nan")] * (len(folds) - len(fold_aucs))
        else:
            mean_auc = float(np.nanmean(fold_aucs))
        table.append(
            GridEntry(spec=spec, fold_aucs=tuple(fold_aucs), mean_auc=mean_auc)
        )
    best = max(range(len(table)), key=lambda i: table[i].mean_auc)
    if table[best].mean_auc == float("-inf"):
        raise DegenerateSplitError(f"every {kind} grid combination failed")
    return table[best].spec, table


__all__ = [
    "GridEntry",
    "expand_grid",
    "grid_search",
    "kfold",
    "patient_split",
    "split_patients",
]
