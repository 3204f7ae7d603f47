"""Test-set evaluation report and its delimited artifacts.

report.csv carries one row per (model, window) cell with AUCs printed at
3 decimals; roc_points.csv carries every tie-collapsed ROC point at full
precision; grid_table.csv retains the complete grid-search table.
"""

from __future__ import annotations

import csv
import io
import logging
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import IoFailureError, SingleClassLabelsError
from .metrics import RocCurve, roc_curve
from .models import Dataset, GridEntry, TrainedModel

log = logging.getLogger(__name__)

REPORT_COLUMNS = (
    "model",
    "window_minutes",
    "test_auc",
    "cv_mean_auc",
    "best_params",
    "n_test_rows",
    "seed",
)
ROC_POINT_COLUMNS = ("model", "window_minutes", "threshold", "fpr", "tpr")
GRID_TABLE_COLUMNS = ("model", "window_minutes", "params", "fold_aucs", "mean_auc")


def format_params(params: dict) -> str:
    """Canonical one-line rendering, e.g. ``max_depth=none;n_trees=50``."""
    if not params:
        return "-"
    parts = []
    for name in sorted(params):
        value = params[name]
        if value is None:
            rendered = "none"
        elif isinstance(value, bool):
            rendered = str(value).lower()
        elif isinstance(value, float):
            rendered = f"{value:g}"
        else:
            rendered = str(value)
        parts.append(f"{name}={rendered}")
    return ";".join(parts)


@dataclass(frozen=True)
class EvalCell:
    """One (model kind, window length) entry of the evaluation report."""

    kind: str
    window_minutes: int
    test_auc: float  # NaN when the test labels were single-class
    cv_mean_auc: float
    best_params: dict
    fold_aucs: tuple[float, ...]
    n_train_rows: int
    n_test_rows: int
    n_train_patients: int
    n_test_patients: int
    seed: int
    roc: RocCurve | None


@dataclass(frozen=True)
class EvalReport:
    cells: tuple[EvalCell, ...]

    def cell(self, kind: str, window_minutes: int) -> EvalCell:
        for cell in self.cells:
            if cell.kind == kind and cell.window_minutes == window_minutes:
                return cell
        raise KeyError((kind, window_minutes))

    def require_complete(self, kinds: list[str], windows: list[int]) -> None:
        present = {(c.kind, c.window_minutes) for c in self.cells}
        missing = [
            (k, w) for k in kinds for w in windows if (k, w) not in present
        ]
        if missing:
            raise ValueError(f"report is missing cells {missing}")


def evaluate(
    models: dict[tuple[str, int], TrainedModel],
    test_sets: dict[int, Dataset],
    seed: int,
) -> EvalReport:
    """Score every trained model on its window's test rows.

    A test set with single-class labels marks the affected cells invalid
    (NaN AUC, no curve) instead of aborting the report.
    """
    cells = []
    for (kind, window), model in models.items():
        test = test_sets[window]
        scores = model.score_rows(test.X)
        try:
            roc = roc_curve(scores, test.y)
            test_auc = roc.auc
        except SingleClassLabelsError as exc:
            log.warning("cell (%s, %d min) invalid: %s", kind, window, exc)
            roc = None
            test_auc = float("nan")
        meta = model.metadata
        cells.append(
            EvalCell(
                kind=kind,
                window_minutes=window,
                test_auc=test_auc,
                cv_mean_auc=float(meta.get("cv_mean_auc", float("nan"))),
                best_params=model.spec.hyperparameters,
                fold_aucs=tuple(meta.get("fold_aucs", ())),
                n_train_rows=int(meta.get("n_train_rows", 0)),
                n_test_rows=len(test),
                n_train_patients=int(meta.get("n_train_patients", 0)),
                n_test_patients=len(test.patients),
                seed=seed,
                roc=roc,
            )
        )
    return EvalReport(cells=tuple(cells))


# --- report.csv --------------------------------------------------------------

@dataclass(frozen=True)
class ReportRow:
    """One report.csv row; mirrors the file's columns exactly."""

    model: str
    window_minutes: int
    test_auc: float
    cv_mean_auc: float
    best_params: str
    n_test_rows: int
    seed: int


def report_rows(report: EvalReport) -> list[ReportRow]:
    return [
        ReportRow(
            model=c.kind,
            window_minutes=c.window_minutes,
            test_auc=c.test_auc,
            cv_mean_auc=c.cv_mean_auc,
            best_params=format_params(c.best_params),
            n_test_rows=c.n_test_rows,
            seed=c.seed,
        )
        for c in report.cells
    ]


def report_csv_text(rows: list[ReportRow]) -> str:
    out = io.StringIO()
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(REPORT_COLUMNS)
    for r in rows:
        writer.writerow(
            [
                r.model,
                r.window_minutes,
                f"{r.test_auc:.3f}",
                f"{r.cv_mean_auc:.3f}",
                r.best_params,
                r.n_test_rows,
                r.seed,
            ]
        )
    return out.getvalue()


def write_report_csv(rows: list[ReportRow], path: Path) -> None:
    _write_text(path, report_csv_text(rows))


def parse_report_csv(path: Path) -> list[ReportRow]:
    with open(path, newline="", encoding="utf-8") as handle:
        reader = csv.reader(handle)
        header = tuple(next(reader))
        if header != REPORT_COLUMNS:
            raise ValueError(f"unexpected report header {header}")
        return [
            ReportRow(
                model=row[0],
                window_minutes=int(row[1]),
                test_auc=float(row[2]),
                cv_mean_auc=float(row[3]),
                best_params=row[4],
                n_test_rows=int(row[5]),
                seed=int(row[6]),
            )
            for row in reader
        ]


# --- roc_points.csv -----------------------------------------------------------

def roc_points_csv_text(report: EvalReport) -> str:
    out = io.StringIO()
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(ROC_POINT_COLUMNS)
    for cell in report.cells:
        if cell.roc is None:
            continue
        for threshold, fpr, tpr in zip(
            cell.roc.thresholds, cell.roc.fpr, cell.roc.tpr
        ):
            writer.writerow(
                [
                    cell.kind,
                    cell.window_minutes,
                    f"{threshold:.9g}",
                    f"{fpr:.9g}",
                    f"{tpr:.9g}",
                ]
            )
    return out.getvalue()


def write_roc_points_csv(report: EvalReport, path: Path) -> None:
    _write_text(path, roc_points_csv_text(report))


def parse_roc_points_csv(
    path: Path,
) -> dict[tuple[str, int], tuple[np.ndarray, np.ndarray]]:
    """(model, window) -> (fpr, tpr) arrays in file order."""
    points: dict[tuple[str, int], list[tuple[float, float]]] = {}
    with open(path, newline="", encoding="utf-8") as handle:
        reader = csv.reader(handle)
        header = tuple(next(reader))
        if header != ROC_POINT_COLUMNS:
            raise ValueError(f"unexpected roc_points header {header}")
        for model, window, _threshold, fpr, tpr in reader:
            points.setdefault((model, int(window)), []).append(
                (float(fpr), float(tpr))
            )
    return {
        key: (
            np.array([p[0] for p in pair_list]),
            np.array([p[1] for p in pair_list]),
        )
        for key, pair_list in points.items()
    }


# --- grid_table.csv -----------------------------------------------------------

def grid_table_csv_text(
    tables: dict[tuple[str, int], list[GridEntry]],
) -> str:
    out = io.StringIO()
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(GRID_TABLE_COLUMNS)
    for (kind, window), entries in tables.items():
        for entry in entries:
            writer.writerow(
                [
                    kind,
                    window,
                    format_params(entry.spec.hyperparameters),
                    "|".join(f"{a:.9g}" for a in entry.fold_aucs),
                    f"{entry.mean_auc:.9g}",
                ]
            )
    return out.getvalue()


def write_grid_table_csv(
    tables: dict[tuple[str, int], list[GridEntry]], path: Path
) -> None:
    _write_text(path, grid_table_csv_text(tables))


def _write_text(path: Path, text: str) -> None:
    try:
        Path(path).write_text(text, encoding="utf-8")
    except OSError as exc:
        raise IoFailureError(f"cannot write {path}: {exc}") from exc
