"""End-to-end pipeline stages behind the CLI subcommands.

Each stage reads and writes plain-text artifacts in the configured output
directory so intermediate results stay inspectable, and each echoes the
resolved configuration there for byte-identical re-runs.
"""

from __future__ import annotations

import csv
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import features as feat
from . import ingest, metrics, plots, report as rep, synth
from .config import RunConfig
from .errors import DataError, LabelUnavailableError, LimbsenseError
from .models import (
    Dataset,
    TrainedModel,
    grid_search,
    patient_split,
    save_model,
    train_model,
)

log = logging.getLogger(__name__)

USE_RATIO_COLUMNS = ("patient_id", "week", "use_ratio", "arat")


# --- session discovery ---------------------------------------------------------

@dataclass(frozen=True)
class SessionFiles:
    patient_id: str
    paretic: Path
    non_paretic: Path | None


def discover_sessions(accel_dir: Path) -> list[SessionFiles]:
    """Pair `<patient>_paretic.csv` / `<patient>_non_paretic.csv` files."""
    accel_dir = Path(accel_dir)
    if not accel_dir.is_dir():
        raise DataError(f"accel directory {accel_dir} does not exist")
    paretic = {}
    non_paretic = {}
    for path in sorted(accel_dir.glob("*.csv")):
        name = path.name
        if name.endswith("_non_paretic.csv"):
            non_paretic[name[: -len("_non_paretic.csv")]] = path
        elif name.endswith("_paretic.csv"):
            paretic[name[: -len("_paretic.csv")]] = path
        else:
            log.warning("ignoring unrecognized file %s", name)
    sessions = []
    for pid in sorted(paretic):
        sessions.append(
            SessionFiles(
                patient_id=pid, paretic=paretic[pid], non_paretic=non_paretic.get(pid)
            )
        )
    for pid in sorted(set(non_paretic) - set(paretic)):
        log.warning("%s: non-paretic file without paretic counterpart", pid)
    if not sessions:
        raise DataError(f"no accelerometer sessions found in {accel_dir}")
    return sessions


def clinical_by_patient(
    records: list[ingest.ClinicalRecord],
) -> dict[str, ingest.ClinicalRecord]:
    """One record per patient; with several, the earliest week wins."""
    by_patient: dict[str, ingest.ClinicalRecord] = {}
    for record in records:
        existing = by_patient.get(record.patient_id)
        if existing is None or record.week < existing.week:
            by_patient[record.patient_id] = record
    for record in records:
        if by_patient[record.patient_id] is not record:
            log.warning(
                "%s: multiple clinical records; using week %d",
                record.patient_id,
                by_patient[record.patient_id].week,
            )
    return by_patient


# --- featurize -----------------------------------------------------------------

@dataclass(frozen=True)
class SessionResult:
    patient_id: str
    week: int
    arat: int
    windows: dict[int, list[feat.WindowFeatureVector]]
    use_ratio: float | None


def featurize_session(
    session: SessionFiles,
    record: ingest.ClinicalRecord,
    config: RunConfig,
) -> SessionResult:
    """Trim one session, extract epoch features, and aggregate every window."""
    label = ingest.label_severity(record, config.arat_cutoff)
    with open(session.paretic, "rb") as handle:
        series = ingest.parse_accel_csv(
            handle, session.patient_id, ingest.Limb.PARETIC, config.rate_hz
        )
    trimmed = ingest.trim_session(series, config.trim_lead_s, config.horizon_s)
    epochs = feat.segment_epochs(trimmed, config.epoch_seconds)
    epoch_features = feat.session_epoch_features(epochs)
    windows = {
        w: feat.aggregate_windows(
            epoch_features,
            w,
            patient_id=session.patient_id,
            week=record.week,
            label=label.value,
            epoch_seconds=config.epoch_seconds,
            horizon_minutes=config.horizon_minutes,
        )
        for w in config.window_minutes_set
    }
    ratio = None
    if session.non_paretic is None:
        log.warning("%s: no non-paretic file; use ratio skipped", session.patient_id)
    else:
        try:
            with open(session.non_paretic, "rb") as handle:
                other = ingest.parse_accel_csv(
                    handle,
                    session.patient_id,
                    ingest.Limb.NON_PARETIC,
                    config.rate_hz,
                )
            other_trimmed = ingest.trim_session(
                other, config.trim_lead_s, config.horizon_s
            )
            ratio = feat.use_ratio(
                trimmed, other_trimmed, config.activity_threshold_g
            )
        except LimbsenseError as exc:
            log.warning("%s: use ratio unavailable: %s", session.patient_id, exc)
    return SessionResult(
        patient_id=session.patient_id,
        week=record.week,
        arat=record.arat,
        windows=windows,
        use_ratio=ratio,
    )


def run_featurize(config: RunConfig, jobs: int = 1) -> Path:
    """Featurize every session; per-session failures are logged and skipped."""
    output_dir = Path(config.output_dir)
    output_dir.mkdir(parents=True, exist_ok=True)
    with open(config.clinical_csv, "rb") as handle:
        records = clinical_by_patient(ingest.parse_clinical_csv(handle))
    sessions = discover_sessions(Path(config.accel_dir))

    def process(session: SessionFiles) -> SessionResult | None:
        try:
            record = records.get(session.patient_id)
            if record is None:
                raise LabelUnavailableError(
                    f"{session.patient_id}: no clinical record"
                )
            return featurize_session(session, record, config)
        except LimbsenseError as exc:
            log.warning("session %s skipped: %s", session.patient_id, exc)
            return None

    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            raw_results = list(pool.map(process, sessions))
    else:
        raw_results = [process(s) for s in sessions]
    results = sorted(
        (r for r in raw_results if r is not None), key=lambda r: r.patient_id
    )
    if not results:
        raise DataError("every session failed to featurize")

    for window in config.window_minutes_set:
        vectors = [v for r in results for v in r.windows[window]]
        feat.write_feature_csv(vectors, output_dir / f"features_{window}.csv")
    with open(output_dir / "use_ratio.csv", "w", newline="", encoding="utf-8") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(USE_RATIO_COLUMNS)
        for r in results:
            if r.use_ratio is not None:
                writer.writerow([r.patient_id, r.week, f"{r.use_ratio:.9g}", r.arat])
    config.write_resolved(output_dir)
    log.info(
        "featurized %d/%d sessions into %s", len(results), len(sessions), output_dir
    )
    return output_dir


# --- train / evaluate ------------------------------------------------------------

def dataset_from_windows(
    vectors: list[feat.WindowFeatureVector], window_minutes: int
) -> Dataset:
    rows = [v for v in vectors if v.window_minutes == window_minutes]
    return Dataset(
        patient_ids=tuple(v.patient_id for v in rows),
        X=np.stack([v.features.as_array() for v in rows]),
        y=np.array(
            [1 if v.label == ingest.Severity.SEVERE else 0 for v in rows],
            dtype=np.int64,
        ),
        window_minutes=window_minutes,
    )


def run_train_eval(config: RunConfig, seed: int | None = None) -> rep.EvalReport:
    """Split by patient, grid-search each kind per window, evaluate on test."""
    run_seed = config.seed if seed is None else seed
    output_dir = Path(config.output_dir)
    model_dir = output_dir / "models"
    model_dir.mkdir(parents=True, exist_ok=True)

    splits: dict[int, tuple[Dataset, Dataset]] = {}
    for window in sorted(config.window_minutes_set):
        path = output_dir / f"features_{window}.csv"
        if not path.exists():
            raise DataError(f"missing feature file {path}; run featurize first")
        dataset = dataset_from_windows(feat.read_feature_csv(path), window)
        splits[window] = patient_split(dataset, config.train_fraction, run_seed)

    models: dict[tuple[str, int], TrainedModel] = {}
    tables: dict[tuple[str, int], list] = {}
    for window in sorted(config.window_minutes_set):
        train, test = splits[window]
        for kind in config.model_kinds:
            best_spec, table = grid_search(
                kind,
                config.grid_for(kind),
                train,
                k=config.k_folds,
                seed=run_seed,
                group_by_patient=config.group_folds_by_patient,
            )
            best_entry = next(e for e in table if e.spec == best_spec)
            model = train_model(best_spec, train.X, train.y, run_seed)
            model.metadata.update(
                cv_mean_auc=best_entry.mean_auc,
                fold_aucs=list(best_entry.fold_aucs),
                n_train_rows=len(train),
                n_train_patients=len(train.patients),
                window_minutes=window,
            )
            models[(kind, window)] = model
            tables[(kind, window)] = table
            save_model(model, model_dir / f"model_{kind}_{window}min.json")
            log.info(
                "window %3d min  %-20s cv_auc=%.3f  %s",
                window,
                kind,
                best_entry.mean_auc,
                rep.format_params(best_spec.hyperparameters),
            )

    test_sets = {w: pair[1] for w, pair in splits.items()}
    # Order cells kind-major within each window for stable artifact bytes.
    ordered = {
        (kind, window): models[(kind, window)]
        for window in sorted(config.window_minutes_set)
        for kind in config.model_kinds
    }
    result = rep.evaluate(ordered, test_sets, run_seed)
    result.require_complete(
        list(config.model_kinds), sorted(config.window_minutes_set)
    )
    rep.write_report_csv(rep.report_rows(result), output_dir / "report.csv")
    rep.write_roc_points_csv(result, output_dir / "roc_points.csv")
    rep.write_grid_table_csv(tables, output_dir / "grid_table.csv")
    traces = roc_traces(result)
    if traces:
        plots.render_roc_svg(
            traces,
            output_dir / "roc.svg",
            expected_windows=sorted(config.window_minutes_set),
        )
    else:
        log.warning("no valid ROC curves; roc.svg not rendered")
    config.write_resolved(output_dir)
    return result


def roc_traces(result: rep.EvalReport) -> list[plots.RocTrace]:
    return [
        plots.RocTrace(
            model=cell.kind,
            window_minutes=cell.window_minutes,
            fpr=cell.roc.fpr,
            tpr=cell.roc.tpr,
            auc=cell.test_auc,
        )
        for cell in result.cells
        if cell.roc is not None
    ]


# --- correlate -------------------------------------------------------------------

def run_correlate(config: RunConfig) -> tuple[float, int]:
    """Pearson correlation between ARAT and use ratio over patients."""
    output_dir = Path(config.output_dir)
    path = output_dir / "use_ratio.csv"
    if not path.exists():
        raise DataError(f"missing {path}; run featurize first")
    arats = []
    ratios = []
    with open(path, newline="", encoding="utf-8") as handle:
        reader = csv.reader(handle)
        header = tuple(next(reader))
        if header != USE_RATIO_COLUMNS:
            raise DataError(f"unexpected use_ratio header {header}")
        for row in reader:
            ratios.append(float(row[2]))
            arats.append(float(row[3]))
    r = metrics.pearson(arats, ratios)
    with open(output_dir / "correlation.csv", "w", newline="", encoding="utf-8") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(["x", "y", "n", "pearson_r"])
        writer.writerow(["arat", "use_ratio", len(arats), f"{r:.9g}"])
    plots.render_scatter_svg(
        np.asarray(arats),
        np.asarray(ratios),
        output_dir / "use_ratio_vs_arat.svg",
        xlabel="ARAT score",
        ylabel="Use ratio",
        title=f"Use ratio vs ARAT (r={r:.3f}, n={len(arats)})",
    )
    config.write_resolved(output_dir)
    return r, len(arats)


# --- report ----------------------------------------------------------------------

def run_report(config: RunConfig) -> list[rep.ReportRow]:
    """Re-render roc.svg from the delimited artifacts and return the table."""
    output_dir = Path(config.output_dir)
    report_path = output_dir / "report.csv"
    points_path = output_dir / "roc_points.csv"
    for path in (report_path, points_path):
        if not path.exists():
            raise DataError(f"missing {path}; run train-eval first")
    rows = rep.parse_report_csv(report_path)
    points = rep.parse_roc_points_csv(points_path)
    auc_by_cell = {(r.model, r.window_minutes): r.test_auc for r in rows}
    traces = [
        plots.RocTrace(
            model=model,
            window_minutes=window,
            fpr=fpr,
            tpr=tpr,
            auc=auc_by_cell.get((model, window), float("nan")),
        )
        for (model, window), (fpr, tpr) in points.items()
    ]
    if traces:
        plots.render_roc_svg(
            traces,
            output_dir / "roc.svg",
            expected_windows=sorted({r.window_minutes for r in rows}),
        )
    else:
        log.warning("no valid ROC curves; roc.svg not rendered")
    return rows


# --- synth -----------------------------------------------------------------------

def run_synth(config: RunConfig) -> int:
    patients = synth.generate_dataset(config)
    config.write_resolved(Path(config.output_dir))
    return len(patients)
