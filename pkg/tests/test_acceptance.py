"""Acceptance suite: one test per criterion, each printing a PASS/FAIL line.

Criteria 1-6 and 8 are unconditional. Criterion 7 (reproduction of the
clinical study's numbers) requires the external dataset and is skipped
unless LIMBSENSE_DATASET_DIR points at it, converted to the documented
CSV layout (accel/ directory plus clinical.csv).
"""

import json
import os
import time
from pathlib import Path

import numpy as np
import pytest

from conftest import record_acceptance
from limbsense import pipeline
from limbsense.config import load_config
from limbsense.features import (
    Epoch,
    aggregate_windows,
    read_feature_csv,
    segment_epochs,
    session_epoch_features,
    spectrum,
)
from limbsense.ingest import Limb, SampleSeries, Severity
from limbsense.metrics import pairwise_auc, roc_curve
from limbsense.models import Dataset, kfold, load_model, patient_split
from limbsense.models.logistic import loss_and_gradient
from limbsense.report import parse_report_csv

WINDOWS = (15, 30, 45, 60, 90, 120)


def check(criterion: str, ok: bool, detail: str) -> None:
    line = f"criterion {criterion}: {'PASS' if ok else 'FAIL'} - {detail}"
    record_acceptance(line)
    print(line)
    assert ok, line


@pytest.fixture(scope="session")
def benchmark(tmp_path_factory):
    """cmd_synth with 40 patients and seed 7, featurized and trained once."""
    base = tmp_path_factory.mktemp("benchmark")
    cfg = {
        "accel_dir": str(base / "accel"),
        "clinical_csv": str(base / "clinical.csv"),
        "output_dir": str(base / "out"),
        "seed": 7,
        "synth_n_patients": 40,
    }
    config_path = base / "config.json"
    config_path.write_text(json.dumps(cfg))
    config = load_config(config_path)
    pipeline.run_synth(config)
    pipeline.run_featurize(config, jobs=2)
    report = pipeline.run_train_eval(config)
    return base, config, report


class TestCriterion1SpectralOracle:
    def test_spectrum_matches_brute_force_and_parseval(self):
        n = 384
        rng = np.random.default_rng(1001)
        angles = -2.0 * np.pi * np.outer(np.arange(n // 2 + 1), np.arange(n)) / n
        cos_table = np.cos(angles)
        sin_table = np.sin(angles)
        started = time.perf_counter()
        worst_bin = 0.0
        worst_parseval = 0.0
        for _ in range(200):
            vm = rng.uniform(0.0, 2.0, n)
            _, power = spectrum(Epoch(vm=vm, start_t=0.0))
            # direct O(N^2) evaluation of the DFT definition
            re = cos_table @ vm
            im = sin_table @ vm
            reference = (re**2 + im**2) / n**2
            reference[1 : n // 2] *= 2.0
            worst_bin = max(worst_bin, float(np.max(np.abs(power - reference))))
            ms = float(np.mean(vm**2))
            worst_parseval = max(worst_parseval, abs(power.sum() - ms) / ms)
        elapsed = time.perf_counter() - started
        ok = worst_bin < 1e-9 and worst_parseval < 1e-9 and elapsed < 5.0
        check(
            "1 (spectral oracle)",
            ok,
            f"200 epochs, max bin err {worst_bin:.2e}, "
            f"max Parseval err {worst_parseval:.2e}, {elapsed:.2f}s",
        )


class TestCriterion2AucOracle:
    def test_trapezoid_equals_pairwise(self):
        rng = np.random.default_rng(1002)
        worst = 0.0
        evaluated = 0
        while evaluated < 500:
            n = int(rng.integers(2, 201))
            labels = rng.integers(0, 2, n)
            if labels.min() == labels.max():
                continue
            decimals = int(rng.integers(0, 4))
            scores = np.round(rng.normal(size=n), decimals)
            gap = abs(roc_curve(scores, labels).auc - pairwise_auc(scores, labels))
            worst = max(worst, gap)
            evaluated += 1
        check(
            "2 (AUC oracle)",
            worst < 1e-12,
            f"500 score sets, max |trapezoid - pairwise| = {worst:.2e}",
        )


class TestCriterion3SeparableSanity:
    def test_all_36_cells_and_lr_gradient(self, benchmark):
        base, config, report = benchmark
        aucs = {
            (c.kind, c.window_minutes): c.test_auc for c in report.cells
        }
        all_cells_ok = len(aucs) == 36 and all(a >= 0.95 for a in aucs.values())

        grad_ok = True
        grad_worst = 0.0
        for window in WINDOWS:
            model = load_model(
                Path(config.output_dir)
                / "models"
                / f"model_logistic_regression_{window}min.json"
            )
            grad_worst = max(grad_worst, model.model.grad_max_norm)
            grad_ok &= model.model.converged and model.model.grad_max_norm < 1e-6

        fd_ok, fd_worst = self._finite_difference_check(config)
        check(
            "3 (separable sanity)",
            all_cells_ok and grad_ok and fd_ok,
            f"36 cells min AUC {min(aucs.values()):.3f}, "
            f"LR grad max-norm {grad_worst:.2e}, FD rel err {fd_worst:.2e}",
        )

    @staticmethod
    def _finite_difference_check(config) -> tuple[bool, float]:
        vectors = read_feature_csv(Path(config.output_dir) / "features_60.csv")
        dataset = pipeline.dataset_from_windows(vectors, 60)
        X = (dataset.X - dataset.X.mean(axis=0)) / np.where(
            dataset.X.std(axis=0) > 0, dataset.X.std(axis=0), 1.0
        )
        y = dataset.y.astype(float)
        rng = np.random.default_rng(1003)
        h = 1e-6
        worst = 0.0
        for _ in range(20):
            w = rng.normal(size=X.shape[1])
            b = float(rng.normal())
            _, grad_w, grad_b = loss_and_gradient(w, b, X, y, reg=0.1)
            analytic = np.append(grad_w, grad_b)
            fd = np.empty_like(analytic)
            for j in range(len(w)):
                e = np.zeros_like(w)
                e[j] = h
                up, *_ = loss_and_gradient(w + e, b, X, y, reg=0.1)
                dn, *_ = loss_and_gradient(w - e, b, X, y, reg=0.1)
                fd[j] = (up - dn) / (2 * h)
            up, *_ = loss_and_gradient(w, b + h, X, y, reg=0.1)
            dn, *_ = loss_and_gradient(w, b - h, X, y, reg=0.1)
            fd[-1] = (up - dn) / (2 * h)
            rel = np.max(np.abs(analytic - fd) / np.maximum(np.abs(fd), 1e-8))
            worst = max(worst, float(rel))
        return worst < 1e-5, worst


class TestCriterion4PipelineArithmetic:
    def test_epoch_and_window_counts(self):
        rng = np.random.default_rng(1004)
        n = 250 * 60 * 30
        series = SampleSeries(
            patient_id="P01",
            limb=Limb.PARETIC,
            rate_hz=30.0,
            t=np.arange(n, dtype=np.float64) / 30.0,
            ax=rng.normal(0, 0.01, n),
            ay=rng.normal(0, 0.01, n),
            az=1.0 + rng.normal(0, 0.01, n),
        )
        from limbsense.ingest import trim_session

        trimmed = trim_session(series)
        epochs = segment_epochs(trimmed)
        features = session_epoch_features(epochs)
        counts = {
            w: len(
                aggregate_windows(
                    features, w, patient_id="P01", week=2, label=Severity.MODERATE
                )
            )
            for w in WINDOWS
        }
        expected = {15: 16, 30: 8, 45: 5, 60: 4, 90: 2, 120: 2}
        ok = len(epochs) == 1125 and counts == expected
        check(
            "4 (pipeline arithmetic)",
            ok,
            f"{len(epochs)} epochs, window counts {[counts[w] for w in WINDOWS]}",
        )


class TestCriterion5LeakageGuard:
    def test_no_patient_crosses_a_boundary(self):
        rng = np.random.default_rng(1005)
        violations = 0
        for seed in range(100):
            n_patients = int(rng.integers(10, 40))
            ids = []
            y = []
            for p in range(n_patients):
                for _ in range(int(rng.integers(1, 5))):
                    ids.append(f"P{p:03d}")
                    y.append(p % 2)
            dataset = Dataset(
                patient_ids=tuple(ids),
                X=rng.normal(size=(len(ids), 3)),
                y=np.array(y, dtype=np.int64),
                window_minutes=60,
            )
            train, test = patient_split(dataset, 0.8, seed=seed)
            if set(train.patient_ids) & set(test.patient_ids):
                violations += 1
            train_ids = np.asarray(train.patient_ids)
            for train_idx, val_idx in kfold(train, k=5, seed=seed):
                if set(train_ids[train_idx]) & set(train_ids[val_idx]):
                    violations += 1
        check(
            "5 (leakage guard)",
            violations == 0,
            f"100 seeded split+kfold runs, {violations} violations",
        )


class TestCriterion6Determinism:
    def test_byte_identical_train_eval(self, benchmark, tmp_path_factory):
        base, config, _ = benchmark
        artifacts = {}
        for run in ("a", "b"):
            out = tmp_path_factory.mktemp(f"determinism_{run}")
            for window in WINDOWS:
                name = f"features_{window}.csv"
                (out / name).write_bytes(
                    (Path(config.output_dir) / name).read_bytes()
                )
            run_config = load_config(
                Path(base / "config.json"), {"output_dir": str(out)}
            )
            pipeline.run_train_eval(run_config)
            files = {"report.csv", "roc_points.csv"} | {
                f"models/{p.name}" for p in (out / "models").iterdir()
            }
            artifacts[run] = {
                name: (out / name).read_bytes() for name in sorted(files)
            }
        same_names = set(artifacts["a"]) == set(artifacts["b"])
        diffs = [
            name
            for name in artifacts["a"]
            if artifacts["a"][name] != artifacts["b"].get(name)
        ]
        check(
            "6 (determinism)",
            same_names and not diffs,
            f"{len(artifacts['a'])} artifacts compared, "
            f"{len(diffs)} byte differences",
        )


class TestCriterion7StudyReproduction:
    @pytest.mark.skipif(
        "LIMBSENSE_DATASET_DIR" not in os.environ,
        reason="external clinical dataset not available; criteria 1-6 are the "
        "unconditional suite",
    )
    def test_reproduces_reported_numbers(self, tmp_path):
        root = Path(os.environ["LIMBSENSE_DATASET_DIR"])
        cfg = {
            "accel_dir": str(root / "accel"),
            "clinical_csv": str(root / "clinical.csv"),
            "output_dir": str(tmp_path / "out"),
            "seed": 7,
        }
        config_path = tmp_path / "config.json"
        config_path.write_text(json.dumps(cfg))
        config = load_config(config_path)
        pipeline.run_featurize(config, jobs=2)
        report = pipeline.run_train_eval(config)
        rows = parse_report_csv(Path(config.output_dir) / "report.csv")

        by_model: dict[str, list[float]] = {}
        for row in sorted(rows, key=lambda r: r.window_minutes):
            by_model.setdefault(row.model, []).append(row.test_auc)
        monotone = sum(
            1
            for aucs in by_model.values()
            if np.all(np.diff(aucs) >= 0)
        )
        lr_120 = next(
            c.test_auc
            for c in report.cells
            if c.kind == "logistic_regression" and c.window_minutes == 120
        )
        r, _ = pipeline.run_correlate(config)
        ok = monotone >= 5 and abs(lr_120 - 0.94) <= 0.07 and abs(r - 0.866) <= 0.10
        check(
            "7 (study reproduction)",
            ok,
            f"{monotone}/6 models monotone, LR@120 {lr_120:.3f}, r {r:.3f}",
        )


class TestCriterion8Performance:
    def test_single_session_featurize_under_5s(self, benchmark):
        base, config, _ = benchmark
        sessions = pipeline.discover_sessions(Path(config.accel_dir))
        with open(config.clinical_csv, "rb") as handle:
            from limbsense.ingest import parse_clinical_csv

            records = pipeline.clinical_by_patient(parse_clinical_csv(handle))
        session = sessions[0]
        record = records[session.patient_id]
        started = time.perf_counter()
        result = pipeline.featurize_session(session, record, config)
        elapsed = time.perf_counter() - started
        ok = elapsed < 5.0 and sum(len(v) for v in result.windows.values()) == 37
        check(
            "8 (performance)",
            ok,
            f"one 432,000-sample session, six windows, in {elapsed:.2f}s",
        )
