"""Synthetic dataset generator: determinism, validity, class structure."""

import json
from pathlib import Path

import numpy as np
import pytest

from limbsense.config import load_config
from limbsense.features import use_ratio
from limbsense.ingest import Limb, label_severity, parse_accel_csv, parse_clinical_csv, trim_session
from limbsense.synth import generate_dataset, plan_patients, synth_limb_signal


def write_config(tmp_path: Path, **extra) -> Path:
    cfg = {
        "accel_dir": str(tmp_path / "accel"),
        "clinical_csv": str(tmp_path / "clinical.csv"),
        "output_dir": str(tmp_path / "out"),
        "seed": 7,
        "synth_n_patients": 2,
        **extra,
    }
    path = tmp_path / "config.json"
    path.write_text(json.dumps(cfg))
    return path


@pytest.fixture(scope="module")
def small_dataset(tmp_path_factory):
    tmp = tmp_path_factory.mktemp("synth")
    config = load_config(write_config(tmp))
    patients = generate_dataset(config)
    return tmp, config, patients


class TestPlanPatients:
    def test_deterministic(self):
        a = plan_patients(6, 0.5, seed=11)
        b = plan_patients(6, 0.5, seed=11)
        assert a == b

    def test_class_balance(self):
        patients = plan_patients(10, 0.3, seed=0)
        assert sum(p.severe for p in patients) == 3

    def test_arat_consistent_with_class(self):
        for p in plan_patients(30, 0.5, seed=1):
            label = "severe" if p.arat < 22 else "moderate"
            assert (label == "severe") == p.severe

    def test_moderate_moves_more_and_faster(self):
        patients = plan_patients(30, 0.5, seed=2)
        severe = [p for p in patients if p.severe]
        moderate = [p for p in patients if not p.severe]
        assert max(p.paretic_params["amp"] for p in severe) < min(
            p.paretic_params["amp"] for p in moderate
        )
        assert max(p.paretic_params["freq"] for p in severe) < min(
            p.paretic_params["freq"] for p in moderate
        )


class TestSynthLimbSignal:
    def test_shape_and_baseline(self):
        params = {"p_active": 0.3, "amp": 0.2, "freq": 2.0, "move_noise": 0.02}
        ax, ay, az = synth_limb_signal(params, np.random.default_rng(0))
        assert len(ax) == len(ay) == len(az) == 450_000
        assert np.mean(az) == pytest.approx(1.0, abs=0.01)
        assert np.all(np.isfinite(ax) & np.isfinite(ay) & np.isfinite(az))


class TestGenerateDataset:
    def test_expected_files(self, small_dataset):
        tmp, config, patients = small_dataset
        accel = Path(config.accel_dir)
        names = sorted(p.name for p in accel.iterdir())
        assert names == [
            "SYN000_non_paretic.csv",
            "SYN000_paretic.csv",
            "SYN001_non_paretic.csv",
            "SYN001_paretic.csv",
        ]
        assert Path(config.clinical_csv).exists()

    def test_files_pass_ingest_validation(self, small_dataset):
        tmp, config, patients = small_dataset
        path = Path(config.accel_dir) / "SYN000_paretic.csv"
        with open(path, "rb") as handle:
            series = parse_accel_csv(handle, "SYN000", Limb.PARETIC)
        assert len(series) == 450_000
        assert series.duration_s == pytest.approx(15_000.0)

    def test_clinical_rows_validate_and_label(self, small_dataset):
        tmp, config, patients = small_dataset
        with open(config.clinical_csv, "rb") as handle:
            records = parse_clinical_csv(handle)
        assert len(records) == 2
        by_id = {r.patient_id: r for r in records}
        for p in patients:
            label = label_severity(by_id[p.patient_id], 22)
            assert (label.value.value == "severe") == p.severe

    def test_severe_patient_use_ratio_below_one(self, small_dataset):
        tmp, config, patients = small_dataset
        severe = next(p for p in patients if p.severe)
        series = {}
        for limb in (Limb.PARETIC, Limb.NON_PARETIC):
            path = Path(config.accel_dir) / f"{severe.patient_id}_{limb.value}.csv"
            with open(path, "rb") as handle:
                series[limb] = trim_session(
                    parse_accel_csv(handle, severe.patient_id, limb)
                )
        ratio = use_ratio(series[Limb.PARETIC], series[Limb.NON_PARETIC])
        assert 0.0 < ratio < 1.0

    def test_byte_identical_reruns(self, small_dataset, tmp_path):
        tmp, config, patients = small_dataset
        config2 = load_config(write_config(tmp_path))
        generate_dataset(config2)
        for name in sorted(p.name for p in Path(config.accel_dir).iterdir()):
            a = (Path(config.accel_dir) / name).read_bytes()
            b = (Path(config2.accel_dir) / name).read_bytes()
            assert a == b, name
        assert (
            Path(config.clinical_csv).read_bytes()
            == Path(config2.clinical_csv).read_bytes()
        )
