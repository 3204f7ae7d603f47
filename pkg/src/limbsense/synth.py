"""Synthetic bilateral wrist recordings for desk-scale pipeline runs.

Each patient gets a 250 min, 30 Hz recording per limb: a 1 g gravity
baseline, always-on sensor noise, and second-aligned movement bouts that
superimpose a tone on the gravity axis. Severe patients move their paretic
limb rarely, weakly, and slowly; moderate patients move it often, strongly,
and faster; the non-paretic limb behaves the same for everyone. ARAT scores
are derived from the paretic activity level, consistent with the class, so
severity labels, use ratios, and the ARAT/use-ratio correlation all come out
coherent end to end.

Identical (config, seed) pairs produce byte-identical output trees.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from pathlib import Path

import numpy as np
import pandas as pd

from .config import RunConfig
from .errors import IoFailureError
from .ingest import CLINICAL_COLUMNS, Limb

log = logging.getLogger(__name__)

SESSION_MINUTES = 250.0
REST_NOISE_G = 0.003
MOVE_NOISE_G = {"severe": 0.012, "moderate": 0.03}

# Per-class paretic-limb parameter ranges: activity fraction, tone amplitude
# in g, tone frequency in Hz.
PARETIC_RANGES = {
    "severe": {"p_active": (0.05, 0.15), "amp": (0.04, 0.07), "freq": (0.4, 0.9)},
    "moderate": {"p_active": (0.35, 0.55), "amp": (0.25, 0.40), "freq": (2.0, 3.2)},
}
NON_PARETIC_RANGE = {"p_active": (0.50, 0.65), "amp": (0.25, 0.40), "freq": (1.5, 3.0)}

# ARAT bands keep a margin from the default cutoff of 22 on both sides.
ARAT_BANDS = {"severe": (2, 21), "moderate": (24, 55)}


@dataclass(frozen=True)
class SynthPatient:
    patient_id: str
    severe: bool
    arat: int
    affected_side: str
    paretic_params: dict
    non_paretic_params: dict


def _draw(rng: np.random.Generator, bounds: tuple[float, float]) -> float:
    return float(rng.uniform(*bounds))


def plan_patients(
    n_patients: int, severe_fraction: float, seed: int
) -> list[SynthPatient]:
    """Deterministic per-patient movement parameters and clinical scores."""
    n_severe = round(n_patients * severe_fraction)
    patients = []
    for i in range(n_patients):
        severe = i < n_severe
        group = "severe" if severe else "moderate"
        rng = np.random.default_rng([seed, i])
        ranges = PARETIC_RANGES[group]
        p_active = _draw(rng, ranges["p_active"])
        paretic = {
            "p_active": p_active,
            "amp": _draw(rng, ranges["amp"]),
            "freq": _draw(rng, ranges["freq"]),
            "move_noise": MOVE_NOISE_G[group],
        }
        non_paretic = {
            "p_active": _draw(rng, NON_PARETIC_RANGE["p_active"]),
            "amp": _draw(rng, NON_PARETIC_RANGE["amp"]),
            "freq": _draw(rng, NON_PARETIC_RANGE["freq"]),
            "move_noise": MOVE_NOISE_G["moderate"],
        }
        low, high = ARAT_BANDS[group]
        lo_p, hi_p = ranges["p_active"]
        arat = round(low + (high - low) * (p_active - lo_p) / (hi_p - lo_p))
        patients.append(
            SynthPatient(
                patient_id=f"SYN{i:03d}",
                severe=severe,
                arat=int(arat),
                affected_side="left" if rng.random() < 0.5 else "right",
                paretic_params=paretic,
                non_paretic_params=non_paretic,
            )
        )
    return patients


def synth_limb_signal(
    params: dict, rng: np.random.Generator, rate_hz: float = 30.0
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """(ax, ay, az) arrays for one 250 min limb recording."""
    per_second = int(round(rate_hz))
    n_seconds = int(round(SESSION_MINUTES * 60.0))
    n = n_seconds * per_second
    active = np.repeat(rng.random(n_seconds) < params["p_active"], per_second)
    t = np.arange(n) / rate_hz
    tone = params["amp"] * np.sin(2.0 * np.pi * params["freq"] * t) * active
    scale = np.where(active, params["move_noise"], REST_NOISE_G)
    ax = rng.standard_normal(n) * scale
    ay = rng.standard_normal(n) * scale
    az = 1.0 + tone + rng.standard_normal(n) * scale
    return ax, ay, az


def _write_limb_csv(
    path: Path, ax: np.ndarray, ay: np.ndarray, az: np.ndarray
) -> None:
    # The time column is omitted; ingest synthesizes t = index / rate.
    frame = pd.DataFrame({"ax": ax, "ay": ay, "az": az})
    frame.to_csv(path, index=False, float_format="%.5f")


def generate_dataset(config: RunConfig) -> list[SynthPatient]:
    """Write accelerometer CSVs and the clinical table per the config."""
    accel_dir = Path(config.accel_dir)
    clinical_csv = Path(config.clinical_csv)
    try:
        accel_dir.mkdir(parents=True, exist_ok=True)
        clinical_csv.parent.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise IoFailureError(f"cannot create output directories: {exc}") from exc

    patients = plan_patients(
        config.synth_n_patients, config.synth_severe_fraction, config.seed
    )
    try:
        for i, patient in enumerate(patients):
            for limb_index, (limb, params) in enumerate(
                (
                    (Limb.PARETIC, patient.paretic_params),
                    (Limb.NON_PARETIC, patient.non_paretic_params),
                )
            ):
                rng = np.random.default_rng([config.seed, i, 100 + limb_index])
                signal = synth_limb_signal(params, rng, config.rate_hz)
                _write_limb_csv(
                    accel_dir / f"{patient.patient_id}_{limb.value}.csv", *signal
                )
            log.debug("synthesized %s", patient.patient_id)

        lines = [",".join(CLINICAL_COLUMNS)]
        for patient in patients:
            ue_fm = round(patient.arat * 66 / 57)
            safe = round(patient.arat * 10 / 57)
            lines.append(
                f"{patient.patient_id},{patient.affected_side},2,"
                f"{patient.arat},{ue_fm},{safe}"
            )
        clinical_csv.write_text("\n".join(lines) + "\n", encoding="utf-8")
    except OSError as exc:
        raise IoFailureError(f"cannot write synthetic dataset: {exc}") from exc
    log.info(
        "synthesized %d patients (%d severe) into %s",
        len(patients),
        sum(p.severe for p in patients),
        accel_dir,
    )
    return patients
