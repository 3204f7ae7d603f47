"""Epoch-level feature extraction and window aggregation.

A trimmed session is cut into non-overlapping 12.8 s epochs (384 samples at
30 Hz). Each epoch yields eight features: magnitude mean/max/min, normalized
average rectified jerk, and the two dominant non-DC spectral frequencies with
their powers. Epoch features are then averaged into disjoint aggregation
windows of 15 to 120 minutes.

Spectrum normalization is |X[k]|^2 / N^2 with one-sided doubling, so the sum
over one-sided bins equals the mean square of the input exactly (Parseval).
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from .errors import (
    EmptyInputError,
    EmptyWindowError,
    MalformedRowError,
    NoDominantFrequencyError,
    NoReferenceActivityError,
)
from .ingest import AccelSample, SampleSeries, Severity

log = logging.getLogger(__name__)

EPOCH_SECONDS = 12.8
WINDOW_MINUTES_SET = (15, 30, 45, 60, 90, 120)
ACTIVITY_THRESHOLD_G = 0.02
# Non-DC power below this is treated as numerically zero.
POWER_FLOOR = 1e-12

FEATURE_NAMES = ("mag_mean", "mag_max", "mag_min", "narj", "f1", "p1", "f2", "p2")


def vector_magnitude(sample: AccelSample) -> float:
    """Euclidean norm of one tri-axial sample, in g."""
    return float(np.sqrt(sample.ax**2 + sample.ay**2 + sample.az**2))


def vector_magnitudes(series: SampleSeries) -> np.ndarray:
    """Vector magnitude of every sample in a series."""
    return np.sqrt(series.ax**2 + series.ay**2 + series.az**2)


@dataclass(frozen=True)
class Epoch:
    """One fixed-length run of vector-magnitude values."""

    vm: np.ndarray
    start_t: float
    rate_hz: float = 30.0

    def __post_init__(self) -> None:
        self.vm.setflags(write=False)


@dataclass(frozen=True)
class EpochFeatures:
    mag_mean: float
    mag_max: float
    mag_min: float
    narj: float
    f1: float
    p1: float
    f2: float
    p2: float

    def as_array(self) -> np.ndarray:
        return np.array(
            [getattr(self, name) for name in FEATURE_NAMES], dtype=np.float64
        )


@dataclass(frozen=True)
class WindowFeatureVector:
    patient_id: str
    week: int
    window_minutes: int
    window_index: int
    features: EpochFeatures
    label: Severity


def epoch_length(rate_hz: float = 30.0, epoch_seconds: float = EPOCH_SECONDS) -> int:
    return int(round(epoch_seconds * rate_hz))


def segment_epochs(
    series: SampleSeries, epoch_seconds: float = EPOCH_SECONDS
) -> list[Epoch]:
    """Cut a trimmed series into consecutive epochs, dropping the partial tail."""
    n_per = epoch_length(series.rate_hz, epoch_seconds)
    vm = vector_magnitudes(series)
    n_epochs = len(vm) // n_per
    if n_epochs == 0:
        raise EmptyInputError(
            f"{len(vm)} samples is fewer than one {n_per}-sample epoch"
        )
    return [
        Epoch(
            vm=vm[i * n_per : (i + 1) * n_per],
            start_t=float(series.t[i * n_per]),
            rate_hz=series.rate_hz,
        )
        for i in range(n_epochs)
    ]


def _narj_batch(vm: np.ndarray, rate_hz: float) -> np.ndarray:
    """Rectified first-difference jerk, normalized by the epoch maximum.

    vm has shape (n_epochs, n_samples). Epochs with zero maximum map to 0.
    """
    arj = np.mean(np.abs(np.diff(vm, axis=1)), axis=1) * rate_hz
    peak = np.max(vm, axis=1)
    out = np.zeros(len(vm))
    nonzero = peak > 0
    out[nonzero] = arj[nonzero] / peak[nonzero]
    return out


def narj(epoch: Epoch) -> float:
    """Normalized average rectified jerk of one epoch, in 1/s."""
    return float(_narj_batch(epoch.vm[np.newaxis, :], epoch.rate_hz)[0])


def _spectrum_batch(vm: np.ndarray, rate_hz: float) -> tuple[np.ndarray, np.ndarray]:
    """One-sided power spectra for a batch of epochs.

    Returns (freqs, power) where power[e, k] = |X[k]|^2 / N^2, doubled for
    the interior bins, X being the plain DFT of row e (no detrend, no taper).
    """
    n = vm.shape[1]
    x = np.fft.rfft(vm, axis=1)
    power = np.abs(x) ** 2 / n**2
    power[:, 1 : (n + 1) // 2] *= 2.0
    freqs = np.arange(power.shape[1]) * rate_hz / n
    return freqs, power


def spectrum(epoch: Epoch) -> tuple[np.ndarray, np.ndarray]:
    """One-sided power spectrum of one epoch as (freqs_hz, power)."""
    freqs, power = _spectrum_batch(epoch.vm[np.newaxis, :], epoch.rate_hz)
    return freqs, power[0]


def _dominant_batch(
    freqs: np.ndarray, power: np.ndarray
) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    """Top two non-DC bins per epoch; ties break toward the lower frequency."""
    nondc = power[:, 1:]
    if np.any(np.max(nondc, axis=1) < POWER_FLOOR):
        bad = int(np.argmax(np.max(nondc, axis=1) < POWER_FLOOR))
        raise NoDominantFrequencyError(
            f"epoch {bad}: all non-DC power below {POWER_FLOOR:g}"
        )
    # argmax returns the first maximum, which is the lowest-frequency bin.
    k1 = np.argmax(nondc, axis=1)
    p1 = np.take_along_axis(nondc, k1[:, None], axis=1)[:, 0]
    masked = nondc.copy()
    np.put_along_axis(masked, k1[:, None], -np.inf, axis=1)
    k2 = np.argmax(masked, axis=1)
    p2 = np.take_along_axis(nondc, k2[:, None], axis=1)[:, 0]
    return freqs[k1 + 1], p1, freqs[k2 + 1], p2


def dominant_freqs(
    spectrum_pair: tuple[np.ndarray, np.ndarray],
) -> tuple[float, float, float, float]:
    """(f1, p1, f2, p2) for one spectrum as returned by :func:`spectrum`."""
    freqs, power = spectrum_pair
    f1, p1, f2, p2 = _dominant_batch(freqs, power[np.newaxis, :])
    return float(f1[0]), float(p1[0]), float(f2[0]), float(p2[0])


def _features_matrix(vm: np.ndarray, rate_hz: float) -> np.ndarray:
    """Feature matrix (n_epochs, 8) in FEATURE_NAMES order."""
    freqs, power = _spectrum_batch(vm, rate_hz)
    f1, p1, f2, p2 = _dominant_batch(freqs, power)
    return np.column_stack(
        [
            np.mean(vm, axis=1),
            np.max(vm, axis=1),
            np.min(vm, axis=1),
            _narj_batch(vm, rate_hz),
            f1,
            p1,
            f2,
            p2,
        ]
    )


def epoch_features(epoch: Epoch) -> EpochFeatures:
    """All eight features of one epoch."""
    row = _features_matrix(epoch.vm[np.newaxis, :], epoch.rate_hz)[0]
    return EpochFeatures(*(float(v) for v in row))


def session_epoch_features(epochs: list[Epoch]) -> list[EpochFeatures]:
    """Features for every epoch of a session in one vectorized pass."""
    if not epochs:
        raise EmptyInputError("no epochs")
    vm = np.stack([e.vm for e in epochs])
    matrix = _features_matrix(vm, epochs[0].rate_hz)
    return [EpochFeatures(*(float(v) for v in row)) for row in matrix]


def aggregate_windows(
    features: list[EpochFeatures],
    window_minutes: int,
    *,
    patient_id: str,
    week: int,
    label: Severity,
    epoch_seconds: float = EPOCH_SECONDS,
    horizon_minutes: float = 240.0,
) -> list[WindowFeatureVector]:
    """Average consecutive epoch features into disjoint aggregation windows.

    The horizon is divided into floor(horizon / window) windows; epoch i
    (starting at i * epoch_seconds) joins the window containing its start
    time, and epochs past the last full window are dropped.
    """
    if window_minutes not in WINDOW_MINUTES_SET:
        raise ValueError(
            f"window_minutes must be one of {WINDOW_MINUTES_SET}, got {window_minutes}"
        )
    window_s = window_minutes * 60.0
    n_windows = int(horizon_minutes * 60.0 // window_s)
    starts = np.arange(len(features)) * epoch_seconds
    assignment = np.floor_divide(starts, window_s).astype(int)
    matrix = np.stack([f.as_array() for f in features])
    out = []
    for w in range(n_windows):
        members = matrix[assignment == w]
        if len(members) == 0:
            raise EmptyWindowError(
                f"{patient_id}: window {w} of {window_minutes} min has no epochs"
            )
        out.append(
            WindowFeatureVector(
                patient_id=patient_id,
                week=week,
                window_minutes=window_minutes,
                window_index=w,
                features=EpochFeatures(*(float(v) for v in members.mean(axis=0))),
                label=label,
            )
        )
    return out


def active_seconds(
    series: SampleSeries, activity_threshold_g: float = ACTIVITY_THRESHOLD_G
) -> int:
    """Count 1 s blocks whose vm standard deviation exceeds the threshold."""
    per_second = int(round(series.rate_hz))
    vm = vector_magnitudes(series)
    n_blocks = len(vm) // per_second
    blocks = vm[: n_blocks * per_second].reshape(n_blocks, per_second)
    return int(np.sum(np.std(blocks, axis=1) > activity_threshold_g))


def use_ratio(
    paretic: SampleSeries,
    non_paretic: SampleSeries,
    activity_threshold_g: float = ACTIVITY_THRESHOLD_G,
) -> float:
    """Active time of the paretic limb relative to the non-paretic limb."""
    reference = active_seconds(non_paretic, activity_threshold_g)
    if reference == 0:
        raise NoReferenceActivityError(
            f"{non_paretic.patient_id}: non-paretic limb shows no activity"
        )
    return active_seconds(paretic, activity_threshold_g) / reference


# --- feature table I/O --------------------------------------------------------

FEATURE_CSV_COLUMNS = (
    "patient_id",
    "week",
    "window_minutes",
    "window_index",
    *FEATURE_NAMES,
    "label",
)


def write_feature_csv(vectors: list[WindowFeatureVector], path) -> None:
    """One CSV of window vectors; floats carry 9 significant digits."""
    lines = [",".join(FEATURE_CSV_COLUMNS)]
    for v in vectors:
        values = ",".join(f"{x:.9g}" for x in v.features.as_array())
        lines.append(
            f"{v.patient_id},{v.week},{v.window_minutes},{v.window_index},"
            f"{values},{v.label.value}"
        )
    with open(path, "w", encoding="utf-8") as handle:
        handle.write("\n".join(lines) + "\n")


def read_feature_csv(path) -> list[WindowFeatureVector]:
    vectors = []
    with open(path, encoding="utf-8") as handle:
        header = handle.readline().strip()
        if tuple(header.split(",")) != FEATURE_CSV_COLUMNS:
            raise MalformedRowError(f"unexpected feature CSV header in {path}")
        for line in handle:
            cells = line.strip().split(",")
            pid, week, window_minutes, window_index = cells[:4]
            feature_values = [float(c) for c in cells[4:-1]]
            vectors.append(
                WindowFeatureVector(
                    patient_id=pid,
                    week=int(week),
                    window_minutes=int(window_minutes),
                    window_index=int(window_index),
                    features=EpochFeatures(*feature_values),
                    label=Severity(cells[-1]),
                )
            )
    return vectors
