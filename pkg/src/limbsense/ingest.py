"""Parsing and validation of raw accelerometer recordings and clinical scores.

Accelerometer CSVs carry a `t,ax,ay,az` header (time in seconds, acceleration
in g). The time column is optional; when absent, t is synthesized as
index / rate. Clinical CSVs carry
`patient_id,affected_side,week,arat,ue_fm,safe`.
"""

from __future__ import annotations

import io
import logging
from dataclasses import dataclass, field
from enum import Enum
from typing import BinaryIO, Iterable

import numpy as np
import pandas as pd

from .errors import (
    MalformedRowError,
    NonMonotonicTimeError,
    RateMismatchError,
    ScoreOutOfRangeError,
    SessionTooShortError,
    UnknownWeekError,
)

log = logging.getLogger(__name__)

COLLECTION_WEEKS = (2, 4, 6, 8, 12, 16, 20, 24)
ARAT_MAX = 57
UE_FM_MAX = 66
SAFE_MAX = 10

# Maximum tolerated jitter between consecutive timestamps, in seconds.
GAP_TOLERANCE_S = 1e-6
# Maximum relative deviation of the inferred rate from the expected rate.
RATE_TOLERANCE = 0.01


class Limb(str, Enum):
    PARETIC = "paretic"
    NON_PARETIC = "non_paretic"


class Side(str, Enum):
    LEFT = "left"
    RIGHT = "right"


class Severity(str, Enum):
    SEVERE = "severe"
    MODERATE = "moderate"


@dataclass(frozen=True)
class AccelSample:
    """One tri-axial sample: time in seconds, components in g."""

    t: float
    ax: float
    ay: float
    az: float

    def __post_init__(self) -> None:
        values = (self.t, self.ax, self.ay, self.az)
        if not all(np.isfinite(v) for v in values):
            raise MalformedRowError(f"non-finite sample {values}")
        if self.t < 0:
            raise MalformedRowError(f"negative timestamp {self.t}")


@dataclass(frozen=True)
class SampleSeries:
    """A fixed-rate recording of one limb, backed by read-only arrays."""

    patient_id: str
    limb: Limb
    rate_hz: float
    t: np.ndarray
    ax: np.ndarray
    ay: np.ndarray
    az: np.ndarray

    def __post_init__(self) -> None:
        arrays = (self.t, self.ax, self.ay, self.az)
        n = len(self.t)
        if any(len(a) != n for a in arrays):
            raise MalformedRowError("component arrays differ in length")
        for a in arrays:
            if not np.all(np.isfinite(a)):
                raise MalformedRowError("non-finite values in series")
            a.setflags(write=False)
        if n and self.t[0] < 0:
            raise NonMonotonicTimeError("timestamps must be non-negative")
        if n > 1:
            gaps = np.diff(self.t)
            if np.any(gaps <= 0):
                i = int(np.argmax(gaps <= 0))
                raise NonMonotonicTimeError(
                    f"t not strictly increasing at sample {i + 1}"
                )
            expected = 1.0 / self.rate_hz
            worst = float(np.max(np.abs(gaps - expected)))
            if worst > GAP_TOLERANCE_S:
                raise RateMismatchError(
                    f"inter-sample gap deviates from {expected:.6g}s "
                    f"by up to {worst:.3g}s"
                )

    def __len__(self) -> int:
        return len(self.t)

    @property
    def duration_s(self) -> float:
        """Time span covered by the recording, counting each sample's slot."""
        return len(self.t) / self.rate_hz

    def sample(self, i: int) -> AccelSample:
        return AccelSample(
            t=float(self.t[i]),
            ax=float(self.ax[i]),
            ay=float(self.ay[i]),
            az=float(self.az[i]),
        )

    def samples(self) -> Iterable[AccelSample]:
        for i in range(len(self.t)):
            yield self.sample(i)


@dataclass(frozen=True)
class ClinicalRecord:
    patient_id: str
    affected_side: Side
    week: int
    arat: int
    ue_fm: int
    safe: int

    def __post_init__(self) -> None:
        if self.week not in COLLECTION_WEEKS:
            raise UnknownWeekError(
                f"week {self.week} not in collection schedule {COLLECTION_WEEKS}"
            )
        for name, value, top in (
            ("arat", self.arat, ARAT_MAX),
            ("ue_fm", self.ue_fm, UE_FM_MAX),
            ("safe", self.safe, SAFE_MAX),
        ):
            if not 0 <= value <= top:
                raise ScoreOutOfRangeError(
                    f"{name}={value} outside 0..{top} "
                    f"(patient {self.patient_id})"
                )


@dataclass(frozen=True)
class SeverityLabel:
    value: Severity
    arat: int = field(repr=False, default=0)
    cutoff: int = field(repr=False, default=0)


def label_severity(record: ClinicalRecord, cutoff: int) -> SeverityLabel:
    """Severe iff arat < cutoff (strict), else moderate."""
    if not 0 < cutoff <= ARAT_MAX:
        raise ValueError(f"cutoff must be in 1..{ARAT_MAX}, got {cutoff}")
    value = Severity.SEVERE if record.arat < cutoff else Severity.MODERATE
    return SeverityLabel(value=value, arat=record.arat, cutoff=cutoff)


ACCEL_COLUMNS = ("t", "ax", "ay", "az")


def parse_accel_csv(
    stream: BinaryIO | bytes,
    patient_id: str,
    limb: Limb,
    expected_rate_hz: float = 30.0,
) -> SampleSeries:
    """Parse one accelerometer CSV into a validated SampleSeries.

    The sampling rate is inferred from the median inter-sample gap and must
    match ``expected_rate_hz`` within 1%; the validated nominal rate is
    recorded on the series. A missing ``t`` column is synthesized as
    index / expected_rate_hz.
    """
    if isinstance(stream, bytes):
        stream = io.BytesIO(stream)
    try:
        frame = pd.read_csv(stream, dtype=np.float64, float_precision="round_trip")
    except (ValueError, pd.errors.ParserError) as exc:
        raise _locate_bad_row(stream) from exc
    columns = tuple(frame.columns)
    if columns == ACCEL_COLUMNS:
        t = frame["t"].to_numpy()
    elif columns == ACCEL_COLUMNS[1:]:
        t = np.arange(len(frame), dtype=np.float64) / expected_rate_hz
    else:
        raise MalformedRowError(
            f"expected header {','.join(ACCEL_COLUMNS)} "
            f"(t optional), got {','.join(map(str, columns))}"
        )
    if frame.isna().to_numpy().any():
        raise _locate_bad_row(stream)
    if len(t) > 1:
        gaps = np.diff(t)
        if np.any(gaps <= 0):
            i = int(np.argmax(gaps <= 0))
            raise NonMonotonicTimeError(
                f"{patient_id}/{limb.value}: t not increasing at row {i + 2}"
            )
        inferred = 1.0 / float(np.median(gaps))
        if abs(inferred - expected_rate_hz) > RATE_TOLERANCE * expected_rate_hz:
            raise RateMismatchError(
                f"{patient_id}/{limb.value}: inferred rate {inferred:.4g} Hz, "
                f"expected {expected_rate_hz:g} Hz"
            )
    return SampleSeries(
        patient_id=patient_id,
        limb=limb,
        rate_hz=float(expected_rate_hz),
        t=t,
        ax=frame["ax"].to_numpy(),
        ay=frame["ay"].to_numpy(),
        az=frame["az"].to_numpy(),
    )


def _locate_bad_row(stream: BinaryIO) -> MalformedRowError:
    """Re-scan a failed parse to report the first offending row."""
    stream.seek(0)
    text = io.TextIOWrapper(stream, encoding="utf-8")
    header = text.readline().strip()
    width = len(header.split(","))
    for lineno, line in enumerate(text, start=2):
        cells = line.rstrip("\n").split(",")
        if len(cells) != width:
            return MalformedRowError(
                f"row {lineno}: expected {width} columns, got {len(cells)}"
            )
        for cell in cells:
            try:
                float(cell)
            except ValueError:
                return MalformedRowError(f"row {lineno}: non-numeric cell {cell!r}")
    return MalformedRowError("malformed CSV")


def serialize_accel_csv(series: SampleSeries) -> bytes:
    """Inverse of parse_accel_csv; floats use shortest round-trip repr."""
    lines = [",".join(ACCEL_COLUMNS)]
    for i in range(len(series)):
        cells = (series.t[i], series.ax[i], series.ay[i], series.az[i])
        lines.append(",".join(repr(float(c)) for c in cells))
    return ("\n".join(lines) + "\n").encode("utf-8")


CLINICAL_COLUMNS = ("patient_id", "affected_side", "week", "arat", "ue_fm", "safe")


def parse_clinical_csv(stream: BinaryIO | bytes) -> list[ClinicalRecord]:
    """Parse the clinical score table, range-validating every row."""
    if isinstance(stream, bytes):
        stream = io.BytesIO(stream)
    text = io.TextIOWrapper(stream, encoding="utf-8")
    header = text.readline().strip()
    if tuple(header.split(",")) != CLINICAL_COLUMNS:
        raise MalformedRowError(
            f"expected header {','.join(CLINICAL_COLUMNS)}, got {header!r}"
        )
    records = []
    for lineno, line in enumerate(text, start=2):
        line = line.strip()
        if not line:
            continue
        cells = line.split(",")
        if len(cells) != len(CLINICAL_COLUMNS):
            raise MalformedRowError(
                f"row {lineno}: expected {len(CLINICAL_COLUMNS)} columns, "
                f"got {len(cells)}"
            )
        pid, side, *scores = cells
        try:
            side_value = Side(side)
        except ValueError:
            raise MalformedRowError(
                f"row {lineno}: affected_side must be left or right, got {side!r}"
            ) from None
        try:
            week, arat, ue_fm, safe = (int(s) for s in scores)
        except ValueError:
            raise MalformedRowError(
                f"row {lineno}: non-integer score in {scores}"
            ) from None
        records.append(
            ClinicalRecord(
                patient_id=pid,
                affected_side=side_value,
                week=week,
                arat=arat,
                ue_fm=ue_fm,
                safe=safe,
            )
        )
    return records


def trim_session(
    series: SampleSeries,
    lead_s: float = 600.0,
    horizon_s: float = 14400.0,
) -> SampleSeries:
    """Drop the lead-in, keep exactly the analysis horizon, re-base time.

    Retains samples with original t in [lead_s, lead_s + horizon_s);
    anything after the horizon is truncated, shorter recordings are rejected.
    """
    required = lead_s + horizon_s
    if series.duration_s < required:
        raise SessionTooShortError(
            f"{series.patient_id}/{series.limb.value}: "
            f"{series.duration_s / 60:.1f} min recorded, "
            f"{required / 60:.0f} min required"
        )
    keep = (series.t >= lead_s) & (series.t < lead_s + horizon_s)
    t = series.t[keep]
    return SampleSeries(
        patient_id=series.patient_id,
        limb=series.limb,
        rate_hz=series.rate_hz,
        t=t - t[0],
        ax=series.ax[keep],
        ay=series.ay[keep],
        az=series.az[keep],
    )
