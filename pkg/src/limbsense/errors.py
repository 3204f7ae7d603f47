"""Exception hierarchy shared by the whole pipeline.

Three branches map onto the CLI exit codes: configuration problems (exit 2),
data problems (exit 3), and degenerate experiments (exit 4).
"""

from __future__ import annotations


class LimbsenseError(Exception):
    """Base class for all pipeline errors."""


class ConfigError(LimbsenseError):
    """Invalid or inconsistent run configuration."""


class DataError(LimbsenseError):
    """Input data violates a documented contract."""


class DegenerateExperimentError(LimbsenseError):
    """The experiment cannot produce a meaningful result as configured."""


# --- ingest ---------------------------------------------------------------

class MalformedRowError(DataError):
    """A CSV row has the wrong column count or a non-numeric cell."""


class NonMonotonicTimeError(DataError):
    """Sample timestamps are not strictly increasing."""


class RateMismatchError(DataError):
    """Inferred sampling rate deviates from the expected rate."""


class ScoreOutOfRangeError(DataError):
    """A clinical score lies outside its documented range."""


class UnknownWeekError(DataError):
    """A clinical record's week is not in the collection schedule."""


class SessionTooShortError(DataError):
    """Recording shorter than the lead-in plus analysis horizon."""


class LabelUnavailableError(DataError):
    """No clinical record exists for a recorded session."""


# --- features ---------------------------------------------------------------

class EmptyInputError(DataError):
    """Too few samples to form even one epoch."""


class NoDominantFrequencyError(DataError):
    """All non-DC spectral power is numerically zero."""


class EmptyWindowError(DataError):
    """An aggregation window contains no epochs."""


class NoReferenceActivityError(DataError):
    """The non-paretic limb shows zero active time; use ratio is undefined."""


# --- models ---------------------------------------------------------------

class DegenerateSplitError(DegenerateExperimentError):
    """A train/test split would leave one side empty or single-class."""


class TooFewGroupsError(DegenerateExperimentError):
    """Fewer groups than cross-validation folds."""


class SingleClassTrainingError(DegenerateExperimentError):
    """Training rows contain only one class."""


class NonFiniteFeatureError(DataError):
    """A feature matrix contains NaN or infinity."""


class DimensionMismatchError(DataError):
    """A row's dimension does not match the trained model."""


# --- eval -------------------------------------------------------------------

class SingleClassLabelsError(DegenerateExperimentError):
    """ROC analysis needs at least one positive and one negative label."""


class ConstantInputError(DegenerateExperimentError):
    """Pearson correlation is undefined for a constant sequence."""


class IoFailureError(DataError):
    """Filesystem read or write failed."""
