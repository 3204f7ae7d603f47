"""Run configuration: a JSON file of key-value settings, validated at startup.

Every run echoes its fully resolved configuration (defaults filled in,
command-line overrides applied) into the output directory as
``run_config_resolved.json``; re-running from that file reproduces all
outputs byte-identically.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field, fields, replace
from pathlib import Path

from .errors import ConfigError
from .ingest import ARAT_MAX
from .models import ALLOWED_HYPERPARAMETERS, DEFAULT_GRIDS, MODEL_KINDS

RESOLVED_NAME = "run_config_resolved.json"
ALLOWED_WINDOWS = (15, 30, 45, 60, 90, 120)


@dataclass(frozen=True)
class RunConfig:
    accel_dir: str
    clinical_csv: str
    output_dir: str
    seed: int = 7
    rate_hz: float = 30.0
    trim_lead_minutes: float = 10.0
    horizon_minutes: float = 240.0
    epoch_seconds: float = 12.8
    window_minutes_set: tuple[int, ...] = ALLOWED_WINDOWS
    activity_threshold_g: float = 0.02
    arat_cutoff: int = 22
    train_fraction: float = 0.8
    k_folds: int = 5
    group_folds_by_patient: bool = True
    model_kinds: tuple[str, ...] = MODEL_KINDS
    grids: dict = field(default_factory=lambda: _copy_grids(DEFAULT_GRIDS))
    synth_n_patients: int = 40
    synth_severe_fraction: float = 0.5

    def validate(self) -> None:
        if self.seed < 0:
            raise ConfigError("seed must be a non-negative integer")
        if self.rate_hz <= 0:
            raise ConfigError("rate_hz must be positive")
        if self.trim_lead_minutes < 0 or self.horizon_minutes <= 0:
            raise ConfigError("trim/horizon minutes must be non-negative/positive")
        if self.epoch_seconds <= 0:
            raise ConfigError("epoch_seconds must be positive")
        if not self.window_minutes_set:
            raise ConfigError("window_minutes_set must not be empty")
        bad = [w for w in self.window_minutes_set if w not in ALLOWED_WINDOWS]
        if bad:
            raise ConfigError(
                f"window lengths {bad} not in allowed set {ALLOWED_WINDOWS}"
            )
        if not 0 < self.arat_cutoff <= ARAT_MAX:
            raise ConfigError(f"arat_cutoff must be in 1..{ARAT_MAX}")
        if not 0.0 < self.train_fraction < 1.0:
            raise ConfigError("train_fraction must be in (0, 1)")
        if self.k_folds < 2:
            raise ConfigError("k_folds must be at least 2")
        if self.activity_threshold_g <= 0:
            raise ConfigError("activity_threshold_g must be positive")
        unknown_kinds = [k for k in self.model_kinds if k not in MODEL_KINDS]
        if unknown_kinds:
            raise ConfigError(f"unknown model kinds {unknown_kinds}")
        for kind, grid in self.grids.items():
            if kind not in MODEL_KINDS:
                raise ConfigError(f"grid declared for unknown kind {kind!r}")
            if not isinstance(grid, dict):
                raise ConfigError(f"grid for {kind} must map names to value lists")
            for name, values in grid.items():
                if name not in ALLOWED_HYPERPARAMETERS[kind]:
                    raise ConfigError(
                        f"{kind} grid has unknown hyperparameter {name!r}"
                    )
                if not isinstance(values, list) or not values:
                    raise ConfigError(
                        f"{kind}.{name} grid must be a non-empty value list"
                    )
        if self.synth_n_patients < 2:
            raise ConfigError("synth_n_patients must be at least 2")
        if not 0.0 < self.synth_severe_fraction < 1.0:
            raise ConfigError("synth_severe_fraction must be in (0, 1)")

    @property
    def trim_lead_s(self) -> float:
        return self.trim_lead_minutes * 60.0

    @property
    def horizon_s(self) -> float:
        return self.horizon_minutes * 60.0

    def grid_for(self, kind: str) -> dict:
        return self.grids.get(kind, DEFAULT_GRIDS[kind])

    def to_json_dict(self) -> dict:
        d = asdict(self)
        d["window_minutes_set"] = list(self.window_minutes_set)
        d["model_kinds"] = list(self.model_kinds)
        return d

    def write_resolved(self, output_dir: Path) -> Path:
        output_dir = Path(output_dir)
        output_dir.mkdir(parents=True, exist_ok=True)
        path = output_dir / RESOLVED_NAME
        path.write_text(
            json.dumps(self.to_json_dict(), indent=2, sort_keys=True) + "\n",
            encoding="utf-8",
        )
        return path


def _copy_grids(grids: dict) -> dict:
    return {kind: {name: list(vals) for name, vals in g.items()} for kind, g in grids.items()}


_REQUIRED_KEYS = ("accel_dir", "clinical_csv", "output_dir")


def load_config(path: Path, overrides: dict | None = None) -> RunConfig:
    """Load, override, and validate a JSON run configuration."""
    path = Path(path)
    try:
        raw = json.loads(path.read_text(encoding="utf-8"))
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config {path} is not valid JSON: {exc}") from exc
    if not isinstance(raw, dict):
        raise ConfigError("config must be a JSON object")

    grids_file = raw.pop("grids_file", None)
    grids = _copy_grids(DEFAULT_GRIDS)
    if grids_file is not None:
        grids_path = (path.parent / grids_file).resolve()
        try:
            declared = json.loads(grids_path.read_text(encoding="utf-8"))
        except OSError as exc:
            raise ConfigError(f"cannot read grids file {grids_path}: {exc}") from exc
        except json.JSONDecodeError as exc:
            raise ConfigError(f"grids file is not valid JSON: {exc}") from exc
        grids.update(declared)
    grids.update(raw.pop("grids", {}))

    known = {f.name for f in fields(RunConfig)}
    unknown = set(raw) - known
    if unknown:
        raise ConfigError(f"unknown config keys {sorted(unknown)}")
    missing = [k for k in _REQUIRED_KEYS if k not in raw]
    if missing:
        raise ConfigError(f"config missing required keys {missing}")

    for key in ("window_minutes_set", "model_kinds"):
        if key in raw:
            raw[key] = tuple(raw[key])
    try:
        config = RunConfig(grids=grids, **raw)
    except TypeError as exc:
        raise ConfigError(f"invalid config: {exc}") from exc
    if overrides:
        config = replace(config, **overrides)
    config.validate()
    return config
