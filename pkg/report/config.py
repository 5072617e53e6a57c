import os
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Optional

from sphere.metric_spec import ConfigError, MetricSpec, parse_key_value_text

__all__ = ["ConfigError", "VerifyConfig", "default_jet_order", "JET_ORDER_ENV"]

JET_ORDER_ENV = "FINSLER_JET_ORDER"
DEFAULT_JET_ORDER = 6
DEFAULT_TOLERANCE = 1e-8
DEFAULT_QUOT_TOLERANCE = 1e-9
OUTPUT_FORMATS = ("text", "json", "csv")

_METRIC_KEYS = {"K", "sign", "hemisphere", "drift_scale"}
_RUN_KEYS = {"samples", "seed", "order", "tol", "quot_tol", "workers"}


def default_jet_order() -> int:
    """Jet order from $FINSLER_JET_ORDER, falling back to 6."""
    raw = os.environ.get(JET_ORDER_ENV)
    if raw is None or not raw.strip():
        return DEFAULT_JET_ORDER
    try:
        order = int(raw)
    except ValueError:
        raise ConfigError(f"{JET_ORDER_ENV} must be an integer, got {raw!r}") from None
    if order < 1:
        raise ConfigError(f"{JET_ORDER_ENV} must be >= 1, got {order}")
    return order


@dataclass(frozen=True)
class VerifyConfig:
    """Resolved settings of one verification run. Embedded verbatim in every report."""

    spec: MetricSpec
    samples: int = 20
    seed: int = 0
    order: int = field(default_factory=default_jet_order)
    tol: float = DEFAULT_TOLERANCE
    quot_tol: float = DEFAULT_QUOT_TOLERANCE
    reference_samples: bool = False
    output_format: str = "text"
    out: Optional[Path] = None
    workers: int = 1
    timing: bool = False
    explicit_samples: tuple = ()  # ((p, y), ...) evaluated before the random ones

    def __post_init__(self):
        if self.samples < 0:
            raise ConfigError(f"sample count must be >= 0, got {self.samples}")
        if self.samples == 0 and not self.reference_samples and not self.explicit_samples:
            raise ConfigError("sample count must be >= 1 unless reference or explicit samples are given")
        if self.order < 1:
            raise ConfigError(f"jet order must be >= 1, got {self.order}")
        if not self.tol > 0 or not self.quot_tol > 0:
            raise ConfigError(f"tolerances must be positive, got tol={self.tol} quot_tol={self.quot_tol}")
        if self.output_format not in OUTPUT_FORMATS:
            raise ConfigError(f"output format must be one of {OUTPUT_FORMATS}, got {self.output_format!r}")
        if self.workers < 1:
            raise ConfigError(f"workers must be >= 1, got {self.workers}")

    def with_overrides(self, **overrides) -> "VerifyConfig":
        """Replace the given fields, ignoring ``None`` values (unset CLI flags)."""
        return replace(self, **{key: value for key, value in overrides.items() if value is not None})

    def to_dict(self) -> dict:
        return {
            "spec": self.spec.to_dict(),
            "samples": self.samples,
            "seed": self.seed,
            "order": self.order,
            "tol": self.tol,
            "quot_tol": self.quot_tol,
            "reference_samples": self.reference_samples,
            "format": self.output_format,
            "workers": self.workers,
            "explicit_samples": [[list(p), list(y)] for p, y in self.explicit_samples],
        }

    @staticmethod
    def from_config_text(text: str) -> "VerifyConfig":
        entries = parse_key_value_text(text)
        unknown = set(entries) - _METRIC_KEYS - _RUN_KEYS
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        spec = MetricSpec.from_dict({key: value for key, value in entries.items() if key in _METRIC_KEYS})

        run = {}
        try:
            for key in ("samples", "seed", "order", "workers"):
                if key in entries:
                    run[key] = int(entries[key])
            for key in ("tol", "quot_tol"):
                if key in entries:
                    run[key] = float(entries[key])
        except ValueError as exc:
            raise ConfigError(f"bad run setting: {exc}") from None
        return VerifyConfig(spec=spec, **run)

    @staticmethod
    def from_file(path: Path) -> "VerifyConfig":
        path = Path(path)
        if not path.is_file():
            raise ConfigError(f"config file not found: {path}")
        return VerifyConfig.from_config_text(path.read_text(encoding="utf-8"))
