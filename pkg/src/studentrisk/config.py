"""Line-oriented ``key = value`` configuration files.

One file can carry both pipeline keys (paths, thresholds, mining and
learning parameters) and ``synth.*`` keys for cohort generation; dotted
keys act as sections and ``#`` starts a comment line.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from pathlib import Path

from .errors import ConfigError
from .learn.mlp import MlpConfig
from .patterns import (
    GapBoundary,
    GapInterior,
    GapPolicy,
    MiningConfig,
    parse_pattern,
)
from .sequences import DEFAULT_ORDER_THRESHOLDS, SequenceKind
from .synth import CompileSignal, PlantedPattern, SynthConfig

_PIPELINE_KEYS = {
    "paths.submissions",
    "paths.outcomes",
    "paths.grouping",
    "paths.taxonomy",
    "output.dir",
    "sequences.order_threshold_1",
    "sequences.order_threshold_2",
    "mine.min_recall",
    "mine.min_accuracy",
    "mine.max_pattern_length",
    "mine.gap_interior",
    "mine.gap_boundary",
    "learn.seed",
    "learn.train_fraction",
    "learn.trees",
    "learn.max_depth",
    "learn.epochs",
    "learn.batch_size",
    "learn.learning_rate",
    "learn.momentum",
    "learn.hidden_widths",
}
_SYNTH_KEYS = {
    "synth.seed",
    "synth.n_students",
    "synth.g",
    "synth.fail_fraction",
    "synth.assignments_per_group",
    "synth.label_noise",
    "synth.order_threshold_1",
    "synth.order_threshold_2",
    "synth.compile_rates_fail",
    "synth.compile_rates_pass",
}
_SYNTH_PATTERN_KEY = re.compile(r"^synth\.pattern\.(\d+)\.(kind|text|fail_rate|pass_rate)$")


def read_kv_file(path) -> dict[str, str]:
    """Parse a key=value file, rejecting unknown or duplicate keys."""
    values: dict[str, str] = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            if "=" not in line:
                raise ConfigError(f"{path}:{lineno}: expected 'key = value'")
            key, value = line.split("=", 1)
            key = key.strip()
            value = value.strip()
            if key in values:
                raise ConfigError(f"{path}:{lineno}: duplicate key {key!r}")
            if (
                key not in _PIPELINE_KEYS
                and key not in _SYNTH_KEYS
                and not _SYNTH_PATTERN_KEY.match(key)
            ):
                raise ConfigError(f"{path}:{lineno}: unknown key {key!r}")
            values[key] = value
    return values


def _get_float(values, key, default=None) -> float | None:
    if key not in values:
        return default
    try:
        return float(values[key])
    except ValueError:
        raise ConfigError(f"{key} must be a number, got {values[key]!r}") from None


def _get_int(values, key, default=None) -> int | None:
    if key not in values:
        return default
    try:
        return int(values[key])
    except ValueError:
        raise ConfigError(f"{key} must be an integer, got {values[key]!r}") from None


def _get_int_list(values, key, default) -> tuple[int, ...]:
    if key not in values:
        return default
    try:
        return tuple(int(v.strip()) for v in values[key].split(","))
    except ValueError:
        raise ConfigError(
            f"{key} must be comma-separated integers, got {values[key]!r}"
        ) from None


def _get_float_list(values, key) -> tuple[float, ...] | None:
    if key not in values:
        return None
    try:
        return tuple(float(v.strip()) for v in values[key].split(","))
    except ValueError:
        raise ConfigError(
            f"{key} must be comma-separated numbers, got {values[key]!r}"
        ) from None


def _get_enum(values, key, enum_cls, default):
    if key not in values:
        return default
    try:
        return enum_cls(values[key])
    except ValueError:
        options = ", ".join(e.value for e in enum_cls)
        raise ConfigError(f"{key} must be one of {options}") from None


@dataclass(frozen=True)
class LearnParams:
    seed: int = 7
    train_fraction: float = 0.8
    trees: int = 200
    max_depth: int | None = None
    epochs: int = 300
    batch_size: int = 32
    learning_rate: float = 0.05
    momentum: float = 0.9
    hidden_widths: tuple[int, ...] = (32, 16, 8)

    def mlp_config(self) -> MlpConfig:
        return MlpConfig(
            hidden_widths=self.hidden_widths,
            learning_rate=self.learning_rate,
            momentum=self.momentum,
            epochs=self.epochs,
            batch_size=self.batch_size,
        )


@dataclass(frozen=True)
class PipelineConfig:
    submissions_path: Path
    outcomes_path: Path
    grouping_path: Path
    taxonomy_path: Path | None
    out_dir: Path
    order_thresholds: tuple[float, float]
    mining: MiningConfig
    learn: LearnParams

    @classmethod
    def from_values(
        cls,
        values: dict[str, str],
        base_dir: Path,
        out_override: str | None = None,
        seed_override: int | None = None,
    ) -> "PipelineConfig":
        def path_of(key, required=True):
            if key not in values:
                if required:
                    raise ConfigError(f"missing required key {key!r}")
                return None
            p = Path(values[key])
            return p if p.is_absolute() else base_dir / p

        thresholds = (
            _get_float(values, "sequences.order_threshold_1", DEFAULT_ORDER_THRESHOLDS[0]),
            _get_float(values, "sequences.order_threshold_2", DEFAULT_ORDER_THRESHOLDS[1]),
        )
        if not 0 < thresholds[0] < thresholds[1]:
            raise ConfigError(f"order thresholds must satisfy 0 < t1 < t2, got {thresholds}")
        try:
            mining = MiningConfig(
                min_recall=_get_float(values, "mine.min_recall", 0.70),
                min_accuracy=_get_float(values, "mine.min_accuracy", 0.70),
                max_pattern_length=_get_int(values, "mine.max_pattern_length", 6),
                gap_policy=GapPolicy(
                    interior=_get_enum(
                        values, "mine.gap_interior", GapInterior, GapInterior.ONE_OR_MORE
                    ),
                    boundary=_get_enum(
                        values, "mine.gap_boundary", GapBoundary, GapBoundary.REQUIRED
                    ),
                ),
            )
        except ValueError as err:
            raise ConfigError(str(err)) from None
        learn = LearnParams(
            seed=seed_override
            if seed_override is not None
            else _get_int(values, "learn.seed", 7),
            train_fraction=_get_float(values, "learn.train_fraction", 0.8),
            trees=_get_int(values, "learn.trees", 200),
            max_depth=_get_int(values, "learn.max_depth", None),
            epochs=_get_int(values, "learn.epochs", 300),
            batch_size=_get_int(values, "learn.batch_size", 32),
            learning_rate=_get_float(values, "learn.learning_rate", 0.05),
            momentum=_get_float(values, "learn.momentum", 0.9),
            hidden_widths=_get_int_list(values, "learn.hidden_widths", (32, 16, 8)),
        )
        out_dir = Path(out_override) if out_override else Path(values.get("output.dir", "out"))
        if not out_dir.is_absolute():
            out_dir = base_dir / out_dir
        return cls(
            submissions_path=path_of("paths.submissions"),
            outcomes_path=path_of("paths.outcomes"),
            grouping_path=path_of("paths.grouping"),
            taxonomy_path=path_of("paths.taxonomy", required=False),
            out_dir=out_dir,
            order_thresholds=thresholds,
            mining=mining,
            learn=learn,
        )

    @classmethod
    def from_file(
        cls, path, out_override: str | None = None, seed_override: int | None = None
    ) -> "PipelineConfig":
        path = Path(path)
        return cls.from_values(
            read_kv_file(path), path.parent, out_override, seed_override
        )


def synth_config_from_values(
    values: dict[str, str], seed_override: int | None = None
) -> SynthConfig:
    if "synth.n_students" not in values:
        raise ConfigError("missing required key 'synth.n_students'")
    seed = seed_override if seed_override is not None else _get_int(values, "synth.seed", 0)

    planted: list[PlantedPattern] = []
    indices = sorted(
        {
            int(m.group(1))
            for key in values
            if (m := _SYNTH_PATTERN_KEY.match(key)) is not None
        }
    )
    if indices and indices != list(range(1, len(indices) + 1)):
        raise ConfigError(f"synth.pattern indices must be 1..k, got {indices}")
    for idx in indices:
        prefix = f"synth.pattern.{idx}"
        for part in ("kind", "text", "fail_rate", "pass_rate"):
            if f"{prefix}.{part}" not in values:
                raise ConfigError(f"missing key '{prefix}.{part}'")
        try:
            kind = SequenceKind(values[f"{prefix}.kind"])
        except ValueError:
            raise ConfigError(
                f"{prefix}.kind must be one of "
                + ", ".join(k.value for k in SequenceKind)
            ) from None
        pattern = parse_pattern(values[f"{prefix}.text"], kind)
        planted.append(
            PlantedPattern(
                pattern=pattern,
                fail_rate=_get_float(values, f"{prefix}.fail_rate"),
                pass_rate=_get_float(values, f"{prefix}.pass_rate"),
            )
        )

    fail_rates = _get_float_list(values, "synth.compile_rates_fail")
    pass_rates = _get_float_list(values, "synth.compile_rates_pass")
    if (fail_rates is None) != (pass_rates is None):
        raise ConfigError(
            "synth.compile_rates_fail and synth.compile_rates_pass "
            "must be given together"
        )
    signal = (
        CompileSignal(fail_rates=fail_rates, pass_rates=pass_rates)
        if fail_rates is not None
        else None
    )

    t1 = _get_float(values, "synth.order_threshold_1", None)
    t2 = _get_float(values, "synth.order_threshold_2", None)
    if (t1 is None) != (t2 is None):
        raise ConfigError("synth order thresholds must be given together")

    return SynthConfig(
        seed=seed,
        n_students=_get_int(values, "synth.n_students"),
        g=_get_int(values, "synth.g", 14),
        fail_fraction=_get_float(values, "synth.fail_fraction", 0.4),
        assignments_per_group=_get_int(values, "synth.assignments_per_group", 2),
        label_noise=_get_float(values, "synth.label_noise", 0.0),
        planted_patterns=tuple(planted),
        compile_signal=signal,
        order_thresholds=(t1, t2) if t1 is not None else None,
    )


def synth_config_from_file(path, seed_override: int | None = None) -> SynthConfig:
    return synth_config_from_values(read_kv_file(path), seed_override)
