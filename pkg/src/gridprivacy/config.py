"""Run configuration: a key=value file merged with CLI flag overrides.

Flags win over file values. Every run copies its effective configuration
into the output directory so results stay reproducible from one artifact.
"""
from __future__ import annotations

import re
from dataclasses import dataclass, fields
from pathlib import Path

from .errors import ValidationError
from .evaluation import CaseSpec

MODES = ("udp", "pdp-distance", "pdp-preference", "pdp-explicit")

_CASE_PATTERN = re.compile(r"^\s*([0-9.eE+-]+)\s*:\s*([0-9.eE+-]+)\s*$")


def parse_cases(text: str) -> tuple[CaseSpec, ...]:
    """Parse a cases flag like ``0.6:0.6,0.6:0.8`` into case specs."""
    specs = []
    for index, chunk in enumerate(text.split(","), start=1):
        match = _CASE_PATTERN.match(chunk)
        if not match:
            raise ValidationError(
                f"malformed case {chunk!r}: use eps_fog:eps_cloud pairs separated "
                f"by commas, e.g. --cases 0.6:0.6,0.6:0.8,0.8:0.6,0.8:0.8"
            )
        try:
            eps_fog, eps_cloud = float(match.group(1)), float(match.group(2))
        except ValueError:
            raise ValidationError(f"malformed case {chunk!r}: epsilons must be numbers") from None
        specs.append(CaseSpec(f"case{index}", eps_fog, eps_cloud))
    return tuple(specs)


def cases_to_text(cases: tuple[CaseSpec, ...]) -> str:
    return ",".join(f"{c.eps_fog}:{c.eps_cloud}" for c in cases)


@dataclass
class RunConfig:
    """Everything a pipeline command needs, resolved and validated."""

    seed: int = 0
    eps_min: float = 0.1
    eps_max: float = 1.0
    th_d: float | None = None
    sensitivity: float | None = None
    delta: float | None = None
    epsilon: float | None = None
    mode: str = "udp"
    cases: str = "0.6:0.6,0.6:0.8,0.8:0.6,0.8:0.8"
    compare_seeds: int = 30
    topology: str | None = None
    data: str | None = None
    synthetic: str | None = None
    incidents: str | None = None
    vulnerabilities: str | None = None
    plan: str | None = None
    aggregation_map: str | None = None
    destination: str | None = None
    out: str = "out"

    _PATH_FIELDS = ("topology", "data", "incidents", "vulnerabilities", "plan",
                    "aggregation_map")
    _FLOAT_FIELDS = ("eps_min", "eps_max", "th_d", "sensitivity", "delta", "epsilon")
    _INT_FIELDS = ("seed", "compare_seeds")

    def validate_paths(self) -> None:
        for name in self._PATH_FIELDS:
            value = getattr(self, name)
            if value is not None and not Path(value).is_file():
                raise ValidationError(f"{name} file does not exist: {value}")

    def parsed_cases(self) -> tuple[CaseSpec, ...]:
        return parse_cases(self.cases)

    def synthetic_shape(self) -> tuple[int, int] | None:
        if self.synthetic is None:
            return None
        match = re.match(r"^\s*(\d+)\s*x\s*(\d+)\s*$", self.synthetic)
        if not match:
            raise ValidationError(
                f"malformed synthetic shape {self.synthetic!r}: use HOMESxMINUTES, e.g. 100x1440"
            )
        return int(match.group(1)), int(match.group(2))

    def as_text(self) -> str:
        # the output directory is where this copy lives, not a run input;
        # leaving it out keeps repeated runs byte-comparable across out dirs
        lines = []
        for entry in fields(self):
            value = getattr(self, entry.name)
            if value is not None and entry.name != "out":
                lines.append(f"{entry.name} = {value}")
        return "\n".join(lines) + "\n"


def load_config_file(path: str | Path) -> dict[str, str]:
    """Parse ``key = value`` lines; blank lines and # comments are skipped."""
    values: dict[str, str] = {}
    with open(path, encoding="utf-8") as handle:
        for line_number, raw in enumerate(handle, start=1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            if "=" not in line:
                raise ValidationError(
                    f"{path}: line {line_number}: expected 'key = value', got {line!r}"
                )
            key, _, value = line.partition("=")
            values[key.strip()] = value.strip()
    return values


def resolve_config(
    config_path: str | None, overrides: dict[str, object]
) -> RunConfig:
    """Build a RunConfig from an optional file plus flag overrides (flags win)."""
    merged: dict[str, object] = {}
    if config_path is not None:
        if not Path(config_path).is_file():
            raise ValidationError(f"config file does not exist: {config_path}")
        merged.update(load_config_file(config_path))
    merged.update({k: v for k, v in overrides.items() if v is not None})

    known = {entry.name for entry in fields(RunConfig)}
    unknown = set(merged) - known
    if unknown:
        raise ValidationError(f"unknown config keys: {sorted(unknown)}")

    config = RunConfig()
    for key, value in merged.items():
        if key in RunConfig._FLOAT_FIELDS and value is not None:
            try:
                value = float(value)
            except (TypeError, ValueError):
                raise ValidationError(f"config key {key} must be a number, got {value!r}") from None
        elif key in RunConfig._INT_FIELDS and value is not None:
            try:
                value = int(value)
            except (TypeError, ValueError):
                raise ValidationError(f"config key {key} must be an integer, got {value!r}") from None
        setattr(config, key, value)

    if config.mode not in MODES:
        raise ValidationError(f"mode must be one of {', '.join(MODES)}, got {config.mode!r}")
    if not 0 < config.eps_min < config.eps_max:
        raise ValidationError(
            f"need 0 < eps_min < eps_max, got [{config.eps_min}, {config.eps_max}]"
        )
    config.parsed_cases()
    config.synthetic_shape()
    config.validate_paths()
    return config
