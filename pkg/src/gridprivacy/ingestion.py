"""Minute-level consumption data: loading, synthesis, and tier aggregation.

Datasets hold one day of per-home readings keyed by (home, minute-of-day).
A seeded synthetic generator stands in for external meter data at desk
scale, and the aggregation map rolls homes up to fog nodes and fog nodes up
to a single cloud root by summation.
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Mapping

import numpy as np

from .errors import (
    DuplicateKeyError,
    InvalidCountError,
    MalformedRowError,
    NegativeConsumptionError,
    OutOfRangeTimestampError,
    UnmappedHomeError,
)
from .topology import Tier

MINUTES_PER_DAY = 1440
BUSY_START = 480   # 08:00
BUSY_END = 1080    # 18:00 (exclusive)

CSV_HEADER = ("home_id", "timestamp", "consumption")


@dataclass(frozen=True)
class ConsumptionRecord:
    home_id: str
    minute: int
    consumption: float


@dataclass(frozen=True)
class ConsumptionDataset:
    records: tuple[ConsumptionRecord, ...]

    @property
    def home_ids(self) -> tuple[str, ...]:
        seen: dict[str, None] = {}
        for record in self.records:
            seen.setdefault(record.home_id, None)
        return tuple(seen)

    def values(self) -> np.ndarray:
        return np.array([record.consumption for record in self.records])

    def __len__(self) -> int:
        return len(self.records)


def _validate_records(records: Iterable[ConsumptionRecord]) -> tuple[ConsumptionRecord, ...]:
    out = []
    seen: set[tuple[str, int]] = set()
    for record in records:
        key = (record.home_id, record.minute)
        if key in seen:
            raise DuplicateKeyError(
                f"duplicate reading for home {record.home_id!r} at minute {record.minute}"
            )
        seen.add(key)
        if not 0 <= record.minute < MINUTES_PER_DAY:
            raise OutOfRangeTimestampError(
                f"minute {record.minute} outside 0..{MINUTES_PER_DAY - 1}"
            )
        if record.consumption < 0:
            raise NegativeConsumptionError(
                f"negative consumption {record.consumption} for home {record.home_id!r}"
            )
        out.append(record)
    return tuple(out)


def dataset_from_records(records: Iterable[ConsumptionRecord]) -> ConsumptionDataset:
    return ConsumptionDataset(records=_validate_records(records))


def load_csv(path: str | Path) -> ConsumptionDataset:
    """Read a consumption CSV with header home_id,timestamp,consumption.

    Row order is preserved. Raises a line-numbered error for unparseable
    rows and specific errors for duplicates, negative readings, and
    out-of-day timestamps.
    """
    records = []
    seen: set[tuple[str, int]] = set()
    with open(path, newline="", encoding="utf-8") as handle:
        reader = csv.reader(handle)
        header = next(reader, None)
        if header is None or tuple(cell.strip() for cell in header) != CSV_HEADER:
            raise MalformedRowError(1, f"expected header {','.join(CSV_HEADER)}")
        for line, row in enumerate(reader, start=2):
            if not row or (len(row) == 1 and not row[0].strip()):
                continue
            if len(row) != 3:
                raise MalformedRowError(line, f"expected 3 columns, got {len(row)}")
            home_id = row[0].strip()
            if not home_id:
                raise MalformedRowError(line, "empty home id")
            try:
                minute = int(row[1])
            except ValueError:
                raise MalformedRowError(line, f"timestamp {row[1]!r} is not an integer") from None
            try:
                consumption = float(row[2])
            except ValueError:
                raise MalformedRowError(line, f"consumption {row[2]!r} is not a number") from None
            if not math.isfinite(consumption):
                raise MalformedRowError(line, f"consumption {row[2]!r} is not finite")
            if not 0 <= minute < MINUTES_PER_DAY:
                raise OutOfRangeTimestampError(
                    f"line {line}: minute {minute} outside 0..{MINUTES_PER_DAY - 1}"
                )
            if consumption < 0:
                raise NegativeConsumptionError(
                    f"line {line}: negative consumption {consumption}"
                )
            key = (home_id, minute)
            if key in seen:
                raise DuplicateKeyError(
                    f"line {line}: duplicate reading for home {home_id!r} at minute {minute}"
                )
            seen.add(key)
            records.append(ConsumptionRecord(home_id, minute, consumption))
    return ConsumptionDataset(records=tuple(records))


def write_csv(dataset: ConsumptionDataset, path: str | Path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as handle:
        writer = csv.writer(handle)
        writer.writerow(CSV_HEADER)
        for record in dataset.records:
            writer.writerow([record.home_id, record.minute, repr(record.consumption)])


def generate_synthetic(
    homes: int,
    minutes: int,
    seed: int,
    base_load: float = 1.0,
    busy_multiplier: float = 2.0,
) -> ConsumptionDataset:
    """Deterministic synthetic consumption for ``homes`` x ``minutes``.

    Readings are gamma-distributed around a per-home base level, scaled by
    the busy-hour multiplier between 08:00 and 18:00, so the busy/off-peak
    mean ratio matches the multiplier in expectation and readings are never
    negative.
    """
    if homes < 1:
        raise InvalidCountError(f"homes must be >= 1, got {homes}")
    if not 1 <= minutes <= MINUTES_PER_DAY:
        raise InvalidCountError(f"minutes must be in 1..{MINUTES_PER_DAY}, got {minutes}")
    if not base_load > 0 or not busy_multiplier > 0:
        raise InvalidCountError("base load and busy multiplier must be positive")

    rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence([int(seed)])))
    width = len(str(homes - 1))
    shape = 4.0  # concentration of the per-reading gamma noise

    minute_multiplier = np.ones(minutes)
    busy = (np.arange(minutes) >= BUSY_START) & (np.arange(minutes) < BUSY_END)
    minute_multiplier[busy] = busy_multiplier

    records = []
    home_factors = rng.uniform(0.75, 1.25, homes)
    for index in range(homes):
        home_id = f"h{index:0{width}d}"
        mean = base_load * home_factors[index] * minute_multiplier
        readings = rng.gamma(shape, mean / shape)
        records.extend(
            ConsumptionRecord(home_id, minute, float(readings[minute]))
            for minute in range(minutes)
        )
    return ConsumptionDataset(records=tuple(records))


@dataclass(frozen=True)
class AggregationMap:
    """Child-to-parent assignment: homes to fog nodes, fog nodes to one cloud."""

    home_to_fog: Mapping[str, str]
    fog_to_cloud: Mapping[str, str]

    def __post_init__(self):
        roots = set(self.fog_to_cloud.values())
        if len(roots) != 1:
            raise UnmappedHomeError(
                f"aggregation map must have exactly one cloud root, got {sorted(roots)}"
            )
        for fog in self.home_to_fog.values():
            if fog not in self.fog_to_cloud:
                raise UnmappedHomeError(f"fog node {fog!r} has no cloud parent")

    @property
    def cloud_root(self) -> str:
        return next(iter(self.fog_to_cloud.values()))

    @property
    def fog_ids(self) -> tuple[str, ...]:
        return tuple(sorted(self.fog_to_cloud))

    def fog_of(self, home_id: str) -> str:
        try:
            return self.home_to_fog[home_id]
        except KeyError:
            raise UnmappedHomeError(f"home {home_id!r} is not in the aggregation map") from None

    @classmethod
    def round_robin(
        cls, home_ids: Iterable[str], fan_in: int = 10, cloud_id: str = "cloud"
    ) -> "AggregationMap":
        """Default map: ceil(n/fan_in) fog nodes filled round-robin, one cloud."""
        homes = list(home_ids)
        if not homes:
            raise InvalidCountError("cannot build an aggregation map for zero homes")
        fog_count = math.ceil(len(homes) / fan_in)
        width = len(str(fog_count - 1))
        fogs = [f"fog{i:0{width}d}" for i in range(fog_count)]
        return cls(
            home_to_fog={home: fogs[i % fog_count] for i, home in enumerate(homes)},
            fog_to_cloud={fog: cloud_id for fog in fogs},
        )


@dataclass(frozen=True)
class AggregateRecord:
    node_id: str
    minute: int
    total: float


def aggregate(
    dataset: ConsumptionDataset,
    mapping: AggregationMap,
    level: Tier | str,
) -> tuple[AggregateRecord, ...]:
    """Per-minute sums at the fog or cloud tier, sorted by (node, minute).

    Cloud totals are the sums of the fog totals, so on raw data the total
    energy is conserved across every tier.
    """
    tier = Tier.parse(level) if isinstance(level, str) else level
    if tier is Tier.EDGE:
        raise UnmappedHomeError("edge data is not aggregated; use the dataset directly")

    fog_sums: dict[tuple[str, int], float] = {}
    for record in dataset.records:
        key = (mapping.fog_of(record.home_id), record.minute)
        fog_sums[key] = fog_sums.get(key, 0.0) + record.consumption

    if tier is Tier.FOG:
        return tuple(
            AggregateRecord(node, minute, total)
            for (node, minute), total in sorted(fog_sums.items())
        )

    cloud_sums: dict[tuple[str, int], float] = {}
    for (fog, minute), total in sorted(fog_sums.items()):
        key = (mapping.fog_to_cloud[fog], minute)
        cloud_sums[key] = cloud_sums.get(key, 0.0) + total
    return tuple(
        AggregateRecord(node, minute, total)
        for (node, minute), total in sorted(cloud_sums.items())
    )


def aggregate_records(
    records: Iterable[AggregateRecord],
    parent_of: Mapping[str, str],
) -> tuple[AggregateRecord, ...]:
    """Roll already-aggregated (possibly noisy) records up one more tier."""
    sums: dict[tuple[str, int], float] = {}
    for record in records:
        try:
            parent = parent_of[record.node_id]
        except KeyError:
            raise UnmappedHomeError(
                f"node {record.node_id!r} has no parent in the aggregation map"
            ) from None
        key = (parent, record.minute)
        sums[key] = sums.get(key, 0.0) + record.total
    return tuple(
        AggregateRecord(node, minute, total)
        for (node, minute), total in sorted(sums.items())
    )
