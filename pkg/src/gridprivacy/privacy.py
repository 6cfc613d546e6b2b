"""Per-node epsilon assignment, Laplace noise, and budget accounting.

Two routes produce a node's privacy loss epsilon: the inverse of its
least-cost distance to the data destination (far nodes traverse more
untrusted hops, so they get more noise), or a five-criterion preference
profile mapped through an exponential weighting. Values are privatized by
adding Laplace(sensitivity/epsilon) noise drawn from per-node deterministic
substreams, and every released value is logged in an append-only ledger
whose total is the sequential-composition budget.
"""
from __future__ import annotations

import hashlib
import math
import threading
from dataclasses import dataclass, field
from enum import Enum
from typing import Mapping, Sequence

import numpy as np

from .errors import (
    InvalidBoundsError,
    MissingAssignmentError,
    NonPositiveEpsilonError,
    NonPositiveInputError,
    NonPositiveSensitivityError,
)
from .topology import GridTopology, Tier, diameter, shortest_distances_from


class Level(str, Enum):
    HIGH = "high"
    MEDIUM = "medium"
    LOW = "low"

    @classmethod
    def parse(cls, text: str) -> "Level":
        try:
            return cls(text.strip().lower())
        except ValueError:
            raise MissingAssignmentError(
                f"unknown preference level {text!r}; expected high, medium, or low"
            ) from None


# Exposure points per level and criterion. Criteria describing attack
# surface score the level directly (more access, more privacy needed);
# criteria describing the effort an attacker must bring score inverted
# (a low barrier means the node is easier to compromise).
_DIRECT = {Level.HIGH: 2, Level.MEDIUM: 1, Level.LOW: 0}
_INVERTED = {Level.HIGH: 0, Level.MEDIUM: 1, Level.LOW: 2}


@dataclass(frozen=True)
class PrivacyPreference:
    """Five-criterion privacy demand profile for a node.

    ``exposure_scores`` turns the levels into points in {0, 1, 2} where 2
    always means "most exposed, wants the most protection"; the built-in
    tier profiles make edge nodes maximal on every criterion and cloud
    nodes minimal.
    """

    access_to_nodes: Level
    access_frequency: Level
    attacker_background_knowledge: Level
    communication_medium: Level
    operational_complexity: Level

    _ORIENTATION = (
        ("access_to_nodes", _DIRECT),
        ("access_frequency", _DIRECT),
        ("attacker_background_knowledge", _INVERTED),
        ("communication_medium", _INVERTED),
        ("operational_complexity", _DIRECT),
    )

    def exposure_scores(self) -> tuple[int, ...]:
        return tuple(
            table[getattr(self, criterion)] for criterion, table in self._ORIENTATION
        )

    @classmethod
    def for_tier(cls, tier: Tier) -> "PrivacyPreference":
        return _TIER_PROFILES[tier]


_TIER_PROFILES = {
    Tier.EDGE: PrivacyPreference(
        access_to_nodes=Level.HIGH,
        access_frequency=Level.HIGH,
        attacker_background_knowledge=Level.LOW,
        communication_medium=Level.LOW,
        operational_complexity=Level.HIGH,
    ),
    Tier.FOG: PrivacyPreference(
        access_to_nodes=Level.MEDIUM,
        access_frequency=Level.MEDIUM,
        attacker_background_knowledge=Level.MEDIUM,
        communication_medium=Level.MEDIUM,
        operational_complexity=Level.MEDIUM,
    ),
    Tier.CLOUD: PrivacyPreference(
        access_to_nodes=Level.LOW,
        access_frequency=Level.LOW,
        attacker_background_knowledge=Level.HIGH,
        communication_medium=Level.HIGH,
        operational_complexity=Level.LOW,
    ),
}


@dataclass(frozen=True)
class EpsilonBounds:
    """Inclusive range every assigned epsilon must fall into."""

    minimum: float = 0.1
    maximum: float = 1.0

    def __post_init__(self):
        if not (0 < self.minimum < self.maximum):
            raise InvalidBoundsError(
                f"need 0 < minimum < maximum, got [{self.minimum}, {self.maximum}]"
            )

    def clamp(self, value: float) -> float:
        return min(max(value, self.minimum), self.maximum)

    @property
    def span(self) -> float:
        return self.maximum - self.minimum


def _stable_key(text: str) -> int:
    """Platform-independent 64-bit integer key for substream derivation."""
    return int.from_bytes(hashlib.sha256(text.encode("utf-8")).digest()[:8], "big")


class NoiseStream:
    """Deterministic noise source: one PCG64 stream per (seed, key-path).

    Substreams are derived from string keys, so per-node noise depends only
    on the run seed and the node id, never on iteration order. Sampling is
    inverse-CDF: u uniform on (-1/2, 1/2) maps to -b*sgn(u)*ln(1-2|u|).
    """

    def __init__(self, seed: int, _path: tuple[int, ...] = ()):
        self._seed = int(seed)
        self._path = _path
        self._generator = np.random.Generator(
            np.random.PCG64(np.random.SeedSequence([self._seed, *self._path]))
        )

    def substream(self, key: str) -> "NoiseStream":
        return NoiseStream(self._seed, self._path + (_stable_key(key),))

    def uniform(self, low: float, high: float) -> float:
        return float(self._generator.uniform(low, high))

    def _centered_uniform(self, size: int | None):
        # rejects the single raw value 0.0 that would map to |u| = 1/2
        if size is None:
            raw = self._generator.random()
            while raw == 0.0:
                raw = self._generator.random()
            return raw - 0.5
        raw = self._generator.random(size)
        mask = raw == 0.0
        while mask.any():
            raw[mask] = self._generator.random(int(mask.sum()))
            mask = raw == 0.0
        return raw - 0.5

    def laplace(self, scale: float, size: int | None = None):
        """One sample (or an array of samples) from Laplace(0, scale)."""
        if not scale > 0:
            raise NonPositiveSensitivityError(f"noise scale must be positive, got {scale}")
        u = self._centered_uniform(size)
        value = laplace_inverse_cdf(u, scale)
        return float(value) if size is None else value


def laplace_inverse_cdf(u, scale: float):
    """Map uniform u in (-1/2, 1/2) to a Laplace(0, scale) sample."""
    return -scale * np.sign(u) * np.log1p(-2.0 * np.abs(u))


@dataclass(frozen=True)
class NoiseParams:
    """Calibrated noise description: sensitivity, scale, and stream seed."""

    sensitivity: float
    scale: float
    seed: int

    def __post_init__(self):
        if not self.sensitivity > 0:
            raise NonPositiveSensitivityError(
                f"sensitivity must be positive, got {self.sensitivity}"
            )
        if not self.scale > 0:
            raise NonPositiveEpsilonError(f"scale must be positive, got {self.scale}")

    @classmethod
    def from_epsilon(cls, sensitivity: float, epsilon: float, seed: int) -> "NoiseParams":
        if not epsilon > 0:
            raise NonPositiveEpsilonError(f"epsilon must be positive, got {epsilon}")
        if not sensitivity > 0:
            raise NonPositiveSensitivityError(
                f"sensitivity must be positive, got {sensitivity}"
            )
        return cls(sensitivity=sensitivity, scale=sensitivity / epsilon, seed=seed)


def laplace_sample(params: NoiseParams) -> float:
    """First Laplace(0, scale) draw of the stream seeded by ``params.seed``."""
    return NoiseStream(params.seed).laplace(params.scale)


def epsilon_from_distance(
    distance: float,
    threshold: float,
    bounds: EpsilonBounds,
    rng: NoiseStream | int | None = None,
) -> float:
    """Turn a node-to-destination distance into a privacy loss epsilon.

    Inside the threshold the preference is 1/distance clamped into bounds;
    a node talking to itself (distance 0) keeps the maximum epsilon; beyond
    the threshold the epsilon is drawn uniformly from the bounds using the
    supplied stream.
    """
    if distance < 0:
        raise NonPositiveInputError(f"distance must be non-negative, got {distance}")
    if not threshold > 0:
        raise InvalidBoundsError(f"distance threshold must be positive, got {threshold}")
    if distance == 0:
        return bounds.maximum
    if distance <= threshold:
        return bounds.clamp(1.0 / distance)
    stream = rng if isinstance(rng, NoiseStream) else NoiseStream(0 if rng is None else rng)
    return stream.uniform(bounds.minimum, bounds.maximum)


DEFAULT_CRITERION_WEIGHTS = (1.0, 1.0, 1.0, 1.0, 1.0)


def epsilon_from_preference(
    preference: PrivacyPreference,
    bounds: EpsilonBounds,
    weights: Sequence[float] = DEFAULT_CRITERION_WEIGHTS,
) -> float:
    """Map a five-criterion preference to an epsilon inside the bounds.

    The criterion scores x are combined exponentially, w = (e^{k.x} - L) /
    (U - L) with L and U the all-minimal and all-maximal exponentials, so w
    runs from exactly 0 (no privacy demanded) to exactly 1 (maximal demand
    on every criterion). Higher demand means lower epsilon: epsilon =
    maximum - w * span.
    """
    if len(weights) != 5:
        raise InvalidBoundsError("exactly five criterion weights are required")
    if not all(math.isfinite(w) and w > 0 for w in weights):
        raise InvalidBoundsError("criterion weights must be finite and positive")
    scores = preference.exposure_scores()
    demand = math.exp(sum(w * s for w, s in zip(weights, scores)))
    low = 1.0  # exp(0): every criterion at its minimal-exposure level
    high = math.exp(sum(w * 2 for w in weights))
    weight = (demand - low) / (high - low)
    if weight == 1.0:
        return bounds.minimum
    if weight == 0.0:
        return bounds.maximum
    return bounds.maximum - weight * bounds.span


class AssignmentMode(str, Enum):
    PDP = "pdp"
    UDP = "udp"


class AssignmentSource(str, Enum):
    DISTANCE = "distance"
    PREFERENCE = "preference"
    EXPLICIT = "explicit"


@dataclass(frozen=True)
class EpsilonAssignment:
    """Resolved per-node epsilon plan (PDP) or one shared epsilon (UDP)."""

    mode: AssignmentMode
    source: AssignmentSource
    epsilons: Mapping[str, float] = field(default_factory=dict)
    shared: float | None = None

    def __post_init__(self):
        values = list(self.epsilons.values())
        if self.shared is not None:
            values.append(self.shared)
        for value in values:
            if not value > 0:
                raise NonPositiveEpsilonError(f"epsilon must be positive, got {value}")

    @classmethod
    def uniform(cls, epsilon: float) -> "EpsilonAssignment":
        return cls(
            mode=AssignmentMode.UDP,
            source=AssignmentSource.EXPLICIT,
            shared=epsilon,
        )

    @classmethod
    def personalized(
        cls, epsilons: Mapping[str, float], source: AssignmentSource
    ) -> "EpsilonAssignment":
        return cls(mode=AssignmentMode.PDP, source=source, epsilons=dict(epsilons))

    def epsilon_for(self, node: str) -> float:
        if self.mode is AssignmentMode.UDP:
            assert self.shared is not None
            return self.shared
        try:
            return self.epsilons[node]
        except KeyError:
            raise MissingAssignmentError(f"no epsilon assigned for node {node!r}") from None


def assign_from_distance(
    topology: GridTopology,
    destination: str,
    bounds: EpsilonBounds,
    seed: int,
    threshold: float | None = None,
) -> EpsilonAssignment:
    """Distance-route PDP plan: epsilon per node from 1/distance-to-destination.

    The threshold defaults to the topology diameter, so the random fallback
    only triggers for nodes that cannot reach the destination at all.
    """
    distances = shortest_distances_from(topology, destination)
    if threshold is None:
        threshold = diameter(topology)
        if threshold == 0:
            threshold = 1.0
    stream = NoiseStream(seed).substream("distance-epsilon")
    epsilons = {
        node_id: epsilon_from_distance(
            distances[node_id], threshold, bounds, stream.substream(node_id)
        )
        for node_id in topology.node_ids
    }
    return EpsilonAssignment.personalized(epsilons, AssignmentSource.DISTANCE)


def assign_from_preference(
    topology: GridTopology,
    bounds: EpsilonBounds,
    weights: Sequence[float] = DEFAULT_CRITERION_WEIGHTS,
    overrides: Mapping[str, PrivacyPreference] | None = None,
) -> EpsilonAssignment:
    """Preference-route PDP plan: epsilon per node from its tier profile."""
    overrides = overrides or {}
    epsilons = {}
    for node in topology.nodes:
        preference = overrides.get(node.id, PrivacyPreference.for_tier(node.tier))
        epsilons[node.id] = epsilon_from_preference(preference, bounds, weights)
    return EpsilonAssignment.personalized(epsilons, AssignmentSource.PREFERENCE)


@dataclass(frozen=True)
class LedgerEntry:
    node: str
    epsilon: float
    operation: str


class BudgetLedger:
    """Append-only log of released epsilons with exact running totals.

    Appends are lock-protected so concurrent node workers can share one
    ledger; totals are plain sums and therefore independent of append
    interleaving.
    """

    def __init__(self):
        self._entries: list[LedgerEntry] = []
        self._lock = threading.Lock()

    def append(self, node: str, epsilon: float, operation: str = "privatize") -> None:
        if not epsilon > 0:
            raise NonPositiveEpsilonError(f"epsilon must be positive, got {epsilon}")
        with self._lock:
            self._entries.append(LedgerEntry(node, epsilon, operation))

    @property
    def entries(self) -> tuple[LedgerEntry, ...]:
        with self._lock:
            return tuple(self._entries)

    def total(self) -> float:
        # fsum: exact (correctly rounded) so the total is permutation-invariant
        return math.fsum(entry.epsilon for entry in self.entries)

    def per_node_totals(self) -> dict[str, float]:
        grouped: dict[str, list[float]] = {}
        for entry in self.entries:
            grouped.setdefault(entry.node, []).append(entry.epsilon)
        return {node: math.fsum(values) for node, values in grouped.items()}

    def __len__(self) -> int:
        return len(self.entries)


def compose(ledger: BudgetLedger) -> float:
    """Sequential-composition budget: the exact sum of all logged epsilons."""
    return ledger.total()


def privatize(
    value: float,
    sensitivity: float,
    epsilon: float,
    rng: NoiseStream | int,
) -> float:
    """Release one value with Laplace(sensitivity/epsilon) noise added."""
    if not epsilon > 0:
        raise NonPositiveEpsilonError(f"epsilon must be positive, got {epsilon}")
    if not sensitivity > 0:
        raise NonPositiveSensitivityError(
            f"sensitivity must be positive, got {sensitivity}"
        )
    stream = rng if isinstance(rng, NoiseStream) else NoiseStream(rng)
    return value + stream.laplace(sensitivity / epsilon)


def privatize_series(
    series: Sequence[tuple[str, float]],
    plan: EpsilonAssignment,
    sensitivity: float,
    ledger: BudgetLedger,
    rng: NoiseStream | int,
    operation: str = "privatize",
    clamp_non_negative: bool = False,
) -> list[tuple[str, float]]:
    """Privatize (node, value) pairs element-wise under the plan.

    Noise for each node comes from that node's substream in positional
    order, so output bytes depend only on (seed, node, index). One ledger
    entry is appended per released value. ``clamp_non_negative`` optionally
    floors released values at zero as a post-processing step; it is off by
    default because evaluation compares the raw mechanism output.
    """
    if not sensitivity > 0:
        raise NonPositiveSensitivityError(
            f"sensitivity must be positive, got {sensitivity}"
        )
    stream = rng if isinstance(rng, NoiseStream) else NoiseStream(rng)

    grouped: dict[str, list[int]] = {}
    for position, (node, _) in enumerate(series):
        grouped.setdefault(node, []).append(position)

    noise = np.empty(len(series))
    epsilon_at: dict[str, float] = {}
    for node, positions in grouped.items():
        epsilon = plan.epsilon_for(node)
        epsilon_at[node] = epsilon
        samples = stream.substream(node).laplace(sensitivity / epsilon, size=len(positions))
        noise[positions] = samples

    released: list[tuple[str, float]] = []
    for position, (node, value) in enumerate(series):
        output = value + float(noise[position])
        if clamp_non_negative and output < 0:
            output = 0.0
        released.append((node, output))
        ledger.append(node, epsilon_at[node], operation)
    return released
