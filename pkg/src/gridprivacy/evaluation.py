"""Utility, disclosure risk, and the four-case uniform-vs-personalized study.

Utility is 1 minus the percentage deviation (MAE over the original mean).
Disclosure risk models re-identification as the chance that Laplace noise
stays within a window delta of the true value, P(|Lap(sensitivity/eps)| <=
delta) = 1 - exp(-delta*eps/sensitivity): more privacy loss means noise
concentrates near the truth and the risk rises. The case study privatizes
fog aggregates, rolls them up, privatizes the cloud aggregates on top, and
reports utility/risk/loss per tier for each (eps_fog, eps_cloud) case.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from .errors import (
    EmptySeriesError,
    LengthMismatchError,
    NonPositiveEpsilonError,
    NonPositiveInputError,
    ZeroMeanError,
)
from .ingestion import (
    AggregateRecord,
    AggregationMap,
    ConsumptionDataset,
    aggregate,
    aggregate_records,
)
from .privacy import BudgetLedger, EpsilonAssignment, NoiseStream, privatize_series


def mae(original: Sequence[float], privatized: Sequence[float]) -> float:
    """Mean absolute error between a series and its privatized release."""
    if len(original) != len(privatized):
        raise LengthMismatchError(
            f"series lengths differ: {len(original)} vs {len(privatized)}"
        )
    if len(original) == 0:
        raise EmptySeriesError("mae needs at least one data point")
    a = np.asarray(original, dtype=float)
    b = np.asarray(privatized, dtype=float)
    return float(np.mean(np.abs(b - a)))


@dataclass(frozen=True)
class UtilityReport:
    mae: float
    mean: float
    percentage_deviation: float
    utility: float


def utility(original: Sequence[float], privatized: Sequence[float]) -> UtilityReport:
    """Utility on a 0..1 scale: 1 - MAE/mean(original)."""
    error = mae(original, privatized)
    mean = float(np.mean(np.asarray(original, dtype=float)))
    if mean == 0:
        raise ZeroMeanError("utility is undefined for a zero-mean original series")
    deviation = error / mean
    return UtilityReport(
        mae=error,
        mean=mean,
        percentage_deviation=deviation,
        utility=1.0 - deviation,
    )


def disclosure_risk(epsilon: float, sensitivity: float, delta: float) -> float:
    """Probability that Laplace noise lands within delta of the true value."""
    if not epsilon > 0 or not sensitivity > 0 or not delta > 0:
        raise NonPositiveInputError(
            f"epsilon, sensitivity, and delta must be positive, got "
            f"({epsilon}, {sensitivity}, {delta})"
        )
    return 1.0 - math.exp(-delta * epsilon / sensitivity)


@dataclass(frozen=True)
class LossDistribution:
    """Per-record absolute losses with their mean and population std."""

    losses: tuple[float, ...]
    mean: float
    std: float


def loss_distribution(
    original: Sequence[float], privatized: Sequence[float]
) -> LossDistribution:
    if len(original) != len(privatized):
        raise LengthMismatchError(
            f"series lengths differ: {len(original)} vs {len(privatized)}"
        )
    losses = np.abs(np.asarray(privatized, dtype=float) - np.asarray(original, dtype=float))
    if losses.size == 0:
        return LossDistribution(losses=(), mean=0.0, std=0.0)
    return LossDistribution(
        losses=tuple(float(x) for x in losses),
        mean=float(losses.mean()),
        std=float(losses.std()),  # population std: the run is the whole frame
    )


@dataclass(frozen=True)
class CaseSpec:
    """One comparison case: the fog-stage and cloud-stage privacy losses."""

    label: str
    eps_fog: float
    eps_cloud: float

    def __post_init__(self):
        if not self.eps_fog > 0 or not self.eps_cloud > 0:
            raise NonPositiveEpsilonError(
                f"case {self.label!r}: epsilons must be positive"
            )


def four_case_grid(low: float = 0.6, high: float = 0.8) -> tuple[CaseSpec, ...]:
    """The standard 2x2 grid: uniform (low,low) and (high,high) cases plus
    the two mixed personalized cases."""
    return (
        CaseSpec("case1", low, low),
        CaseSpec("case2", low, high),
        CaseSpec("case3", high, low),
        CaseSpec("case4", high, high),
    )


@dataclass(frozen=True)
class LevelMetrics:
    utility: UtilityReport
    risk: float
    loss: LossDistribution


@dataclass(frozen=True)
class CaseResult:
    case: CaseSpec
    seed: int
    fog: LevelMetrics
    cloud: LevelMetrics
    cloud_record_budget: float
    ledger_total: float
    plan_epsilon_variance: float


@dataclass(frozen=True)
class EvaluationReport:
    cases: tuple[CaseSpec, ...]
    seeds: tuple[int, ...]
    sensitivity: float
    delta: float
    results: tuple[CaseResult, ...]
    trends: Mapping[str, object]

    def results_for(self, label: str) -> tuple[CaseResult, ...]:
        return tuple(result for result in self.results if result.case.label == label)


def evaluate_case(
    dataset: ConsumptionDataset,
    mapping: AggregationMap,
    case: CaseSpec,
    seed: int,
    sensitivity: float,
    delta: float,
) -> CaseResult:
    """Run one case at one noise seed and measure both aggregation tiers.

    The cloud release composes: fog aggregates are privatized with eps_fog,
    summed per cloud parent, then privatized again with eps_cloud, so each
    cloud record's budget along its release path is eps_fog + eps_cloud.
    """
    stream = NoiseStream(seed).substream(case.label)
    ledger = BudgetLedger()

    fog_raw = aggregate(dataset, mapping, "fog")
    fog_plan = EpsilonAssignment.uniform(case.eps_fog)
    fog_series = [(record.node_id, record.total) for record in fog_raw]
    fog_noisy_pairs = privatize_series(
        fog_series, fog_plan, sensitivity, ledger, stream.substream("fog"), operation="fog"
    )
    fog_noisy = [
        AggregateRecord(record.node_id, record.minute, value)
        for record, (_, value) in zip(fog_raw, fog_noisy_pairs)
    ]

    cloud_raw = aggregate(dataset, mapping, "cloud")
    cloud_from_noisy = aggregate_records(fog_noisy, mapping.fog_to_cloud)
    cloud_plan = EpsilonAssignment.uniform(case.eps_cloud)
    cloud_series = [(record.node_id, record.total) for record in cloud_from_noisy]
    cloud_noisy_pairs = privatize_series(
        cloud_series, cloud_plan, sensitivity, ledger, stream.substream("cloud"),
        operation="cloud",
    )

    fog_original = [record.total for record in fog_raw]
    fog_released = [value for _, value in fog_noisy_pairs]
    cloud_original = [record.total for record in cloud_raw]
    cloud_released = [value for _, value in cloud_noisy_pairs]

    fog_metrics = LevelMetrics(
        utility=utility(fog_original, fog_released),
        risk=disclosure_risk(case.eps_fog, sensitivity, delta),
        loss=loss_distribution(fog_original, fog_released),
    )
    cloud_metrics = LevelMetrics(
        utility=utility(cloud_original, cloud_released),
        risk=disclosure_risk(case.eps_cloud, sensitivity, delta),
        loss=loss_distribution(cloud_original, cloud_released),
    )
    return CaseResult(
        case=case,
        seed=seed,
        fog=fog_metrics,
        cloud=cloud_metrics,
        cloud_record_budget=case.eps_fog + case.eps_cloud,
        ledger_total=ledger.total(),
        plan_epsilon_variance=0.0 if case.eps_fog == case.eps_cloud else float(
            np.var([case.eps_fog, case.eps_cloud])
        ),
    )


_PAIRWISE_ORDERINGS = (
    ("case1", "case2"),
    ("case1", "case3"),
    ("case2", "case4"),
    ("case3", "case4"),
)


def _ordering_counts(
    results: Sequence[CaseResult], metric: str
) -> dict[str, int] | None:
    """Count, per seed, how often the expected loss ordering held at cloud level."""
    by_case: dict[str, dict[int, CaseResult]] = {}
    for result in results:
        by_case.setdefault(result.case.label, {})[result.seed] = result
    if not all(label in by_case for pair in _PAIRWISE_ORDERINGS for label in pair):
        return None
    seeds = sorted(next(iter(by_case.values())).keys())
    counts = {f"{hi}>{lo}": 0 for hi, lo in _PAIRWISE_ORDERINGS}
    for seed in seeds:
        for hi, lo in _PAIRWISE_ORDERINGS:
            value_hi = getattr(by_case[hi][seed].cloud.loss, metric)
            value_lo = getattr(by_case[lo][seed].cloud.loss, metric)
            if value_hi > value_lo:
                counts[f"{hi}>{lo}"] += 1
    return counts


def compare_cases(
    dataset: ConsumptionDataset,
    mapping: AggregationMap,
    cases: Sequence[CaseSpec],
    seeds: Sequence[int],
    sensitivity: float,
    delta: float,
) -> EvaluationReport:
    """Evaluate every case at every seed and summarize the loss orderings.

    When the standard four-case grid is present and more than one seed ran,
    the trends section counts how often the cloud-level loss mean and std
    followed the expected ordering (the double-low case above both mixed
    cases, both mixed cases above the double-high case) and flags pass at a
    90% majority.
    """
    results = tuple(
        evaluate_case(dataset, mapping, case, seed, sensitivity, delta)
        for case in cases
        for seed in seeds
    )

    trends: dict[str, object] = {}
    if len(seeds) > 1:
        for metric in ("mean", "std"):
            counts = _ordering_counts(results, metric)
            if counts is None:
                continue
            threshold = math.ceil(0.9 * len(seeds))
            trends[f"cloud_loss_{metric}_ordering"] = {
                "counts": counts,
                "seeds": len(seeds),
                "required": threshold,
                "passed": all(count >= threshold for count in counts.values()),
            }
    return EvaluationReport(
        cases=tuple(cases),
        seeds=tuple(seeds),
        sensitivity=sensitivity,
        delta=delta,
        results=results,
        trends=trends,
    )


def default_reidentification_window(dataset: ConsumptionDataset) -> float:
    """Default delta: one percent of the data range (falls back to 0.01)."""
    values = dataset.values()
    if values.size == 0:
        return 0.01
    spread = float(values.max() - values.min())
    return spread / 100.0 if spread > 0 else 0.01
