"""Model evaluation analyses: accuracy reports, misclassification flows,
automated flow diagnostics, multi-model prediction diffs, and accuracy
trend classification.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from enum import Enum
from typing import Iterator, Mapping, Sequence

from .distributions import FlowMatrix, flow_matrix, quality_report, quantity_report
from .errors import InsufficientData, UnknownRun
from .ingest import DatasetSnapshot, ModelRun


@dataclass(frozen=True)
class AccuracyRow:
    category: str
    sample_size: int
    accuracy: float


class DiagnosticKind(str, Enum):
    BIDIRECTIONAL_CONFUSION = "BidirectionalConfusion"
    BROAD_CATEGORY = "BroadCategory"
    WRONG_LABEL_SUSPECT = "WrongLabelSuspect"
    ACCURACY_REGRESSION = "AccuracyRegression"
    LABEL_IMBALANCE = "LabelImbalance"
    LOW_TRUST_LABELS = "LowTrustLabels"


@dataclass(frozen=True)
class DiagnosticFinding:
    kind: DiagnosticKind
    subjects: tuple[str, ...]
    evidence: dict
    severity: float  # in [0, 1]


class TrendKind(str, Enum):
    STRICTLY_INCREASING = "StrictlyIncreasing"
    STRICTLY_DECREASING = "StrictlyDecreasing"
    OVERALL_INCREASING = "OverallIncreasing"
    OVERALL_DECREASING = "OverallDecreasing"
    STABLE = "Stable"


#: Fixed color mapping for trend cells.
TREND_COLORS = {
    TrendKind.STRICTLY_INCREASING: "blue",
    TrendKind.STRICTLY_DECREASING: "red",
    TrendKind.OVERALL_INCREASING: "light_blue",
    TrendKind.STABLE: "light_blue",
    TrendKind.OVERALL_DECREASING: "orange",
}


@dataclass(frozen=True)
class TrendClass:
    category: str
    series: tuple[float, ...]
    kind: TrendKind

    @property
    def color_key(self) -> str:
        return TREND_COLORS[self.kind]


@dataclass(frozen=True)
class LayeredFlow:
    """Chained prediction flows across an ordered sequence of model runs."""

    layers: tuple[str, ...]  # model ids, left to right
    matrices: tuple[FlowMatrix, ...]  # one per adjacent pair
    item_paths: dict[str, tuple[str, ...]]  # item_id -> predicted label per layer


# --- operations ---------------------------------------------------------


def accuracy_report(run: ModelRun) -> list[AccuracyRow]:
    """Per-category sample size and accuracy, sorted by category key."""
    if not run.records:
        raise InsufficientData(f"run {run.model_id!r} has no records")
    sizes: dict[str, int] = {}
    correct: dict[str, int] = {}
    for rec in run.records:
        sizes[rec.true_label] = sizes.get(rec.true_label, 0) + 1
        if rec.predicted_label == rec.true_label:
            correct[rec.true_label] = correct.get(rec.true_label, 0) + 1
    return [
        AccuracyRow(
            category=category,
            sample_size=sizes[category],
            accuracy=correct.get(category, 0) / sizes[category],
        )
        for category in sorted(sizes)
    ]


def misclassification_flow(run: ModelRun) -> FlowMatrix:
    """Flow from true to predicted labels over the misclassified records only."""
    return flow_matrix(
        (rec.true_label, rec.predicted_label)
        for rec in run.records
        if rec.predicted_label != rec.true_label
    )


def accuracy_report_lines(run: ModelRun) -> Iterator[str]:
    """Accuracy-report-shaped line-delimited records (category, size, accuracy)."""
    for row in accuracy_report(run):
        yield json.dumps(
            {
                "category": row.category,
                "sample_size": row.sample_size,
                "accuracy": row.accuracy,
            },
            ensure_ascii=False,
        )


def misclassification_lines(run: ModelRun) -> Iterator[str]:
    """Misclassification-report-shaped records (id, true and predicted category)."""
    for rec in run.records:
        if rec.predicted_label != rec.true_label:
            yield json.dumps(
                {
                    "item_id": rec.item_id,
                    "true_label": rec.true_label,
                    "predicted_label": rec.predicted_label,
                },
                ensure_ascii=False,
            )


def diagnose(
    run: ModelRun,
    snapshot: DatasetSnapshot,
    min_flow: int = 5,
    broad_fanin: int = 3,
) -> list[DiagnosticFinding]:
    """Detect misclassification-flow anomalies in one run.

    Three patterns are recognized:

    * BidirectionalConfusion — error flow of at least ``min_flow`` in both
      directions between two categories (overlapping definitions).
    * BroadCategory — a predicted label absorbing at least ``min_flow``
      errors from at least ``broad_fanin`` distinct true labels.
    * WrongLabelSuspect — a flow of at least ``min_flow`` between categories
      whose taxonomy paths diverge at the top level (semantically distant),
      suggesting wrongly labeled training data.

    Findings are sorted by severity descending, ties by subject key.
    """
    flows: dict[tuple[str, str], int] = {}
    sizes: dict[str, int] = {}
    for rec in run.records:
        sizes[rec.true_label] = sizes.get(rec.true_label, 0) + 1
        if rec.predicted_label != rec.true_label:
            key = (rec.true_label, rec.predicted_label)
            flows[key] = flows.get(key, 0) + 1
    total_errors = sum(flows.values())
    findings: list[DiagnosticFinding] = []

    seen_pairs: set[frozenset[str]] = set()
    for (a, b), f_ab in flows.items():
        f_ba = flows.get((b, a), 0)
        pair = frozenset((a, b))
        if f_ab >= min_flow and f_ba >= min_flow and pair not in seen_pairs:
            seen_pairs.add(pair)
            subjects = tuple(sorted((a, b)))
            first, second = subjects
            findings.append(
                DiagnosticFinding(
                    kind=DiagnosticKind.BIDIRECTIONAL_CONFUSION,
                    subjects=subjects,
                    evidence={
                        "flows": {
                            f"{first}->{second}": flows.get((first, second), 0),
                            f"{second}->{first}": flows.get((second, first), 0),
                        },
                        "sample_sizes": {first: sizes[first], second: sizes[second]},
                    },
                    severity=min(
                        flows.get((first, second), 0) / sizes[first],
                        flows.get((second, first), 0) / sizes[second],
                    ),
                )
            )

    incoming: dict[str, dict[str, int]] = {}
    for (t, p), f in flows.items():
        if f >= min_flow:
            incoming.setdefault(p, {})[t] = f
    for predicted in incoming:
        sources = incoming[predicted]
        if len(sources) >= broad_fanin:
            inflow = sum(sources.values())
            findings.append(
                DiagnosticFinding(
                    kind=DiagnosticKind.BROAD_CATEGORY,
                    subjects=(predicted,),
                    evidence={
                        "incoming": dict(sorted(sources.items())),
                        "total_errors": total_errors,
                    },
                    severity=inflow / total_errors if total_errors else 0.0,
                )
            )

    for (t, p), f in flows.items():
        if f < min_flow:
            continue
        if snapshot.ancestor_at_level(t, 1) != snapshot.ancestor_at_level(p, 1):
            findings.append(
                DiagnosticFinding(
                    kind=DiagnosticKind.WRONG_LABEL_SUSPECT,
                    subjects=(t, p),
                    evidence={
                        "flow": f,
                        "sample_size": sizes[t],
                        "branches": [
                            snapshot.ancestor_at_level(t, 1),
                            snapshot.ancestor_at_level(p, 1),
                        ],
                    },
                    severity=f / sizes[t],
                )
            )

    findings.sort(key=lambda d: (-d.severity, "|".join(d.subjects), d.kind.value))
    return findings


def model_diff(runs: Sequence[ModelRun]) -> LayeredFlow:
    """Chained flows of per-item predictions across two or more runs.

    Only items evaluated by every run participate, so adjacent matrices
    chain: the right marginal of matrix L equals the left marginal of
    matrix L+1 (both are run L+1's predictions over the common items).
    """
    if len(runs) < 2:
        raise InsufficientData("model_diff requires at least two runs")
    predictions = [{rec.item_id: rec.predicted_label for rec in run.records} for run in runs]
    common = set(predictions[0])
    for preds in predictions[1:]:
        common &= set(preds)
    if not common:
        raise InsufficientData("runs share no evaluation items")
    # Deterministic item order: first run's record order restricted to common.
    ordered = [rec.item_id for rec in runs[0].records if rec.item_id in common]
    matrices = tuple(
        flow_matrix((predictions[i][item], predictions[i + 1][item]) for item in ordered)
        for i in range(len(runs) - 1)
    )
    item_paths = {
        item: tuple(preds[item] for preds in predictions) for item in ordered
    }
    return LayeredFlow(
        layers=tuple(run.model_id for run in runs),
        matrices=matrices,
        item_paths=item_paths,
    )


def trend(
    series_by_category: Mapping[str, Sequence[float]],
    epsilon: float = 0.005,
) -> list[TrendClass]:
    """Classify per-category accuracy series.

    Strictly increasing/decreasing requires every consecutive delta beyond
    ``epsilon``; otherwise the endpoints decide, with a flat series
    (|end - start| <= epsilon) mapped to Stable.
    """
    out: list[TrendClass] = []
    for category in sorted(series_by_category):
        series = tuple(float(v) for v in series_by_category[category])
        if len(series) < 2:
            raise InsufficientData(
                f"category {category!r} has a series of length {len(series)}; need >= 2"
            )
        deltas = [b - a for a, b in zip(series, series[1:])]
        if all(d > epsilon for d in deltas):
            kind = TrendKind.STRICTLY_INCREASING
        elif all(d < -epsilon for d in deltas):
            kind = TrendKind.STRICTLY_DECREASING
        else:
            end = series[-1] - series[0]
            if abs(end) <= epsilon:
                kind = TrendKind.STABLE
            elif end > epsilon:
                kind = TrendKind.OVERALL_INCREASING
            else:
                kind = TrendKind.OVERALL_DECREASING
        out.append(TrendClass(category=category, series=series, kind=kind))
    return out


def accuracy_series(runs: Sequence[ModelRun]) -> dict[str, list[float]]:
    """Per-category accuracy across runs, restricted to categories present in all."""
    if len(runs) < 2:
        raise InsufficientData("need at least two runs to build trend series")
    reports = [{row.category: row.accuracy for row in accuracy_report(run)} for run in runs]
    categories = set(reports[0])
    for rep in reports[1:]:
        categories &= set(rep)
    return {c: [rep[c] for rep in reports] for c in sorted(categories)}


def select_runs(snapshot: DatasetSnapshot, run_ids: Sequence[str]) -> list[ModelRun]:
    runs = []
    for run_id in run_ids:
        if run_id not in snapshot.runs_by_id:
            raise UnknownRun(f"unknown run {run_id!r}")
        runs.append(snapshot.runs_by_id[run_id])
    return runs


def audit_snapshot(
    snapshot: DatasetSnapshot,
    run: ModelRun | None = None,
    beta: float = 0.5,
    trust_threshold: float = 0.5,
    min_flow: int = 5,
    broad_fanin: int = 3,
    epsilon: float = 0.005,
) -> list[DiagnosticFinding]:
    """Sweep the snapshot for label-imbalance, low-trust, trend, and flow findings."""
    findings: list[DiagnosticFinding] = []
    for node in snapshot.taxonomy:
        children = snapshot.children[node.id]
        if children:
            report = quantity_report(snapshot, node.id, threshold_beta=beta)
            if report.flagged and sum(report.counts.values()) > 0:
                cutoff = beta / len(children)
                worst = max(1.0 - report.shares[c] / cutoff for c in report.flagged)
                findings.append(
                    DiagnosticFinding(
                        kind=DiagnosticKind.LABEL_IMBALANCE,
                        subjects=(node.id, *sorted(report.flagged)),
                        evidence={"shares": report.shares, "cutoff": cutoff},
                        severity=min(1.0, worst),
                    )
                )
        elif snapshot.subtree_counts[node.id] > 0:
            quality = quality_report(snapshot, node.id, trust_threshold=trust_threshold)
            if quality.flagged:
                findings.append(
                    DiagnosticFinding(
                        kind=DiagnosticKind.LOW_TRUST_LABELS,
                        subjects=(node.id,),
                        evidence={"trusted_share": quality.trusted_share},
                        severity=1.0 - quality.trusted_share,
                    )
                )
    if run is not None:
        findings.extend(diagnose(run, snapshot, min_flow=min_flow, broad_fanin=broad_fanin))
    if len(snapshot.runs) >= 2:
        for t in trend(accuracy_series(snapshot.runs), epsilon=epsilon):
            if t.kind in (TrendKind.STRICTLY_DECREASING, TrendKind.OVERALL_DECREASING):
                findings.append(
                    DiagnosticFinding(
                        kind=DiagnosticKind.ACCURACY_REGRESSION,
                        subjects=(t.category,),
                        evidence={"series": list(t.series)},
                        severity=min(1.0, max(0.0, t.series[0] - t.series[-1])),
                    )
                )
    findings.sort(key=lambda d: (-d.severity, "|".join(d.subjects), d.kind.value))
    return findings
