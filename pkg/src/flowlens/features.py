"""Feature usefulness analysis: value-conditioned label flows, mutual
information importance, Welch's statistic, and violin density summaries.

Only positive-decision labels enter these analyses: a negative label states
that an item is *not* in a class and cannot anchor a feature-to-class
association.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .distributions import ConditionalDistribution, FlowMatrix, conditional, flow_matrix
from .errors import InsufficientData, NotCategorical, NotNumeric, UnknownCategory, UnknownFeature
from .ingest import DatasetSnapshot, FeatureColumn


@dataclass(frozen=True)
class ImportanceScore:
    """Mutual information (bits) between a categorical feature and the label."""

    feature: str
    score: float
    normalized: float  # score / H(label), in [0, 1]
    per_value_conditionals: tuple[ConditionalDistribution, ...]


@dataclass(frozen=True)
class WelchResult:
    class_a: str
    class_b: str
    t_statistic: float
    mean_a: float
    mean_b: float
    var_a: float
    var_b: float
    n_a: int
    n_b: int


@dataclass(frozen=True)
class ViolinSummary:
    """Gaussian-KDE density of one numeric feature within one category."""

    category: str
    grid: tuple[float, ...]
    density: tuple[float, ...]
    quartiles: tuple[float, float, float]  # (q1, median, q3)
    n: int


def _column(snapshot: DatasetSnapshot, feature: str, kind: str) -> FeatureColumn:
    if feature not in snapshot.features:
        raise UnknownFeature(f"unknown feature {feature!r}")
    column = snapshot.features[feature]
    if column.kind != kind:
        if kind == "categorical":
            raise NotCategorical(f"feature {feature!r} is {column.kind}, not categorical")
        raise NotNumeric(f"feature {feature!r} is {column.kind}, not numeric")
    return column


def _class_samples(snapshot: DatasetSnapshot, column: FeatureColumn, category: str) -> list[float]:
    if category not in snapshot.nodes_by_id:
        raise UnknownCategory(f"unknown node {category!r}")
    return [
        float(column.values[inst.item_id])
        for inst in snapshot.subtree_instances(category, positive_only=True)
        if inst.item_id in column.values
    ]


def feature_label_flow(snapshot: DatasetSnapshot, feature: str) -> FlowMatrix:
    """Flow from the values of a categorical feature to the instance labels."""
    column = _column(snapshot, feature, "categorical")
    pairs = (
        (str(column.values[inst.item_id]), inst.label)
        for inst in snapshot.instances
        if inst.decision == "positive" and inst.item_id in column.values
    )
    return flow_matrix(pairs)


def mutual_information_bits(matrix: FlowMatrix) -> float:
    """I(left; right) in bits from a joint count matrix."""
    total = matrix.total
    if total == 0:
        raise InsufficientData("flow matrix is empty")
    row_sums = [sum(row) for row in matrix.counts]
    col_sums = [sum(row[j] for row in matrix.counts) for j in range(len(matrix.right_labels))]
    score = 0.0
    for i, row in enumerate(matrix.counts):
        for j, c in enumerate(row):
            if c:
                # exact integer ratio inside the log keeps independence at 0
                score += (c / total) * math.log2(c * total / (row_sums[i] * col_sums[j]))
    # guard tiny negative rounding on near-independent tables
    return max(score, 0.0)


def entropy_bits(counts) -> float:
    """Shannon entropy (bits) of a count vector."""
    total = sum(counts)
    if total == 0:
        return 0.0
    return -sum((c / total) * math.log2(c / total) for c in counts if c)


def importance(snapshot: DatasetSnapshot, feature: str) -> ImportanceScore:
    """Rank a categorical feature by I(feature; label), normalized by H(label)."""
    matrix = feature_label_flow(snapshot, feature)
    return importance_from_flow(feature, matrix)


def importance_from_flow(feature: str, matrix: FlowMatrix) -> ImportanceScore:
    if matrix.total == 0:
        raise InsufficientData(f"feature {feature!r} has no labeled observations")
    score = mutual_information_bits(matrix)
    label_entropy = entropy_bits(matrix.right_marginal.elements.values())
    normalized = score / label_entropy if label_entropy > 0 else 0.0
    conditionals = tuple(
        conditional(matrix, value)
        for value, row in zip(matrix.left_labels, matrix.counts)
        if sum(row) > 0
    )
    return ImportanceScore(
        feature=feature,
        score=score,
        normalized=normalized,
        per_value_conditionals=conditionals,
    )


def rank_features(snapshot: DatasetSnapshot) -> list[ImportanceScore]:
    """Importance for every categorical feature, highest first; ties by name."""
    scores = [
        importance(snapshot, name)
        for name, column in snapshot.features.items()
        if column.kind == "categorical"
    ]
    return sorted(scores, key=lambda s: (-s.score, s.feature))


def welch(
    snapshot: DatasetSnapshot, feature: str, class_a: str, class_b: str
) -> WelchResult:
    """Welch's unequal-variance t statistic for one numeric feature.

    Sample variances use the n-1 denominator.  When both variances are zero
    the statistic degenerates: equal means give t = 0, unequal means give a
    signed infinity sentinel.
    """
    column = _column(snapshot, feature, "numeric")
    samples_a = _class_samples(snapshot, column, class_a)
    samples_b = _class_samples(snapshot, column, class_b)
    for cls, samples in ((class_a, samples_a), (class_b, samples_b)):
        if len(samples) < 2:
            raise InsufficientData(
                f"class {cls!r} has {len(samples)} samples of {feature!r}; need >= 2"
            )
    n_a, n_b = len(samples_a), len(samples_b)
    mean_a = math.fsum(samples_a) / n_a
    mean_b = math.fsum(samples_b) / n_b
    var_a = math.fsum((x - mean_a) ** 2 for x in samples_a) / (n_a - 1)
    var_b = math.fsum((x - mean_b) ** 2 for x in samples_b) / (n_b - 1)
    pooled = var_a / n_a + var_b / n_b
    if pooled == 0.0:
        t = 0.0 if mean_a == mean_b else math.copysign(math.inf, mean_a - mean_b)
    else:
        t = (mean_a - mean_b) / math.sqrt(pooled)
    return WelchResult(
        class_a=class_a,
        class_b=class_b,
        t_statistic=t,
        mean_a=mean_a,
        mean_b=mean_b,
        var_a=var_a,
        var_b=var_b,
        n_a=n_a,
        n_b=n_b,
    )


def silverman_bandwidth(samples: np.ndarray) -> float:
    """h = 0.9 * min(sigma, IQR/1.34) * n^(-1/5), with a floor for degenerate data."""
    n = len(samples)
    sigma = float(np.std(samples, ddof=1))
    q1, q3 = np.percentile(samples, [25, 75])
    iqr = float(q3 - q1)
    candidates = [s for s in (sigma, iqr / 1.34) if s > 0]
    if candidates:
        scale = min(candidates)
    else:
        # all samples identical: fall back to a thin spike around the value
        scale = max(abs(float(samples[0])), 1.0) * 1e-3
    return 0.9 * scale * n ** (-1 / 5)


def violin(
    snapshot: DatasetSnapshot,
    feature: str,
    category: str,
    grid_points: int = 64,
) -> ViolinSummary:
    """Gaussian-kernel density summary of a numeric feature within a category.

    The grid spans [min - h, max + h]; the density is renormalized so its
    trapezoidal integral over the grid is exactly 1.  Quartiles use linear
    interpolation (the inclusive method).
    """
    column = _column(snapshot, feature, "numeric")
    samples = _class_samples(snapshot, column, category)
    if len(samples) < 2:
        raise InsufficientData(
            f"category {category!r} has {len(samples)} samples of {feature!r}; need >= 2"
        )
    if grid_points < 2:
        raise ValueError("grid_points must be >= 2")
    x = np.asarray(samples, dtype=float)
    h = silverman_bandwidth(x)
    grid = np.linspace(x.min() - h, x.max() + h, grid_points)
    density = np.exp(-0.5 * ((grid[:, None] - x[None, :]) / h) ** 2).sum(axis=1)
    density /= len(x) * h * math.sqrt(2 * math.pi)
    area = np.trapezoid(density, grid)
    if area > 0:
        density = density / area
    q1, median, q3 = (float(q) for q in np.percentile(x, [25, 50, 75]))
    return ViolinSummary(
        category=category,
        grid=tuple(float(g) for g in grid),
        density=tuple(float(d) for d in density),
        quartiles=(q1, median, q3),
        n=len(x),
    )
