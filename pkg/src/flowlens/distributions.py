"""Flow matrices, conditional distributions, and label quantity/quality reports.

A Sankey diagram is read here as a visual encoding of a joint distribution
between two categorical multisets; row-normalizing the underlying count
matrix yields the conditional distributions the diagrams display.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

from .errors import InsufficientData, NoChildren, UnknownCategory
from .ingest import DatasetSnapshot


@dataclass(frozen=True)
class WeightedMultiset:
    """Bag of categories with non-negative integer counts; zero counts omitted."""

    elements: dict[str, int]

    def __post_init__(self):
        if any(c < 0 for c in self.elements.values()):
            raise ValueError("multiset counts must be non-negative")
        object.__setattr__(
            self, "elements", {k: c for k, c in self.elements.items() if c > 0}
        )

    @property
    def total(self) -> int:
        return sum(self.elements.values())

    def count(self, key: str) -> int:
        return self.elements.get(key, 0)


@dataclass(frozen=True)
class FlowMatrix:
    """Counts n(s_i -> t_j) between two ordered categorical label lists."""

    left_labels: tuple[str, ...]
    right_labels: tuple[str, ...]
    counts: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        if len(self.counts) != len(self.left_labels):
            raise ValueError("counts must have one row per left label")
        for row in self.counts:
            if len(row) != len(self.right_labels):
                raise ValueError("counts must have one column per right label")
            if any(c < 0 for c in row):
                raise ValueError("flow counts must be non-negative")

    @classmethod
    def from_counts(
        cls,
        left_labels: Sequence[str],
        right_labels: Sequence[str],
        counts: Sequence[Sequence[int]],
    ) -> "FlowMatrix":
        return cls(
            left_labels=tuple(left_labels),
            right_labels=tuple(right_labels),
            counts=tuple(tuple(int(c) for c in row) for row in counts),
        )

    @property
    def left_marginal(self) -> WeightedMultiset:
        return WeightedMultiset(
            {label: sum(row) for label, row in zip(self.left_labels, self.counts)}
        )

    @property
    def right_marginal(self) -> WeightedMultiset:
        return WeightedMultiset(
            {
                label: sum(row[j] for row in self.counts)
                for j, label in enumerate(self.right_labels)
            }
        )

    @property
    def total(self) -> int:
        return sum(sum(row) for row in self.counts)

    def flow(self, left: str, right: str) -> int:
        i = self.left_labels.index(left)
        j = self.right_labels.index(right)
        return self.counts[i][j]

    def transpose(self) -> "FlowMatrix":
        counts = tuple(
            tuple(row[j] for row in self.counts)
            for j in range(len(self.right_labels))
        )
        return FlowMatrix(
            left_labels=self.right_labels,
            right_labels=self.left_labels,
            counts=counts,
        )


@dataclass(frozen=True)
class ConditionalDistribution:
    """P(target | source = given); probabilities sum to 1 for a non-empty row."""

    given: str
    probabilities: dict[str, float]


@dataclass(frozen=True)
class QuantityReport:
    """Relative label quantity among the children of one parent category."""

    parent: str
    counts: dict[str, int]
    shares: dict[str, float]
    flagged: frozenset[str]
    threshold_beta: float

    def to_flow(self) -> FlowMatrix:
        """Parent -> children matrix for Sankey rendering."""
        children = tuple(self.counts)
        return FlowMatrix(
            left_labels=(self.parent,),
            right_labels=children,
            counts=(tuple(self.counts[c] for c in children),),
        )


@dataclass(frozen=True)
class QualityReport:
    """Source/decision breakdown of one category's labels."""

    category: str
    by_source_decision: FlowMatrix
    trusted_share: float
    flagged: bool


# --- operations ---------------------------------------------------------


def flow_matrix(pairs: Iterable[tuple[str, str]]) -> FlowMatrix:
    """Tally (left, right) pairs into a flow matrix.

    Label order on each side is first-appearance order, which makes the
    result independent of input permutation up to that documented ordering.
    """
    left_index: dict[str, int] = {}
    right_index: dict[str, int] = {}
    cells: dict[tuple[int, int], int] = {}
    for left, right in pairs:
        i = left_index.setdefault(left, len(left_index))
        j = right_index.setdefault(right, len(right_index))
        key = (i, j)
        cells[key] = cells.get(key, 0) + 1
    counts = [[0] * len(right_index) for _ in range(len(left_index))]
    for (i, j), c in cells.items():
        counts[i][j] = c
    return FlowMatrix(
        left_labels=tuple(left_index),
        right_labels=tuple(right_index),
        counts=tuple(tuple(row) for row in counts),
    )


def conditional(matrix: FlowMatrix, given: str) -> ConditionalDistribution:
    """Row-normalize one left category of a flow matrix."""
    if given not in matrix.left_labels:
        raise UnknownCategory(f"{given!r} is not a left label of this matrix")
    row = matrix.counts[matrix.left_labels.index(given)]
    total = sum(row)
    if total == 0:
        raise InsufficientData(f"no observations conditioned on {given!r}")
    return ConditionalDistribution(
        given=given,
        probabilities={
            label: count / total for label, count in zip(matrix.right_labels, row)
        },
    )


def quantity_report(
    snapshot: DatasetSnapshot, parent: str, threshold_beta: float = 0.5
) -> QuantityReport:
    """Relative positive-label quantity among the children of ``parent``.

    A child is flagged when its share of the siblings' total falls below
    beta / K, the scale-free fraction of a perfectly uniform split over the
    K children.
    """
    if parent not in snapshot.nodes_by_id:
        raise UnknownCategory(f"unknown node {parent!r}")
    children = snapshot.children[parent]
    if not children:
        raise NoChildren(f"node {parent!r} has no children")
    counts = {c: snapshot.positive_subtree_counts[c] for c in children}
    total = sum(counts.values())
    shares = {c: (counts[c] / total if total else 0.0) for c in children}
    cutoff = threshold_beta / len(children)
    flagged = frozenset(c for c in children if shares[c] < cutoff)
    return QuantityReport(
        parent=parent,
        counts=counts,
        shares=shares,
        flagged=flagged,
        threshold_beta=threshold_beta,
    )


def multilevel_quantity(
    snapshot: DatasetSnapshot, root: str, depth: int
) -> list[FlowMatrix]:
    """Label-quantity flows for ``depth`` adjacent level pairs below ``root``.

    Matrix L maps the level-L descendants of root (those with children) to
    their children; each flow carries the child's positive subtree count.
    With leaf-only labels the chain conserves: a column marginal equals the
    next matrix's row marginal restricted to non-leaf nodes.
    """
    if root not in snapshot.nodes_by_id:
        raise UnknownCategory(f"unknown node {root!r}")
    if depth < 1:
        raise ValueError("depth must be >= 1")
    matrices: list[FlowMatrix] = []
    frontier = [root]
    for _ in range(depth):
        parents = [n for n in frontier if snapshot.children[n]]
        if not parents:
            break
        child_labels: list[str] = []
        for p in parents:
            child_labels.extend(snapshot.children[p])
        col = {c: j for j, c in enumerate(child_labels)}
        counts = [[0] * len(child_labels) for _ in parents]
        for i, p in enumerate(parents):
            for c in snapshot.children[p]:
                counts[i][col[c]] = snapshot.positive_subtree_counts[c]
        matrices.append(
            FlowMatrix(
                left_labels=tuple(parents),
                right_labels=tuple(child_labels),
                counts=tuple(tuple(row) for row in counts),
            )
        )
        frontier = child_labels
    return matrices


def quality_report(
    snapshot: DatasetSnapshot,
    category: str,
    trust_threshold: float = 0.5,
    trusted_ranks: frozenset[int] = frozenset({1, 2}),
) -> QualityReport:
    """Source -> decision flow over one category's labels (subtree included).

    ``trusted_share`` is the fraction of labels whose source trust rank is in
    ``trusted_ranks``; the category is flagged when it falls below
    ``trust_threshold``.
    """
    if category not in snapshot.nodes_by_id:
        raise UnknownCategory(f"unknown node {category!r}")
    instances = snapshot.subtree_instances(category, positive_only=False)
    if not instances:
        raise InsufficientData(f"category {category!r} has no labels")
    matrix = flow_matrix((inst.source, inst.decision) for inst in instances)
    trusted = sum(
        1 for inst in instances if snapshot.source_trust.get(inst.source) in trusted_ranks
    )
    trusted_share = trusted / len(instances)
    return QualityReport(
        category=category,
        by_source_decision=matrix,
        trusted_share=trusted_share,
        flagged=trusted_share < trust_threshold,
    )
