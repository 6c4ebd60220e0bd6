"""Parsing, validation, and assembly of immutable dataset snapshots.

Input is line-delimited JSON (one object per line, UTF-8).  Four record
schemas are accepted, documented in ``docs/formats.md``:

  taxonomy    {"id", "name", "parent_id"?, "level"}
  label       {"item_id", "title", "label", "source", "decision", "timestamp"?}
  feature     {"name", "kind", "item_id", "value"}
  evaluation  {"model_id", "ordinal", "item_id", "true_label", "predicted_label"}

Parsing is fail-fast: the first malformed line raises an error naming its
1-based line number.  A completed :class:`DatasetSnapshot` is immutable and
safe to share across any number of concurrent readers.
"""

from __future__ import annotations

import json
import logging
import math
from dataclasses import dataclass, field
from datetime import datetime, timezone
from functools import cached_property
from typing import IO, Iterable, Iterator, Mapping, Sequence

from .errors import (
    CrossReferenceError,
    CycleDetected,
    DuplicateId,
    DuplicateItem,
    InvalidDecision,
    MalformedRecord,
    MultipleRoots,
    UnknownLabel,
    UnknownParent,
)

log = logging.getLogger(__name__)

DECISIONS = ("positive", "negative")
FEATURE_KINDS = ("numeric", "categorical")

#: Default provenance registry; rank 1 is the most trusted source.
DEFAULT_SOURCE_TRUST = {"expert": 1, "curation": 2, "crowd": 3, "rule": 4}


@dataclass(frozen=True)
class TaxonomyNode:
    id: str
    name: str
    level: int
    parent_id: str | None = None


@dataclass(frozen=True)
class LabeledInstance:
    item_id: str
    title: str
    label: str
    source: str
    decision: str
    timestamp: str | None = None


@dataclass(frozen=True)
class FeatureColumn:
    name: str
    kind: str  # "numeric" | "categorical"
    values: Mapping[str, float | str]  # item_id -> value; treated as read-only

    def __post_init__(self):
        if self.kind not in FEATURE_KINDS:
            raise ValueError(f"feature kind must be one of {FEATURE_KINDS}")


@dataclass(frozen=True)
class EvaluationRecord:
    item_id: str
    true_label: str
    predicted_label: str


@dataclass(frozen=True)
class ModelRun:
    model_id: str
    ordinal: int
    records: tuple[EvaluationRecord, ...]

    @property
    def size(self) -> int:
        return len(self.records)


@dataclass(frozen=True)
class DatasetSnapshot:
    """Immutable bundle of taxonomy, labels, features, and evaluation runs."""

    taxonomy: tuple[TaxonomyNode, ...]
    instances: tuple[LabeledInstance, ...]
    features: Mapping[str, FeatureColumn]
    runs: tuple[ModelRun, ...]
    source_trust: Mapping[str, int]
    created_at: str  # ISO-8601 instant

    # -- derived indexes (computed once, cached on the instance) ---------

    @cached_property
    def nodes_by_id(self) -> dict[str, TaxonomyNode]:
        return {n.id: n for n in self.taxonomy}

    @cached_property
    def root(self) -> TaxonomyNode:
        return next(n for n in self.taxonomy if n.parent_id is None)

    @cached_property
    def children(self) -> dict[str, tuple[str, ...]]:
        """Child node ids per node, in taxonomy document order."""
        out: dict[str, list[str]] = {n.id: [] for n in self.taxonomy}
        for n in self.taxonomy:
            if n.parent_id is not None:
                out[n.parent_id].append(n.id)
        return {k: tuple(v) for k, v in out.items()}

    @cached_property
    def instances_by_label(self) -> dict[str, tuple[LabeledInstance, ...]]:
        out: dict[str, list[LabeledInstance]] = {}
        for inst in self.instances:
            out.setdefault(inst.label, []).append(inst)
        return {k: tuple(v) for k, v in out.items()}

    @cached_property
    def runs_by_id(self) -> dict[str, ModelRun]:
        return {r.model_id: r for r in self.runs}

    @cached_property
    def positive_subtree_counts(self) -> dict[str, int]:
        """Positive-decision label count within each node's subtree."""
        return self._subtree_counts(positive_only=True)

    @cached_property
    def subtree_counts(self) -> dict[str, int]:
        """All-decision label count within each node's subtree."""
        return self._subtree_counts(positive_only=False)

    def _subtree_counts(self, positive_only: bool) -> dict[str, int]:
        counts = {n.id: 0 for n in self.taxonomy}
        for inst in self.instances:
            if positive_only and inst.decision != "positive":
                continue
            counts[inst.label] += 1
        # Aggregate bottom-up; deepest levels first.
        for node in sorted(self.taxonomy, key=lambda n: n.level, reverse=True):
            if node.parent_id is not None:
                counts[node.parent_id] += counts[node.id]
        return counts

    def is_leaf(self, node_id: str) -> bool:
        return not self.children[node_id]

    def descendants(self, node_id: str) -> Iterator[str]:
        """Yield node_id and every node below it, depth-first in document order."""
        stack = [node_id]
        while stack:
            cur = stack.pop()
            yield cur
            stack.extend(reversed(self.children[cur]))

    def subtree_instances(
        self, node_id: str, positive_only: bool = True
    ) -> list[LabeledInstance]:
        """Instances labeled at or below ``node_id``."""
        out: list[LabeledInstance] = []
        for nid in self.descendants(node_id):
            for inst in self.instances_by_label.get(nid, ()):
                if positive_only and inst.decision != "positive":
                    continue
                out.append(inst)
        return out

    def ancestor_at_level(self, node_id: str, level: int) -> str:
        """The ancestor of ``node_id`` at the given level (itself if shallower)."""
        node = self.nodes_by_id[node_id]
        while node.level > level and node.parent_id is not None:
            node = self.nodes_by_id[node.parent_id]
        return node.id

    def stats(self) -> dict:
        """Table-1 style sizes: N = |instances|, per-run evaluation sizes."""
        return {
            "nodes": len(self.taxonomy),
            "instances": len(self.instances),
            "features": len(self.features),
            "runs": {r.model_id: r.size for r in self.runs},
        }


# --- line-stream helpers --------------------------------------------------


def _iter_records(stream: Iterable[str] | IO[str]) -> Iterator[tuple[int, dict]]:
    for line_number, raw in enumerate(stream, start=1):
        line = raw.strip()
        if not line:
            continue
        try:
            record = json.loads(line)
        except json.JSONDecodeError as exc:
            raise MalformedRecord(line_number, f"invalid JSON ({exc.msg})") from exc
        if not isinstance(record, dict):
            raise MalformedRecord(line_number, "record must be a JSON object")
        yield line_number, record


def _require(record: dict, key: str, line_number: int, kind=str):
    if key not in record:
        raise MalformedRecord(line_number, f"missing field {key!r}")
    value = record[key]
    if kind is int:
        # bool is an int subclass; reject it explicitly
        if isinstance(value, bool) or not isinstance(value, int):
            raise MalformedRecord(line_number, f"field {key!r} must be an integer")
    elif not isinstance(value, kind):
        raise MalformedRecord(line_number, f"field {key!r} must be {kind.__name__}")
    return value


# --- parsers ----------------------------------------------------------------


def parse_taxonomy(stream: Iterable[str] | IO[str]) -> list[TaxonomyNode]:
    """Parse taxonomy records and validate the tree invariants.

    Returns nodes in document order.  Raises DuplicateId, UnknownParent,
    CycleDetected, MultipleRoots, or MalformedRecord.
    """
    nodes: list[TaxonomyNode] = []
    lines: dict[str, int] = {}
    for line_number, record in _iter_records(stream):
        node_id = _require(record, "id", line_number)
        name = _require(record, "name", line_number)
        level = _require(record, "level", line_number, int)
        if level < 0:
            raise MalformedRecord(line_number, "level must be non-negative")
        parent_id = record.get("parent_id")
        if parent_id is not None and not isinstance(parent_id, str):
            raise MalformedRecord(line_number, "field 'parent_id' must be str")
        if node_id in lines:
            raise DuplicateId(f"duplicate taxonomy id {node_id!r} (line {line_number})")
        lines[node_id] = line_number
        nodes.append(TaxonomyNode(id=node_id, name=name, level=level, parent_id=parent_id))

    by_id = {n.id: n for n in nodes}
    roots = [n for n in nodes if n.parent_id is None]
    # Self-parents and parent cycles first: a cycle also hides the root.
    for node in nodes:
        seen = {node.id}
        cur = node
        while cur.parent_id is not None:
            if cur.parent_id in seen:
                raise CycleDetected(
                    f"cycle through node {cur.parent_id!r} (line {lines[node.id]})"
                )
            if cur.parent_id not in by_id:
                raise UnknownParent(
                    f"node {cur.id!r} references unknown parent {cur.parent_id!r}"
                )
            seen.add(cur.parent_id)
            cur = by_id[cur.parent_id]
    if not nodes:
        raise MalformedRecord(0, "taxonomy stream is empty")
    if len(roots) > 1:
        raise MultipleRoots(f"expected one root, found {[n.id for n in roots]}")
    if not roots:
        raise CycleDetected("no root node found")
    for node in nodes:
        if node.parent_id is None:
            if node.level != 0:
                raise MalformedRecord(lines[node.id], "root level must be 0")
        elif node.level != by_id[node.parent_id].level + 1:
            raise MalformedRecord(
                lines[node.id],
                f"level {node.level} != parent level {by_id[node.parent_id].level} + 1",
            )
    return nodes


def parse_labels(
    stream: Iterable[str] | IO[str],
    taxonomy: Sequence[TaxonomyNode],
    source_trust: dict[str, int] | None = None,
    allow_inner_labels: bool = False,
) -> list[LabeledInstance]:
    """Parse label records against a validated taxonomy.

    ``source_trust`` is extended in place: unknown sources are registered
    with the lowest trust rank and a warning, rather than rejected.
    """
    by_id = {n.id: n for n in taxonomy}
    has_children = {n.parent_id for n in taxonomy if n.parent_id is not None}
    if source_trust is None:
        source_trust = dict(DEFAULT_SOURCE_TRUST)

    instances: list[LabeledInstance] = []
    for line_number, record in _iter_records(stream):
        item_id = _require(record, "item_id", line_number)
        title = _require(record, "title", line_number)
        label = _require(record, "label", line_number)
        source = _require(record, "source", line_number)
        decision = _require(record, "decision", line_number)
        timestamp = record.get("timestamp")
        if timestamp is not None:
            if not isinstance(timestamp, str):
                raise MalformedRecord(line_number, "field 'timestamp' must be str")
            try:
                datetime.fromisoformat(timestamp)
            except ValueError:
                raise MalformedRecord(line_number, f"bad ISO-8601 timestamp {timestamp!r}")
        if decision not in DECISIONS:
            raise InvalidDecision(
                f"line {line_number}: decision must be one of {DECISIONS}, got {decision!r}"
            )
        if label not in by_id:
            raise UnknownLabel(item_id, f"line {line_number}: unknown label {label!r}")
        if not allow_inner_labels and label in has_children:
            raise UnknownLabel(
                item_id, f"line {line_number}: label {label!r} is not a leaf node"
            )
        if source not in source_trust:
            rank = max(source_trust.values(), default=0) + 1
            source_trust[source] = rank
            log.warning("unknown label source %r registered with trust rank %d", source, rank)
        instances.append(
            LabeledInstance(
                item_id=item_id,
                title=title,
                label=label,
                source=source,
                decision=decision,
                timestamp=timestamp,
            )
        )
    return instances


def parse_features(
    stream: Iterable[str] | IO[str],
) -> dict[str, FeatureColumn]:
    """Parse feature records into named columns.

    Column kind must be uniform; numeric values must be finite.  Referential
    integrity against instances is checked at snapshot construction.
    """
    kinds: dict[str, str] = {}
    values: dict[str, dict[str, float | str]] = {}
    for line_number, record in _iter_records(stream):
        name = _require(record, "name", line_number)
        kind = _require(record, "kind", line_number)
        item_id = _require(record, "item_id", line_number)
        if kind not in FEATURE_KINDS:
            raise MalformedRecord(line_number, f"kind must be one of {FEATURE_KINDS}")
        if name in kinds and kinds[name] != kind:
            raise MalformedRecord(
                line_number, f"feature {name!r} mixes kinds {kinds[name]!r} and {kind!r}"
            )
        if "value" not in record:
            raise MalformedRecord(line_number, "missing field 'value'")
        value = record["value"]
        if kind == "numeric":
            if isinstance(value, bool) or not isinstance(value, (int, float)):
                raise MalformedRecord(line_number, "numeric feature value must be a number")
            value = float(value)
            if not math.isfinite(value):
                raise MalformedRecord(line_number, "numeric feature value must be finite")
        else:
            if not isinstance(value, str):
                raise MalformedRecord(line_number, "categorical feature value must be str")
        kinds.setdefault(name, kind)
        column = values.setdefault(name, {})
        if item_id in column:
            raise DuplicateItem(
                f"line {line_number}: duplicate value for item {item_id!r} "
                f"in feature {name!r}"
            )
        column[item_id] = value
    return {
        name: FeatureColumn(name=name, kind=kinds[name], values=values[name])
        for name in kinds
    }


def _parse_evaluation_record(record: dict, line_number: int, by_id: dict) -> EvaluationRecord:
    item_id = _require(record, "item_id", line_number)
    true_label = _require(record, "true_label", line_number)
    predicted_label = _require(record, "predicted_label", line_number)
    for label in (true_label, predicted_label):
        if label not in by_id:
            raise UnknownLabel(item_id, f"line {line_number}: unknown label {label!r}")
    return EvaluationRecord(item_id=item_id, true_label=true_label, predicted_label=predicted_label)


def parse_evaluation(
    stream: Iterable[str] | IO[str],
    taxonomy: Sequence[TaxonomyNode],
    model_id: str,
    ordinal: int,
) -> ModelRun:
    """Parse evaluation records for a single model run.

    Records may carry ``model_id``/``ordinal`` fields; when present they must
    match the arguments.  An empty stream yields an empty (legal) run.
    """
    by_id = {n.id: n for n in taxonomy}
    records: list[EvaluationRecord] = []
    seen: set[str] = set()
    for line_number, record in _iter_records(stream):
        if "model_id" in record and record["model_id"] != model_id:
            raise MalformedRecord(
                line_number, f"record model_id {record['model_id']!r} != {model_id!r}"
            )
        if "ordinal" in record and record["ordinal"] != ordinal:
            raise MalformedRecord(
                line_number, f"record ordinal {record['ordinal']!r} != {ordinal}"
            )
        rec = _parse_evaluation_record(record, line_number, by_id)
        if rec.item_id in seen:
            raise DuplicateItem(
                f"line {line_number}: duplicate item {rec.item_id!r} in run {model_id!r}"
            )
        seen.add(rec.item_id)
        records.append(rec)
    return ModelRun(model_id=model_id, ordinal=ordinal, records=tuple(records))


def parse_runs(
    stream: Iterable[str] | IO[str], taxonomy: Sequence[TaxonomyNode]
) -> list[ModelRun]:
    """Parse a mixed evaluation stream into one run per model_id."""
    by_id = {n.id: n for n in taxonomy}
    ordinals: dict[str, int] = {}
    records: dict[str, list[EvaluationRecord]] = {}
    seen: dict[str, set[str]] = {}
    for line_number, record in _iter_records(stream):
        model_id = _require(record, "model_id", line_number)
        ordinal = _require(record, "ordinal", line_number, int)
        if model_id in ordinals and ordinals[model_id] != ordinal:
            raise MalformedRecord(
                line_number,
                f"model {model_id!r} given ordinals {ordinals[model_id]} and {ordinal}",
            )
        ordinals.setdefault(model_id, ordinal)
        rec = _parse_evaluation_record(record, line_number, by_id)
        run_seen = seen.setdefault(model_id, set())
        if rec.item_id in run_seen:
            raise DuplicateItem(
                f"line {line_number}: duplicate item {rec.item_id!r} in run {model_id!r}"
            )
        run_seen.add(rec.item_id)
        records.setdefault(model_id, []).append(rec)
    return [
        ModelRun(model_id=m, ordinal=ordinals[m], records=tuple(records[m]))
        for m in records
    ]


# --- snapshot construction ---------------------------------------------------


def build_snapshot(
    taxonomy: Sequence[TaxonomyNode],
    instances: Sequence[LabeledInstance],
    features: Mapping[str, FeatureColumn] | None = None,
    runs: Sequence[ModelRun] | None = None,
    source_trust: Mapping[str, int] | None = None,
    created_at: str | None = None,
) -> DatasetSnapshot:
    """Cross-validate all parts and assemble an immutable snapshot.

    Construction is all-or-nothing: every dangling reference is collected and
    reported in a single CrossReferenceError.
    """
    features = dict(features or {})
    runs = list(runs or [])
    trust = dict(source_trust) if source_trust is not None else dict(DEFAULT_SOURCE_TRUST)

    node_ids = {n.id for n in taxonomy}
    if len(node_ids) != len(taxonomy):
        raise DuplicateId("taxonomy contains duplicate node ids")
    item_ids = set()
    problems: list[str] = []

    for inst in instances:
        if inst.label not in node_ids:
            problems.append(f"instance {inst.item_id!r} labels unknown node {inst.label!r}")
        if inst.decision not in DECISIONS:
            problems.append(f"instance {inst.item_id!r} has invalid decision {inst.decision!r}")
        if inst.source not in trust:
            trust[inst.source] = max(trust.values(), default=0) + 1
            log.warning(
                "unknown label source %r registered with trust rank %d",
                inst.source,
                trust[inst.source],
            )
        item_ids.add(inst.item_id)

    for column in features.values():
        for item_id in column.values:
            if item_id not in item_ids:
                problems.append(
                    f"feature {column.name!r} values unknown item {item_id!r}"
                )

    seen_ordinals: set[int] = set()
    seen_models: set[str] = set()
    for run in runs:
        if run.model_id in seen_models:
            problems.append(f"duplicate run model_id {run.model_id!r}")
        if run.ordinal in seen_ordinals:
            problems.append(f"duplicate run ordinal {run.ordinal}")
        seen_models.add(run.model_id)
        seen_ordinals.add(run.ordinal)
        run_items: set[str] = set()
        for rec in run.records:
            if rec.item_id in run_items:
                problems.append(
                    f"run {run.model_id!r} repeats item {rec.item_id!r}"
                )
            run_items.add(rec.item_id)
            for label in (rec.true_label, rec.predicted_label):
                if label not in node_ids:
                    problems.append(
                        f"run {run.model_id!r} item {rec.item_id!r} references "
                        f"unknown node {label!r}"
                    )

    if problems:
        raise CrossReferenceError(problems)

    snapshot = DatasetSnapshot(
        taxonomy=tuple(taxonomy),
        instances=tuple(instances),
        features=features,
        runs=tuple(sorted(runs, key=lambda r: r.ordinal)),
        source_trust=trust,
        created_at=created_at or datetime.now(timezone.utc).isoformat(),
    )
    # Touch the derived indexes eagerly so concurrent readers never race on
    # lazy initialization.
    snapshot.nodes_by_id
    snapshot.children
    snapshot.instances_by_label
    snapshot.runs_by_id
    snapshot.positive_subtree_counts
    snapshot.subtree_counts
    return snapshot


# --- serialization -----------------------------------------------------------


def taxonomy_lines(nodes: Iterable[TaxonomyNode]) -> Iterator[str]:
    for n in nodes:
        record: dict = {"id": n.id, "name": n.name, "level": n.level}
        if n.parent_id is not None:
            record["parent_id"] = n.parent_id
        yield json.dumps(record, ensure_ascii=False)


def label_lines(instances: Iterable[LabeledInstance]) -> Iterator[str]:
    for inst in instances:
        record: dict = {
            "item_id": inst.item_id,
            "title": inst.title,
            "label": inst.label,
            "source": inst.source,
            "decision": inst.decision,
        }
        if inst.timestamp is not None:
            record["timestamp"] = inst.timestamp
        yield json.dumps(record, ensure_ascii=False)


def feature_lines(features: Mapping[str, FeatureColumn]) -> Iterator[str]:
    for name in features:
        column = features[name]
        for item_id, value in column.values.items():
            yield json.dumps(
                {"name": name, "kind": column.kind, "item_id": item_id, "value": value},
                ensure_ascii=False,
            )


def evaluation_lines(runs: Iterable[ModelRun]) -> Iterator[str]:
    for run in runs:
        for rec in run.records:
            yield json.dumps(
                {
                    "model_id": run.model_id,
                    "ordinal": run.ordinal,
                    "item_id": rec.item_id,
                    "true_label": rec.true_label,
                    "predicted_label": rec.predicted_label,
                },
                ensure_ascii=False,
            )


def save_snapshot(snapshot: DatasetSnapshot, path) -> None:
    """Write a snapshot as a single line-delimited bundle file."""
    with open(path, "w", encoding="utf-8") as fh:
        header = {
            "record": "snapshot",
            "version": 1,
            "created_at": snapshot.created_at,
            "source_trust": dict(snapshot.source_trust),
            "runs": [
                {"model_id": r.model_id, "ordinal": r.ordinal} for r in snapshot.runs
            ],
        }
        fh.write(json.dumps(header, ensure_ascii=False) + "\n")
        for kind, lines in (
            ("taxonomy", taxonomy_lines(snapshot.taxonomy)),
            ("label", label_lines(snapshot.instances)),
            ("feature", feature_lines(snapshot.features)),
            ("evaluation", evaluation_lines(snapshot.runs)),
        ):
            for line in lines:
                fh.write('{"record": "%s", "data": %s}\n' % (kind, line))


def load_snapshot(path) -> DatasetSnapshot:
    """Load a snapshot bundle written by :func:`save_snapshot`."""
    header = None
    taxonomy_src: list[str] = []
    label_src: list[str] = []
    feature_src: list[str] = []
    evaluation_src: list[str] = []
    buckets = {
        "taxonomy": taxonomy_src,
        "label": label_src,
        "feature": feature_src,
        "evaluation": evaluation_src,
    }
    with open(path, "r", encoding="utf-8") as fh:
        for line_number, record in _iter_records(fh):
            kind = _require(record, "record", line_number)
            if kind == "snapshot":
                header = record
                continue
            if kind not in buckets:
                raise MalformedRecord(line_number, f"unknown record kind {kind!r}")
            if "data" not in record:
                raise MalformedRecord(line_number, "missing field 'data'")
            buckets[kind].append(json.dumps(record["data"]))
    if header is None:
        raise MalformedRecord(0, "snapshot bundle is missing its header line")

    taxonomy = parse_taxonomy(taxonomy_src)
    trust = {str(k): int(v) for k, v in header.get("source_trust", {}).items()}
    instances = parse_labels(label_src, taxonomy, source_trust=trust)
    features = parse_features(feature_src)
    runs = parse_runs(evaluation_src, taxonomy)
    declared = {r["model_id"]: r["ordinal"] for r in header.get("runs", [])}
    present = {run.model_id for run in runs}
    for model_id, ordinal in declared.items():
        if model_id not in present:  # empty run: no record lines to recover it
            runs.append(ModelRun(model_id=model_id, ordinal=ordinal, records=()))
    return build_snapshot(
        taxonomy,
        instances,
        features,
        runs,
        source_trust=trust,
        created_at=header.get("created_at"),
    )
