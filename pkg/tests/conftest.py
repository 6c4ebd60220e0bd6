from __future__ import annotations

import itertools

import pytest

from flowlens.ingest import (
    EvaluationRecord,
    FeatureColumn,
    LabeledInstance,
    ModelRun,
    TaxonomyNode,
    build_snapshot,
)

_counter = itertools.count()


def make_taxonomy(edges: dict[str, str | None]) -> list[TaxonomyNode]:
    """Build nodes from an {id: parent_id} mapping, computing levels."""
    levels: dict[str, int] = {}

    def level_of(node: str) -> int:
        if node not in levels:
            parent = edges[node]
            levels[node] = 0 if parent is None else level_of(parent) + 1
        return levels[node]

    return [
        TaxonomyNode(id=node, name=node.replace("_", " ").title(), level=level_of(node), parent_id=parent)
        for node, parent in edges.items()
    ]


def make_instance(
    label: str,
    source: str = "expert",
    decision: str = "positive",
    item_id: str | None = None,
    title: str | None = None,
) -> LabeledInstance:
    if item_id is None:
        item_id = f"item-{next(_counter)}"
    return LabeledInstance(
        item_id=item_id,
        title=title if title is not None else f"{label} product",
        label=label,
        source=source,
        decision=decision,
    )


def make_run(model_id: str, ordinal: int, rows: list[tuple[str, str, str]]) -> ModelRun:
    """rows: (item_id, true_label, predicted_label)."""
    return ModelRun(
        model_id=model_id,
        ordinal=ordinal,
        records=tuple(
            EvaluationRecord(item_id=i, true_label=t, predicted_label=p) for i, t, p in rows
        ),
    )


def build_catalog_taxonomy() -> list[TaxonomyNode]:
    """Small product hierarchy with three top branches."""
    return make_taxonomy(
        {
            "root": None,
            "electronics": "root",
            "fashion": "root",
            "sports": "root",
            "cameras": "electronics",
            "computers": "electronics",
            "drones": "electronics",  # stays unlabeled: the empty-state case
            "dslr": "cameras",
            "point_shoot": "cameras",
            "camcorders": "cameras",
            "laptops": "computers",
            "desktops": "computers",
            "workwear": "fashion",
            "sleepwear": "fashion",
            "knit_tops": "fashion",
            "camping": "sports",
            "fitness": "sports",
        }
    )


def build_catalog_snapshot(catalog_taxonomy=None):
    """Deterministic snapshot with labels, two features, and two runs."""
    if catalog_taxonomy is None:
        catalog_taxonomy = build_catalog_taxonomy()
    instances = []
    counts = {
        "dslr": 12,
        "point_shoot": 10,
        "camcorders": 30,
        "laptops": 8,
        "desktops": 6,
        "workwear": 9,
        "sleepwear": 7,
        "knit_tops": 11,
        "camping": 3,
        "fitness": 5,
    }
    sources = ["expert", "crowd", "rule", "curation"]
    for label, n in counts.items():
        for i in range(n):
            instances.append(
                make_instance(
                    label,
                    source=sources[i % len(sources)],
                    decision="negative" if (label == "camcorders" and i % 10 == 9) else "positive",
                    item_id=f"{label}-{i}",
                    title=f"{label} item {i}",
                )
            )
    title_length = FeatureColumn(
        name="title_length",
        kind="numeric",
        values={
            inst.item_id: float(10 + sum(ord(c) for c in inst.item_id) % 23)
            for inst in instances
        },
    )
    brand = FeatureColumn(
        name="brand",
        kind="categorical",
        values={
            inst.item_id: ("acme" if inst.label.startswith(("dslr", "point", "cam")) else "zenith")
            for inst in instances
        },
    )
    run_a = make_run(
        "M0",
        0,
        [("e1", "dslr", "dslr"), ("e2", "dslr", "point_shoot"), ("e3", "workwear", "sleepwear"),
         ("e4", "camping", "camping"), ("e5", "laptops", "desktops"), ("e6", "knit_tops", "knit_tops")],
    )
    run_b = make_run(
        "M1",
        1,
        [("e1", "dslr", "dslr"), ("e2", "dslr", "dslr"), ("e3", "workwear", "workwear"),
         ("e4", "camping", "fitness"), ("e5", "laptops", "laptops"), ("e6", "knit_tops", "sleepwear")],
    )
    return build_snapshot(
        catalog_taxonomy,
        instances,
        {"title_length": title_length, "brand": brand},
        [run_a, run_b],
        created_at="2024-05-01T00:00:00+00:00",
    )


@pytest.fixture
def catalog_taxonomy() -> list[TaxonomyNode]:
    return build_catalog_taxonomy()


@pytest.fixture
def catalog_snapshot(catalog_taxonomy):
    return build_catalog_snapshot(catalog_taxonomy)
