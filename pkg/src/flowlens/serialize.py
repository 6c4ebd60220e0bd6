"""JSON payload builders shared by the HTTP service and the CLI.

Both surfaces call these functions, which is what guarantees that an API
response and the corresponding `flowlens report` output are identical for
identical inputs.  All dicts are built in deterministic key order.
"""

from __future__ import annotations

import math
from typing import Sequence

from . import distributions, evaluation, features, layout as layout_mod
from .distributions import FlowMatrix
from .errors import InsufficientData, MalformedRecord, UnknownRun
from .evaluation import DiagnosticFinding, LayeredFlow, TrendClass
from .features import ImportanceScore, ViolinSummary, WelchResult
from .ingest import DatasetSnapshot
from .layout import RadialLayout, SankeyLayout, SankeyLink, SankeyNode


def _number(value: float):
    """JSON-safe float: infinities become signed strings."""
    if math.isinf(value):
        return "Infinity" if value > 0 else "-Infinity"
    return value


# --- value converters -----------------------------------------------------


def flow_to_json(matrix: FlowMatrix) -> dict:
    return {
        "left_labels": list(matrix.left_labels),
        "right_labels": list(matrix.right_labels),
        "counts": [list(row) for row in matrix.counts],
        "left_marginal": dict(matrix.left_marginal.elements),
        "right_marginal": dict(matrix.right_marginal.elements),
        "total": matrix.total,
    }


def flow_from_json(data: dict) -> FlowMatrix:
    try:
        return FlowMatrix.from_counts(
            data["left_labels"], data["right_labels"], data["counts"]
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise MalformedRecord(0, f"bad flow matrix JSON: {exc}") from exc


def layout_to_json(layout: SankeyLayout) -> dict:
    return {
        "nodes": [
            {
                "label": n.label,
                "layer": n.layer,
                "y": n.y_top,
                "h": n.height,
                "colorIndex": n.color_index,
            }
            for n in layout.nodes
        ],
        "links": [
            {
                "s": l.source,
                "t": l.target,
                "w": l.thickness,
                "so": l.source_offset,
                "to": l.target_offset,
            }
            for l in layout.links
        ],
        "crossings": layout.crossings,
    }


def layout_from_json(data: dict) -> SankeyLayout:
    try:
        nodes = tuple(
            SankeyNode(
                label=n["label"],
                layer=int(n["layer"]),
                y_top=float(n["y"]),
                height=float(n["h"]),
                color_index=int(n.get("colorIndex", 0)),
            )
            for n in data["nodes"]
        )
        links = tuple(
            SankeyLink(
                source=int(l["s"]),
                target=int(l["t"]),
                thickness=float(l["w"]),
                source_offset=float(l["so"]),
                target_offset=float(l["to"]),
            )
            for l in data["links"]
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise MalformedRecord(0, f"bad layout JSON: {exc}") from exc
    layer_count = max((n.layer for n in nodes), default=-1) + 1
    return SankeyLayout(
        nodes=nodes,
        links=links,
        layer_count=layer_count,
        crossings=int(data.get("crossings", 0)),
    )


def radial_to_json(radial: RadialLayout) -> dict:
    out = {
        "placements": {k: [r, a] for k, (r, a) in radial.placements.items()},
        "sectors": {k: [s, e] for k, (s, e) in radial.sectors.items()},
        "edges": [[p, c] for p, c in radial.edges],
    }
    if radial.weights is not None:
        out["weights"] = dict(radial.weights)
    return out


def radial_from_json(data: dict) -> RadialLayout:
    try:
        return RadialLayout(
            placements={k: (float(r), float(a)) for k, (r, a) in data["placements"].items()},
            sectors={k: (float(s), float(e)) for k, (s, e) in data.get("sectors", {}).items()},
            edges=tuple((p, c) for p, c in data.get("edges", [])),
            weights=data.get("weights"),
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise MalformedRecord(0, f"bad radial layout JSON: {exc}") from exc


def finding_to_json(finding: DiagnosticFinding) -> dict:
    return {
        "kind": finding.kind.value,
        "subjects": list(finding.subjects),
        "severity": finding.severity,
        "evidence": finding.evidence,
    }


def trend_to_json(t: TrendClass) -> dict:
    return {
        "category": t.category,
        "series": list(t.series),
        "class": t.kind.value,
        "color": t.color_key,
    }


def importance_to_json(score: ImportanceScore) -> dict:
    return {
        "feature": score.feature,
        "score": score.score,
        "normalized": score.normalized,
        "per_value": [
            {"given": c.given, "probabilities": dict(c.probabilities)}
            for c in score.per_value_conditionals
        ],
    }


def welch_to_json(result: WelchResult) -> dict:
    return {
        "class_a": result.class_a,
        "class_b": result.class_b,
        "t_statistic": _number(result.t_statistic),
        "mean_a": result.mean_a,
        "mean_b": result.mean_b,
        "var_a": result.var_a,
        "var_b": result.var_b,
        "n_a": result.n_a,
        "n_b": result.n_b,
    }


def violin_to_json(summary: ViolinSummary) -> dict:
    return {
        "category": summary.category,
        "grid": list(summary.grid),
        "density": list(summary.density),
        "quartiles": list(summary.quartiles),
        "n": summary.n,
    }


def layered_to_json(flow: LayeredFlow) -> dict:
    return {
        "layers": list(flow.layers),
        "matrices": [flow_to_json(m) for m in flow.matrices],
        "item_paths": {k: list(v) for k, v in flow.item_paths.items()},
    }


def _maybe_layout(flows, gap: float = 0.01, min_share: float = 0.005) -> dict | None:
    """Sankey layout JSON, or None when there is nothing to draw."""
    matrices = [flows] if isinstance(flows, FlowMatrix) else list(flows)
    if any(m.total == 0 for m in matrices):
        return None
    return layout_to_json(layout_mod.layout_sankey(matrices, gap=gap, min_share=min_share))


# --- analysis payloads (one per endpoint / report kind) -------------------


def taxonomy_payload(snapshot: DatasetSnapshot) -> dict:
    weights = {n.id: float(snapshot.positive_subtree_counts[n.id]) for n in snapshot.taxonomy}
    radial = layout_mod.layout_radial(snapshot.taxonomy, weights=weights)
    return {
        "nodes": [
            {
                "id": n.id,
                "name": n.name,
                "parent_id": n.parent_id,
                "level": n.level,
                "label_count": len(snapshot.instances_by_label.get(n.id, ())),
                "positive_subtree_count": snapshot.positive_subtree_counts[n.id],
                "subtree_count": snapshot.subtree_counts[n.id],
            }
            for n in snapshot.taxonomy
        ],
        "radial": radial_to_json(radial),
        "created_at": snapshot.created_at,
        "stats": snapshot.stats(),
    }


def quantity_payload(snapshot: DatasetSnapshot, node: str, beta: float = 0.5) -> dict:
    report = distributions.quantity_report(snapshot, node, threshold_beta=beta)
    matrix = report.to_flow()
    return {
        "parent": report.parent,
        "counts": dict(report.counts),
        "shares": dict(report.shares),
        "flagged": sorted(report.flagged),
        "threshold_beta": report.threshold_beta,
        "matrix": flow_to_json(matrix),
        "layout": _maybe_layout(matrix, min_share=0.0),
    }


def quality_payload(snapshot: DatasetSnapshot, node: str, trust: float = 0.5) -> dict:
    report = distributions.quality_report(snapshot, node, trust_threshold=trust)
    return {
        "category": report.category,
        "matrix": flow_to_json(report.by_source_decision),
        "trusted_share": report.trusted_share,
        "flagged": report.flagged,
        "trust_threshold": trust,
        "layout": _maybe_layout(report.by_source_decision, min_share=0.0),
    }


def multilevel_payload(snapshot: DatasetSnapshot, node: str, depth: int = 2) -> dict:
    matrices = distributions.multilevel_quantity(snapshot, node, depth)
    return {
        "root": node,
        "depth": depth,
        "matrices": [flow_to_json(m) for m in matrices],
        "layout": _maybe_layout(matrices, min_share=0.0) if matrices else None,
    }


def features_payload(snapshot: DatasetSnapshot) -> list[dict]:
    return [
        {"name": c.name, "kind": c.kind, "values": len(c.values)}
        for c in snapshot.features.values()
    ]


def feature_flow_payload(snapshot: DatasetSnapshot, name: str) -> dict:
    matrix = features.feature_label_flow(snapshot, name)
    return {
        "feature": name,
        "matrix": flow_to_json(matrix),
        "layout": _maybe_layout(matrix),
    }


def importance_payload(snapshot: DatasetSnapshot, name: str | None = None):
    if name is not None:
        return importance_to_json(features.importance(snapshot, name))
    return [importance_to_json(s) for s in features.rank_features(snapshot)]


def welch_payload(snapshot: DatasetSnapshot, name: str, class_a: str, class_b: str) -> dict:
    return welch_to_json(features.welch(snapshot, name, class_a, class_b))


def violin_payload(
    snapshot: DatasetSnapshot, name: str, category: str, grid_points: int = 64
) -> dict:
    summary = features.violin(snapshot, name, category, grid_points=grid_points)
    out = violin_to_json(summary)
    out["outline"] = [[x, y] for x, y in layout_mod.layout_violin(summary, width=1.0)]
    return out


def runs_payload(snapshot: DatasetSnapshot) -> list[dict]:
    return [
        {"model_id": r.model_id, "ordinal": r.ordinal, "size": r.size}
        for r in snapshot.runs
    ]


def _run(snapshot: DatasetSnapshot, run_id: str):
    if run_id not in snapshot.runs_by_id:
        raise UnknownRun(f"unknown run {run_id!r}")
    return snapshot.runs_by_id[run_id]


def accuracy_payload(snapshot: DatasetSnapshot, run_id: str) -> list[dict]:
    rows = evaluation.accuracy_report(_run(snapshot, run_id))
    return [
        {"category": r.category, "sample_size": r.sample_size, "accuracy": r.accuracy}
        for r in rows
    ]


def misclassification_payload(snapshot: DatasetSnapshot, run_id: str) -> dict:
    matrix = evaluation.misclassification_flow(_run(snapshot, run_id))
    return {
        "run": run_id,
        "matrix": flow_to_json(matrix),
        "layout": _maybe_layout(matrix),
    }


def diagnose_payload(
    snapshot: DatasetSnapshot, run_id: str, min_flow: int = 5, broad_fanin: int = 3
) -> list[dict]:
    findings = evaluation.diagnose(
        _run(snapshot, run_id), snapshot, min_flow=min_flow, broad_fanin=broad_fanin
    )
    return [finding_to_json(f) for f in findings]


def _resolve_runs(snapshot: DatasetSnapshot, run_ids: Sequence[str] | None):
    if run_ids:
        return evaluation.select_runs(snapshot, run_ids)
    return list(snapshot.runs)


def model_diff_payload(
    snapshot: DatasetSnapshot,
    run_ids: Sequence[str] | None = None,
    min_share: float = 0.005,
) -> dict:
    flow = evaluation.model_diff(_resolve_runs(snapshot, run_ids))
    return {
        "flow": layered_to_json(flow),
        "layout": _maybe_layout(flow.matrices, min_share=min_share),
    }


def trends_payload(
    snapshot: DatasetSnapshot,
    run_ids: Sequence[str] | None = None,
    epsilon: float = 0.005,
) -> list[dict]:
    runs = _resolve_runs(snapshot, run_ids)
    series = evaluation.accuracy_series(runs)
    return [trend_to_json(t) for t in evaluation.trend(series, epsilon=epsilon)]


def layout_request_payload(body: dict) -> dict:
    """POST /api/layout/sankey: lay out a matrix or chain supplied as JSON."""
    if "matrices" in body:
        flows = [flow_from_json(m) for m in body["matrices"]]
    elif "matrix" in body:
        flows = flow_from_json(body["matrix"])
    else:
        raise MalformedRecord(0, "layout request needs 'matrix' or 'matrices'")
    gap = float(body.get("gap", 0.01))
    min_share = float(body.get("min_share", 0.005))
    return layout_to_json(layout_mod.layout_sankey(flows, gap=gap, min_share=min_share))


def first_numeric_feature(snapshot: DatasetSnapshot) -> str | None:
    for name, column in snapshot.features.items():
        if column.kind == "numeric":
            return name
    return None


def report_all_payload(snapshot: DatasetSnapshot) -> dict:
    """Every analysis at defaults; used by `flowlens report --kind all`."""
    out: dict = {"stats": snapshot.stats(), "taxonomy": taxonomy_payload(snapshot)}
    root = snapshot.root.id
    if snapshot.children[root]:
        out["quantity"] = quantity_payload(snapshot, root)
        out["multilevel"] = multilevel_payload(
            snapshot, root, depth=max(n.level for n in snapshot.taxonomy)
        )
    if snapshot.instances:
        out["quality"] = quality_payload(snapshot, root)
    out["importance"] = importance_payload(snapshot)
    numeric = first_numeric_feature(snapshot)
    if numeric is not None:
        covered = [
            (len(snapshot.instances_by_label.get(n.id, ())), n.id)
            for n in snapshot.taxonomy
            if snapshot.is_leaf(n.id)
        ]
        covered.sort(reverse=True)
        top = [nid for count, nid in covered[:2] if count >= 2]
        try:
            if top:
                out["violin"] = violin_payload(snapshot, numeric, top[0])
            if len(top) == 2:
                out["welch"] = welch_payload(snapshot, numeric, top[0], top[1])
        except InsufficientData:
            pass  # numeric feature does not cover the densest classes
    if snapshot.runs:
        last = snapshot.runs[-1].model_id
        out["accuracy"] = accuracy_payload(snapshot, last)
        out["misclassification"] = misclassification_payload(snapshot, last)
        out["diagnose"] = diagnose_payload(snapshot, last)
    if len(snapshot.runs) >= 2:
        out["trends"] = trends_payload(snapshot)
        out["model_diff"] = model_diff_payload(snapshot)
    return out
