"""Renderer-agnostic geometry: layered Sankey layouts with barycenter
crossing reduction, radial tree placement, and violin outlines.

All Sankey coordinates are normalized to [0, 1]; renderers scale.  Layouts
are fully deterministic: tie-breaks are lexicographic and no randomness is
involved, so identical inputs yield bit-identical geometry.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, Sequence

from .distributions import FlowMatrix
from .errors import EmptyFlow
from .ingest import TaxonomyNode

#: Label used for the per-layer node that absorbs below-threshold flows.
OTHER_LABEL = "Other"

_BARYCENTER_SWEEPS = 4


@dataclass(frozen=True)
class SankeyNode:
    label: str
    layer: int
    y_top: float
    height: float
    color_index: int


@dataclass(frozen=True)
class SankeyLink:
    source: int  # index into SankeyLayout.nodes
    target: int
    thickness: float
    source_offset: float  # from the source node's y_top
    target_offset: float


@dataclass(frozen=True)
class SankeyLayout:
    nodes: tuple[SankeyNode, ...]
    links: tuple[SankeyLink, ...]
    layer_count: int
    crossings: int


@dataclass(frozen=True)
class RadialLayout:
    """Radial tree placement: radius grows with depth, siblings share sectors."""

    placements: dict[str, tuple[float, float]]  # node -> (radius, angle radians)
    sectors: dict[str, tuple[float, float]]  # node -> (start angle, extent)
    edges: tuple[tuple[str, str], ...] = ()  # (parent, child) pairs
    weights: dict[str, float] | None = None


# --- internal helpers -----------------------------------------------------


def _as_matrices(flows) -> list[FlowMatrix]:
    if isinstance(flows, FlowMatrix):
        return [flows]
    matrices = getattr(flows, "matrices", flows)
    out = list(matrices)
    if not out:
        raise EmptyFlow("no flow matrices given")
    if not all(isinstance(m, FlowMatrix) for m in out):
        raise TypeError("expected a FlowMatrix, a sequence of them, or a LayeredFlow")
    return out


def _layer_labels(matrices: Sequence[FlowMatrix]) -> list[list[str]]:
    """Node labels per layer, first-appearance order."""
    layers: list[list[str]] = [list(matrices[0].left_labels)]
    for i, matrix in enumerate(matrices):
        labels = list(matrix.right_labels)
        seen = set(labels)
        if i + 1 < len(matrices):
            # a chained matrix may introduce nodes with no inflow
            labels.extend(l for l in matrices[i + 1].left_labels if l not in seen)
        layers.append(labels)
    return layers


def _node_totals(matrices: Sequence[FlowMatrix], layers: Sequence[Sequence[str]]) -> list[dict[str, int]]:
    """Per-layer node weight: max of inflow and outflow."""
    totals: list[dict[str, int]] = [dict.fromkeys(layer, 0) for layer in layers]
    for i, matrix in enumerate(matrices):
        out_m = matrix.left_marginal.elements
        in_m = matrix.right_marginal.elements
        for label in layers[i]:
            totals[i][label] = max(totals[i][label], out_m.get(label, 0))
        for label in layers[i + 1]:
            totals[i + 1][label] = max(totals[i + 1][label], in_m.get(label, 0))
    return totals


def _merge_small(
    matrices: list[FlowMatrix], min_share: float
) -> list[FlowMatrix]:
    """Merge nodes below min_share of their layer total into an Other node.

    Merging relabels nodes and aggregates their ribbons, so every layer total
    is preserved exactly.
    """
    if min_share <= 0:
        return matrices
    layers = _layer_labels(matrices)
    totals = _node_totals(matrices, layers)
    relabel: list[dict[str, str]] = []
    for layer, layer_totals in zip(layers, totals):
        layer_sum = sum(layer_totals.values())
        mapping = {}
        for label in layer:
            small = layer_sum > 0 and layer_totals[label] / layer_sum < min_share
            mapping[label] = OTHER_LABEL if small else label
        relabel.append(mapping)

    merged: list[FlowMatrix] = []
    for i, matrix in enumerate(matrices):
        left_map, right_map = relabel[i], relabel[i + 1]
        left: list[str] = []
        right: list[str] = []
        for label in matrix.left_labels:
            mapped = left_map[label]
            if mapped != OTHER_LABEL and mapped not in left:
                left.append(mapped)
        for label in matrix.right_labels:
            mapped = right_map[label]
            if mapped != OTHER_LABEL and mapped not in right:
                right.append(mapped)
        if any(v == OTHER_LABEL for v in left_map.values()):
            left.append(OTHER_LABEL)
        if any(v == OTHER_LABEL for v in right_map.values()):
            right.append(OTHER_LABEL)
        li = {l: i_ for i_, l in enumerate(left)}
        ri = {l: j_ for j_, l in enumerate(right)}
        counts = [[0] * len(right) for _ in left]
        for r, row_label in enumerate(matrix.left_labels):
            for c, col_label in enumerate(matrix.right_labels):
                value = matrix.counts[r][c]
                if value:
                    counts[li[left_map[row_label]]][ri[right_map[col_label]]] += value
        merged.append(FlowMatrix.from_counts(left, right, counts))
    return merged


def _gap_links(
    matrices: Sequence[FlowMatrix],
) -> list[list[tuple[str, str, int]]]:
    """Non-zero (left, right, count) links for each layer gap."""
    out = []
    for matrix in matrices:
        links = [
            (l, r, matrix.counts[i][j])
            for i, l in enumerate(matrix.left_labels)
            for j, r in enumerate(matrix.right_labels)
            if matrix.counts[i][j] > 0
        ]
        out.append(links)
    return out


def _sorted_count_inversions(values: list[int]) -> tuple[list[int], int]:
    """Merge sort returning (sorted values, number of strict inversions)."""
    if len(values) < 2:
        return values, 0
    mid = len(values) // 2
    left, inv_l = _sorted_count_inversions(values[:mid])
    right, inv_r = _sorted_count_inversions(values[mid:])
    merged: list[int] = []
    inversions = inv_l + inv_r
    i = j = 0
    while i < len(left) and j < len(right):
        if left[i] <= right[j]:
            merged.append(left[i])
            i += 1
        else:
            inversions += len(left) - i
            merged.append(right[j])
            j += 1
    merged.extend(left[i:])
    merged.extend(right[j:])
    return merged, inversions


def _order_crossings(
    orders: Sequence[Sequence[str]],
    gap_links: Sequence[Sequence[tuple[str, str, int]]],
) -> int:
    """Count link crossings implied by per-layer node orders.

    Two links cross iff their source order and target order invert; links
    sharing an endpoint never cross.
    """
    crossings = 0
    for gap, links in enumerate(gap_links):
        left_pos = {label: p for p, label in enumerate(orders[gap])}
        right_pos = {label: p for p, label in enumerate(orders[gap + 1])}
        keyed = sorted((left_pos[l], right_pos[r]) for l, r, _ in links)
        _, inv = _sorted_count_inversions([t for _, t in keyed])
        crossings += inv
    return crossings


def _barycenter_pass(
    layer: list[str],
    fixed_pos: Mapping[str, int],
    neighbor_flows: Mapping[str, Sequence[tuple[str, int]]],
) -> None:
    bary: dict[str, float] = {}
    for idx, label in enumerate(layer):
        nbrs = neighbor_flows.get(label, ())
        weight = sum(c for _, c in nbrs)
        if weight:
            bary[label] = sum(fixed_pos[n] * c for n, c in nbrs) / weight
        else:
            bary[label] = float(idx)  # unconnected: hold position
    layer.sort(key=lambda label: (bary[label], label))


def _optimize_orders(
    layers: Sequence[Sequence[str]],
    gap_links: Sequence[Sequence[tuple[str, str, int]]],
) -> tuple[list[list[str]], int]:
    """Barycenter sweeps; returns the best ordering seen (never worse than initial)."""
    outgoing: list[dict[str, list[tuple[str, int]]]] = []
    incoming: list[dict[str, list[tuple[str, int]]]] = []
    for links in gap_links:
        out_map: dict[str, list[tuple[str, int]]] = {}
        in_map: dict[str, list[tuple[str, int]]] = {}
        for l, r, c in links:
            out_map.setdefault(l, []).append((r, c))
            in_map.setdefault(r, []).append((l, c))
        outgoing.append(out_map)
        incoming.append(in_map)

    current = [list(layer) for layer in layers]
    best = [list(layer) for layer in layers]
    best_crossings = _order_crossings(best, gap_links)
    for _ in range(_BARYCENTER_SWEEPS):
        for i in range(1, len(current)):  # left to right
            fixed = {label: p for p, label in enumerate(current[i - 1])}
            _barycenter_pass(current[i], fixed, incoming[i - 1])
        for i in range(len(current) - 2, -1, -1):  # right to left
            fixed = {label: p for p, label in enumerate(current[i + 1])}
            _barycenter_pass(current[i], fixed, outgoing[i])
        crossings = _order_crossings(current, gap_links)
        if crossings < best_crossings:
            best = [list(layer) for layer in current]
            best_crossings = crossings
        else:
            break
    return best, best_crossings


# --- public operations ------------------------------------------------------


def layout_sankey(flows, gap: float = 0.01, min_share: float = 0.005) -> SankeyLayout:
    """Compute normalized Sankey geometry for one matrix or a chained sequence.

    ``flows`` may be a FlowMatrix, a sequence of chained matrices, or any
    object with a ``matrices`` attribute (a LayeredFlow).  Nodes whose share
    of their layer total falls below ``min_share`` are merged into a
    synthetic "Other" node per layer (0 disables).  Node order within each
    layer comes from barycenter sweeps seeded with first-appearance order.
    """
    matrices = _as_matrices(flows)
    if any(m.total == 0 for m in matrices):
        raise EmptyFlow("flow matrix has zero total")
    matrices = _merge_small(matrices, min_share)
    layers = _layer_labels(matrices)
    gap_links = _gap_links(matrices)
    orders, crossings = _optimize_orders(layers, gap_links)
    totals = _node_totals(matrices, orders)

    # One global value->height scale keeps ribbon thickness consistent across
    # layers; the fullest layer spans the whole unit interval.
    layer_gaps: list[float] = []
    scale = float("inf")
    for order, layer_totals in zip(orders, totals):
        n = len(order)
        layer_gap = min(gap, 0.5 / (n - 1)) if n > 1 else 0.0
        layer_gaps.append(layer_gap)
        layer_sum = sum(layer_totals.values())
        if layer_sum > 0:
            scale = min(scale, (1.0 - layer_gap * (n - 1)) / layer_sum)

    color_index: dict[str, int] = {}
    nodes: list[SankeyNode] = []
    node_index: dict[tuple[int, str], int] = {}
    positions: list[dict[str, int]] = []
    for layer, (order, layer_totals) in enumerate(zip(orders, totals)):
        heights = [layer_totals[label] * scale for label in order]
        used = sum(heights) + layer_gaps[layer] * (len(order) - 1)
        y = (1.0 - used) / 2.0
        pos: dict[str, int] = {}
        for label, height in zip(order, heights):
            pos[label] = len(pos)
            if label not in color_index:
                color_index[label] = len(color_index)
            node_index[(layer, label)] = len(nodes)
            nodes.append(
                SankeyNode(
                    label=label,
                    layer=layer,
                    y_top=y,
                    height=height,
                    color_index=color_index[label],
                )
            )
            y += height + layer_gaps[layer]
        positions.append(pos)

    links: list[SankeyLink] = []
    for gap_i, gap_link in enumerate(gap_links):
        left_pos = positions[gap_i]
        right_pos = positions[gap_i + 1]
        ordered = sorted(gap_link, key=lambda t: (left_pos[t[0]], right_pos[t[1]]))
        # pack outgoing ribbons top-down in target order, incoming in source order
        src_cursor: dict[str, float] = {}
        tgt_cursor: dict[str, float] = {}
        by_target = sorted(ordered, key=lambda t: (right_pos[t[1]], left_pos[t[0]]))
        tgt_offsets = {}
        for l, r, c in by_target:
            tgt_offsets[(l, r)] = tgt_cursor.get(r, 0.0)
            tgt_cursor[r] = tgt_offsets[(l, r)] + c * scale
        for l, r, c in ordered:
            source_offset = src_cursor.get(l, 0.0)
            src_cursor[l] = source_offset + c * scale
            links.append(
                SankeyLink(
                    source=node_index[(gap_i, l)],
                    target=node_index[(gap_i + 1, r)],
                    thickness=c * scale,
                    source_offset=source_offset,
                    target_offset=tgt_offsets[(l, r)],
                )
            )

    return SankeyLayout(
        nodes=tuple(nodes),
        links=tuple(links),
        layer_count=len(orders),
        crossings=crossings,
    )


def count_crossings(layout: SankeyLayout) -> int:
    """Number of link pairs within a layer gap whose endpoint orders invert."""
    layer_order: dict[int, list[int]] = {}
    for idx, node in enumerate(layout.nodes):
        layer_order.setdefault(node.layer, []).append(idx)
    pos = {}
    for layer, indices in layer_order.items():
        indices.sort(key=lambda i: layout.nodes[i].y_top)
        for p, i in enumerate(indices):
            pos[i] = p
    by_gap: dict[int, list[tuple[int, int]]] = {}
    for link in layout.links:
        gap = layout.nodes[link.source].layer
        by_gap.setdefault(gap, []).append((pos[link.source], pos[link.target]))
    crossings = 0
    for pairs in by_gap.values():
        pairs.sort()
        _, inv = _sorted_count_inversions([t for _, t in pairs])
        crossings += inv
    return crossings


def layout_radial(
    taxonomy: Sequence[TaxonomyNode],
    weights: Mapping[str, float] | None = None,
) -> RadialLayout:
    """Place a taxonomy on concentric rings.

    Radius is proportional to level; each node's angular sector is carved out
    of its parent's sector proportionally to its leaf count, in taxonomy
    document order, and the node sits at the start of its sector.
    """
    children: dict[str, list[str]] = {n.id: [] for n in taxonomy}
    roots = []
    for n in taxonomy:
        if n.parent_id is None:
            roots.append(n.id)
        else:
            children[n.parent_id].append(n.id)
    if len(roots) != 1:
        raise ValueError("taxonomy must have exactly one root")
    levels = {n.id: n.level for n in taxonomy}
    max_level = max(levels.values())

    leaf_counts: dict[str, int] = {}

    def count_leaves(node_id: str) -> int:
        kids = children[node_id]
        total = 1 if not kids else sum(count_leaves(k) for k in kids)
        leaf_counts[node_id] = total
        return total

    count_leaves(roots[0])

    two_pi = 2.0 * 3.141592653589793
    placements: dict[str, tuple[float, float]] = {}
    sectors: dict[str, tuple[float, float]] = {}

    def place(node_id: str, start: float, extent: float) -> None:
        radius = levels[node_id] / max_level if max_level else 0.0
        placements[node_id] = (radius, start)
        sectors[node_id] = (start, extent)
        cursor = start
        for kid in children[node_id]:
            kid_extent = extent * leaf_counts[kid] / leaf_counts[node_id]
            place(kid, cursor, kid_extent)
            cursor += kid_extent

    place(roots[0], 0.0, two_pi)
    edges = tuple((n.parent_id, n.id) for n in taxonomy if n.parent_id is not None)
    return RadialLayout(
        placements=placements,
        sectors=sectors,
        edges=edges,
        weights=dict(weights) if weights is not None else None,
    )


def layout_violin(summary, width: float) -> list[tuple[float, float]]:
    """Mirrored density polygon for a violin summary.

    Returns closed outline points as (half-width offset, grid value) pairs:
    up the left side, back down the right.  Peak density maps to width/2.
    """
    peak = max(summary.density)
    if peak <= 0:
        raise ValueError("violin density must have a positive peak")
    half = [0.5 * width * d / peak for d in summary.density]
    left = [(-w, g) for w, g in zip(half, summary.grid)]
    right = [(w, g) for w, g in reversed(list(zip(half, summary.grid)))]
    return left + right
