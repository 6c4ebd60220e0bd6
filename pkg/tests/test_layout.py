from __future__ import annotations

import itertools
import math
import random

import pytest

from flowlens.distributions import FlowMatrix, flow_matrix
from flowlens.errors import EmptyFlow
from flowlens.features import ViolinSummary
from flowlens.layout import (
    OTHER_LABEL,
    count_crossings,
    layout_radial,
    layout_sankey,
    layout_violin,
)

from conftest import make_taxonomy


def brute_force_crossings(layout):
    """O(n^2) oracle: enumerate link pairs and count order inversions."""
    order_in_layer = {}
    per_layer = {}
    for idx, node in enumerate(layout.nodes):
        per_layer.setdefault(node.layer, []).append(idx)
    for layer, idxs in per_layer.items():
        idxs.sort(key=lambda i: layout.nodes[i].y_top)
        for pos, i in enumerate(idxs):
            order_in_layer[i] = pos
    crossings = 0
    for l1, l2 in itertools.combinations(layout.links, 2):
        if layout.nodes[l1.source].layer != layout.nodes[l2.source].layer:
            continue
        ds = order_in_layer[l1.source] - order_in_layer[l2.source]
        dt = order_in_layer[l1.target] - order_in_layer[l2.target]
        if ds * dt < 0:
            crossings += 1
    return crossings


def initial_order_crossings(matrix):
    """Crossings of the untouched first-appearance order (test-side oracle)."""
    left_pos = {l: i for i, l in enumerate(matrix.left_labels)}
    right_pos = {r: j for j, r in enumerate(matrix.right_labels)}
    links = [
        (left_pos[l], right_pos[r])
        for i, l in enumerate(matrix.left_labels)
        for j, r in enumerate(matrix.right_labels)
        if matrix.counts[i][j] > 0
    ]
    return sum(
        1
        for (s1, t1), (s2, t2) in itertools.combinations(links, 2)
        if (s1 - s2) * (t1 - t2) < 0
    )


def random_matrix(rng, max_side=6, density=0.5, max_count=40):
    n_left = rng.randint(2, max_side)
    n_right = rng.randint(2, max_side)
    counts = [
        [rng.randint(1, max_count) if rng.random() < density else 0 for _ in range(n_right)]
        for _ in range(n_left)
    ]
    if sum(sum(r) for r in counts) == 0:
        counts[0][0] = 1
    left = [f"L{i}" for i in range(n_left)]
    right = [f"R{j}" for j in range(n_right)]
    return FlowMatrix.from_counts(left, right, counts)


class TestLayoutSankey:
    def test_diagonal_has_no_crossings(self):
        m = FlowMatrix.from_counts(["a", "b"], ["x", "y"], [[5, 0], [0, 5]])
        layout = layout_sankey(m)
        assert layout.crossings == 0
        assert count_crossings(layout) == 0

    def test_antidiagonal_reaches_enumerated_optimum(self):
        m = FlowMatrix.from_counts(["a", "b"], ["x", "y"], [[0, 5], [5, 0]])
        assert initial_order_crossings(m) == 1
        layout = layout_sankey(m)
        # oracle: enumerate all 2x2 orderings; the optimum is 0 crossings
        assert layout.crossings == 0

    def test_node_heights_proportional_to_counts(self):
        m = FlowMatrix.from_counts(
            ["parent"], ["a", "b", "c"], [[60, 30, 10]]
        )
        layout = layout_sankey(m, gap=0.01, min_share=0.0)
        heights = {
            n.label: n.height for n in layout.nodes if n.layer == 1
        }
        assert heights["a"] / heights["b"] == pytest.approx(2.0, abs=1e-9)
        assert heights["b"] / heights["c"] == pytest.approx(3.0, abs=1e-9)
        usable = 1.0 - 2 * 0.01
        assert heights["a"] == pytest.approx(0.6 * usable, abs=1e-9)

    def test_deterministic_output(self):
        rng = random.Random(13)
        m = random_matrix(rng)
        assert layout_sankey(m) == layout_sankey(m)

    def test_barycenter_never_worse_than_initial(self):
        rng = random.Random(14)
        for _ in range(60):
            m = random_matrix(rng)
            layout = layout_sankey(m, min_share=0.0)
            assert layout.crossings <= initial_order_crossings(m)

    def test_crossings_field_matches_count(self):
        rng = random.Random(15)
        for _ in range(30):
            layout = layout_sankey(random_matrix(rng), min_share=0.0)
            assert layout.crossings == count_crossings(layout)

    def test_count_crossings_matches_bruteforce(self):
        rng = random.Random(16)
        for _ in range(30):
            layout = layout_sankey(random_matrix(rng, max_side=5), min_share=0.0)
            assert count_crossings(layout) == brute_force_crossings(layout)

    def test_coordinates_in_unit_square(self):
        rng = random.Random(17)
        for _ in range(20):
            layout = layout_sankey(random_matrix(rng))
            for node in layout.nodes:
                assert -1e-12 <= node.y_top <= 1.0 + 1e-12
                assert node.y_top + node.height <= 1.0 + 1e-9

    def test_no_same_layer_overlap(self):
        rng = random.Random(18)
        layout = layout_sankey(random_matrix(rng), min_share=0.0)
        per_layer = {}
        for node in layout.nodes:
            per_layer.setdefault(node.layer, []).append(node)
        for nodes in per_layer.values():
            nodes.sort(key=lambda n: n.y_top)
            for a, b in zip(nodes, nodes[1:]):
                assert a.y_top + a.height <= b.y_top + 1e-12

    def test_links_pack_contiguously(self):
        rng = random.Random(19)
        layout = layout_sankey(random_matrix(rng, density=0.9), min_share=0.0)
        outgoing = {}
        for link in layout.links:
            outgoing.setdefault(link.source, []).append(link)
        for source, links in outgoing.items():
            links.sort(key=lambda l: l.source_offset)
            cursor = 0.0
            for link in links:
                assert link.source_offset == pytest.approx(cursor, abs=1e-12)
                cursor += link.thickness
            assert cursor <= layout.nodes[source].height + 1e-9

    def test_other_merge_preserves_layer_totals(self):
        m = FlowMatrix.from_counts(
            ["big", "small"],
            ["x", "tiny", "y"],
            [[500, 2, 480], [1, 1, 1]],
        )
        merged = layout_sankey(m, min_share=0.02)
        unmerged = layout_sankey(m, min_share=0.0)
        for layer in (0, 1):
            merged_total = sum(n.height for n in merged.nodes if n.layer == layer)
            unmerged_total = sum(n.height for n in unmerged.nodes if n.layer == layer)
            assert merged_total == pytest.approx(unmerged_total, abs=1e-9)
        labels = {n.label for n in merged.nodes}
        assert OTHER_LABEL in labels
        assert "tiny" not in labels and "small" not in labels

    def test_min_share_zero_disables_merge(self):
        m = FlowMatrix.from_counts(["a"], ["x", "tiny"], [[1000, 1]])
        layout = layout_sankey(m, min_share=0.0)
        assert {n.label for n in layout.nodes} == {"a", "x", "tiny"}

    def test_layered_chain_layout(self):
        m0 = flow_matrix([("a", "u")] * 10 + [("b", "v")] * 5)
        m1 = flow_matrix([("u", "p")] * 10 + [("v", "q")] * 5)
        layout = layout_sankey([m0, m1], min_share=0.0)
        assert layout.layer_count == 3
        layers = {n.label: n.layer for n in layout.nodes}
        assert layers["a"] == 0 and layers["u"] == 1 and layers["p"] == 2

    def test_same_label_shares_color_across_layers(self):
        m0 = flow_matrix([("a", "a")] * 3 + [("a", "b")] * 2)
        layout = layout_sankey(m0, min_share=0.0)
        colors = {}
        for node in layout.nodes:
            colors.setdefault(node.label, set()).add(node.color_index)
        assert all(len(v) == 1 for v in colors.values())

    def test_empty_flow_raises(self):
        with pytest.raises(EmptyFlow):
            layout_sankey(FlowMatrix.from_counts(["a"], ["x"], [[0]]))
        with pytest.raises(EmptyFlow):
            layout_sankey(flow_matrix([]))

    def test_many_nodes_stay_in_bounds(self):
        # layer gap must shrink when nodes outnumber the gap budget
        n = 300
        m = FlowMatrix.from_counts(
            ["src"], [f"t{i}" for i in range(n)], [[1] * n]
        )
        layout = layout_sankey(m, min_share=0.0)
        for node in layout.nodes:
            assert 0.0 - 1e-9 <= node.y_top <= 1.0 + 1e-9


class TestLayoutRadial:
    def test_four_equal_children_quarter_angles(self):
        taxonomy = make_taxonomy(
            {"root": None, "a": "root", "b": "root", "c": "root", "d": "root"}
        )
        layout = layout_radial(taxonomy)
        angles = [layout.placements[k][1] for k in ("a", "b", "c", "d")]
        expected = [0.0, math.pi / 2, math.pi, 3 * math.pi / 2]
        assert angles == pytest.approx(expected, abs=1e-12)

    def test_chain_tree_is_one_ray(self):
        taxonomy = make_taxonomy({"root": None, "a": "root", "b": "a", "c": "b"})
        layout = layout_radial(taxonomy)
        radii = [layout.placements[k][0] for k in ("root", "a", "b", "c")]
        assert radii == pytest.approx([0.0, 1 / 3, 2 / 3, 1.0])
        assert {layout.placements[k][1] for k in ("root", "a", "b", "c")} == {0.0}

    def test_random_tree_sector_partition(self):
        rng = random.Random(20)
        edges: dict[str, str | None] = {"root": None}
        for i in range(49):
            edges[f"n{i}"] = rng.choice(list(edges))
        taxonomy = make_taxonomy(edges)
        layout = layout_radial(taxonomy)
        children: dict[str, list[str]] = {}
        for node, parent in edges.items():
            if parent is not None:
                children.setdefault(parent, []).append(node)
        # oracle: recursive span check; child sectors tile the parent sector
        for parent, kids in children.items():
            start, extent = layout.sectors[parent]
            spans = sorted(layout.sectors[k] for k in kids)
            assert spans[0][0] == pytest.approx(start, abs=1e-9)
            cursor = start
            for s, e in spans:
                assert s == pytest.approx(cursor, abs=1e-9)
                cursor += e
            assert cursor == pytest.approx(start + extent, abs=1e-9)

    def test_angles_in_range(self):
        rng = random.Random(22)
        edges: dict[str, str | None] = {"root": None}
        for i in range(30):
            edges[f"n{i}"] = rng.choice(list(edges))
        layout = layout_radial(make_taxonomy(edges))
        for radius, angle in layout.placements.values():
            assert 0.0 <= angle < 2 * math.pi + 1e-12
            assert 0.0 <= radius <= 1.0


class TestLayoutViolin:
    def make_summary(self, density, grid=None):
        grid = grid or [float(i) for i in range(len(density))]
        return ViolinSummary(
            category="c",
            grid=tuple(grid),
            density=tuple(density),
            quartiles=(1.0, 2.0, 3.0),
            n=10,
        )

    def test_peak_maps_to_half_width(self):
        summary = self.make_summary([0.1, 0.8, 0.1])
        outline = layout_violin(summary, width=2.0)
        max_offset = max(x for x, _ in outline)
        assert max_offset == pytest.approx(1.0)

    def test_uniform_density_is_rectangle(self):
        summary = self.make_summary([0.5, 0.5, 0.5, 0.5])
        outline = layout_violin(summary, width=1.0)
        assert all(abs(x) == pytest.approx(0.5) for x, _ in outline)

    def test_bimodal_outline_bulges(self):
        density = [0.1, 0.9, 0.1, 0.85, 0.1]
        summary = self.make_summary(density)
        outline = layout_violin(summary, width=2.0)
        widths = [x for x, _ in outline[len(density):]]  # right side, reversed
        # oracle: widths proportional to the density array
        peak = max(density)
        expected = [d / peak for d in reversed(density)]
        assert widths == pytest.approx(expected)

    def test_outline_is_closed_mirror(self):
        summary = self.make_summary([0.2, 0.6, 0.3])
        outline = layout_violin(summary, width=1.0)
        assert len(outline) == 6
        left = outline[:3]
        right = outline[3:]
        for (lx, ly), (rx, ry) in zip(left, reversed(right)):
            assert lx == -rx and ly == ry
