from __future__ import annotations

import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from flowlens.errors import InsufficientData
from flowlens.evaluation import (
    DiagnosticKind,
    TrendKind,
    accuracy_report,
    accuracy_series,
    audit_snapshot,
    diagnose,
    misclassification_flow,
    model_diff,
    trend,
)
from flowlens.ingest import build_snapshot

from conftest import make_instance, make_run, make_taxonomy


def random_run(rng, model_id="M", ordinal=0, n=200, categories=None, items=None):
    categories = categories or [f"c{i}" for i in range(8)]
    items = items or [f"it{i}" for i in range(n)]
    rows = [
        (item, rng.choice(categories), rng.choice(categories)) for item in items
    ]
    return make_run(model_id, ordinal, rows)


class TestAccuracyReport:
    def test_table_shaped_rows(self):
        rows = [(f"i{k}", "pop_lounge", "pop_lounge") for k in range(23)]
        rows += [(f"e{k}", "pop_lounge", "pop_easy") for k in range(2)]
        report = accuracy_report(make_run("M0", 0, rows))
        (row,) = [r for r in report if r.category == "pop_lounge"]
        assert row.sample_size == 25
        assert row.accuracy == pytest.approx(0.92)

    def test_perfect_model(self):
        run = make_run("M0", 0, [(f"i{k}", "a", "a") for k in range(9)])
        assert all(r.accuracy == 1.0 for r in accuracy_report(run))

    def test_random_fixture_matches_naive_grouping(self):
        rng = random.Random(2)
        run = random_run(rng)
        report = {r.category: r for r in accuracy_report(run)}
        # oracle: group and count with plain loops
        for category in {rec.true_label for rec in run.records}:
            group = [rec for rec in run.records if rec.true_label == category]
            correct = sum(1 for rec in group if rec.predicted_label == category)
            assert report[category].sample_size == len(group)
            assert report[category].accuracy == correct / len(group)

    def test_rows_sorted_and_sizes_sum(self):
        rng = random.Random(3)
        run = random_run(rng, n=150)
        report = accuracy_report(run)
        assert [r.category for r in report] == sorted(r.category for r in report)
        assert sum(r.sample_size for r in report) == run.size

    def test_empty_run(self):
        with pytest.raises(InsufficientData):
            accuracy_report(make_run("M0", 0, []))


class TestMisclassificationFlow:
    def test_report_rows_become_flows(self):
        run = make_run(
            "M0",
            0,
            [
                ("A1", "workwear", "sleepwear"),
                ("B23", "workwear", "mens_jumpsuit"),
                ("C98", "movie", "tv_show"),
            ],
        )
        m = misclassification_flow(run)
        assert m.flow("workwear", "sleepwear") == 1
        assert m.flow("workwear", "mens_jumpsuit") == 1
        assert m.flow("movie", "tv_show") == 1
        assert m.total == 3

    def test_perfect_run_is_empty(self):
        run = make_run("M0", 0, [("i", "a", "a")])
        assert misclassification_flow(run).total == 0

    def test_random_records_match_bruteforce(self):
        rng = random.Random(4)
        run = random_run(rng, n=500)
        m = misclassification_flow(run)
        errors = [
            (rec.true_label, rec.predicted_label)
            for rec in run.records
            if rec.true_label != rec.predicted_label
        ]
        assert m.total == len(errors)
        for t, p in set(errors):
            assert m.flow(t, p) == errors.count((t, p))

    def test_error_total_identity(self):
        rng = random.Random(5)
        run = random_run(rng, n=321)
        correct = sum(1 for r in run.records if r.true_label == r.predicted_label)
        assert misclassification_flow(run).total == run.size - correct


def diagnostics_taxonomy():
    return make_taxonomy(
        {
            "root": None,
            "clothing": "root",
            "home": "root",
            "electronics": "root",
            "knit_tops": "clothing",
            "dresses": "clothing",
            "blouses": "clothing",
            "sweaters": "clothing",
            "tees": "clothing",
            "sleepwear": "clothing",
            "wall_decor": "home",
            "art_wall_decor": "home",
            "notebook_batteries": "electronics",
            "notebook_cases": "electronics",
        }
    )


def injected_run():
    """One bidirectional pair, one broad category (fan-in 4), one distant flow."""
    rows = []

    def flood(true, pred, n, tag):
        for i in range(n):
            rows.append((f"{tag}{i}", true, pred))

    flood("wall_decor", "art_wall_decor", 20, "a")
    flood("art_wall_decor", "wall_decor", 15, "b")
    flood("dresses", "knit_tops", 6, "c")
    flood("blouses", "knit_tops", 5, "d")
    flood("sweaters", "knit_tops", 7, "e")
    flood("tees", "knit_tops", 5, "f")
    flood("notebook_batteries", "sleepwear", 8, "g")
    # correct records and sub-threshold noise
    flood("wall_decor", "wall_decor", 30, "h")
    flood("art_wall_decor", "art_wall_decor", 25, "i")
    flood("dresses", "dresses", 20, "j")
    flood("blouses", "blouses", 18, "k")
    flood("sweaters", "sweaters", 16, "l")
    flood("tees", "tees", 14, "m")
    flood("knit_tops", "knit_tops", 22, "n")
    flood("notebook_batteries", "notebook_batteries", 12, "o")
    flood("notebook_cases", "notebook_cases", 9, "p")
    flood("knit_tops", "dresses", 3, "q")  # below min_flow
    flood("notebook_cases", "tees", 2, "r")  # distant but below min_flow
    return make_run("M0", 0, rows)


class TestDiagnose:
    def test_recovers_exactly_the_injected_findings(self):
        taxonomy = diagnostics_taxonomy()
        snapshot = build_snapshot(taxonomy, [], {}, [])
        findings = diagnose(injected_run(), snapshot)
        kinds = {(f.kind, tuple(sorted(f.subjects))) for f in findings}
        assert kinds == {
            (DiagnosticKind.BIDIRECTIONAL_CONFUSION, ("art_wall_decor", "wall_decor")),
            (DiagnosticKind.BROAD_CATEGORY, ("knit_tops",)),
            (DiagnosticKind.WRONG_LABEL_SUSPECT, ("notebook_batteries", "sleepwear")),
        }

    def test_bidirectional_evidence_counts(self):
        snapshot = build_snapshot(diagnostics_taxonomy(), [], {}, [])
        findings = diagnose(injected_run(), snapshot)
        (bidi,) = [f for f in findings if f.kind == DiagnosticKind.BIDIRECTIONAL_CONFUSION]
        assert bidi.evidence["flows"] == {
            "art_wall_decor->wall_decor": 15,
            "wall_decor->art_wall_decor": 20,
        }

    def test_broad_category_fanin_threshold(self):
        snapshot = build_snapshot(diagnostics_taxonomy(), [], {}, [])
        findings = diagnose(injected_run(), snapshot, broad_fanin=5)
        assert not any(f.kind == DiagnosticKind.BROAD_CATEGORY for f in findings)

    def test_perfect_run_yields_nothing(self):
        snapshot = build_snapshot(diagnostics_taxonomy(), [], {}, [])
        run = make_run("M0", 0, [("i", "tees", "tees")])
        assert diagnose(run, snapshot) == []

    def test_monotone_in_min_flow(self):
        snapshot = build_snapshot(diagnostics_taxonomy(), [], {}, [])
        run = injected_run()
        previous = None
        for min_flow in (2, 5, 8, 12, 21):
            found = {
                (f.kind, tuple(sorted(f.subjects)))
                for f in diagnose(run, snapshot, min_flow=min_flow)
            }
            if previous is not None:
                assert found <= previous
            previous = found

    def test_sorted_by_severity(self):
        snapshot = build_snapshot(diagnostics_taxonomy(), [], {}, [])
        severities = [f.severity for f in diagnose(injected_run(), snapshot)]
        assert severities == sorted(severities, reverse=True)
        assert all(0.0 <= s <= 1.0 for s in severities)


class TestModelDiff:
    def test_identical_runs_are_diagonal(self):
        rng = random.Random(6)
        run0 = random_run(rng, "M0", 0)
        run1 = make_run("M1", 1, [(r.item_id, r.true_label, r.predicted_label) for r in run0.records])
        flow = model_diff([run0, run1])
        (matrix,) = flow.matrices
        for i, l in enumerate(matrix.left_labels):
            for j, r in enumerate(matrix.right_labels):
                if matrix.counts[i][j]:
                    assert l == r

    def test_split_and_coarsen_flows(self):
        rows0 = [(f"k{i}", "knit_tops", "knit_tops") for i in range(9)]
        rows1 = (
            [(f"k{i}", "knit_tops", "dresses") for i in range(3)]
            + [(f"k{i}", "knit_tops", "blouses") for i in range(3, 6)]
            + [(f"k{i}", "knit_tops", "tees") for i in range(6, 9)]
        )
        flow = model_diff([make_run("M0", 0, rows0), make_run("M1", 1, rows1)])
        (matrix,) = flow.matrices
        i = matrix.left_labels.index("knit_tops")
        assert sorted(matrix.counts[i]) == [3, 3, 3]
        assert len(matrix.right_labels) == 3

    def test_intersection_of_items(self):
        run0 = make_run("M0", 0, [("a", "x", "x"), ("b", "x", "y")])
        run1 = make_run("M1", 1, [("b", "x", "x"), ("c", "x", "y")])
        flow = model_diff([run0, run1])
        assert flow.item_paths == {"b": ("y", "x")}

    def test_disjoint_items_raise(self):
        run0 = make_run("M0", 0, [("a", "x", "x")])
        run1 = make_run("M1", 1, [("b", "x", "x")])
        with pytest.raises(InsufficientData):
            model_diff([run0, run1])

    def test_chaining_invariant(self):
        rng = random.Random(7)
        items = [f"it{i}" for i in range(120)]
        runs = [random_run(rng, f"M{k}", k, items=items) for k in range(3)]
        flow = model_diff(runs)
        assert len(flow.matrices) == len(flow.layers) - 1
        for left, right in zip(flow.matrices, flow.matrices[1:]):
            assert left.right_marginal.elements == right.left_marginal.elements


class TestTrend:
    def test_five_cases(self):
        result = {
            t.category: t
            for t in trend(
                {
                    "up": [0.5, 0.6, 0.7],
                    "down": [0.90, 0.82, 0.71],
                    "flat": [0.8, 0.8, 0.8],
                    "endpoint_up": [0.70, 0.65, 0.72],
                    "endpoint_down": [0.70, 0.75, 0.62],
                }
            )
        }
        assert result["up"].kind == TrendKind.STRICTLY_INCREASING
        assert result["up"].color_key == "blue"
        assert result["down"].kind == TrendKind.STRICTLY_DECREASING
        assert result["down"].color_key == "red"
        assert result["flat"].kind == TrendKind.STABLE
        assert result["flat"].color_key == "light_blue"
        assert result["endpoint_up"].kind == TrendKind.OVERALL_INCREASING
        assert result["endpoint_up"].color_key == "light_blue"
        assert result["endpoint_down"].kind == TrendKind.OVERALL_DECREASING
        assert result["endpoint_down"].color_key == "orange"

    @given(
        st.lists(st.floats(min_value=0.0, max_value=1.0), min_size=2, max_size=6),
        st.floats(min_value=-0.5, max_value=0.5),
    )
    @settings(max_examples=100, deadline=None)
    def test_constant_shift_invariance(self, series, shift):
        base = trend({"c": series})[0]
        shifted = trend({"c": [v + shift for v in series]})[0]
        assert base.kind == shifted.kind

    def test_short_series(self):
        with pytest.raises(InsufficientData):
            trend({"c": [0.5]})

    def test_accuracy_series_intersects_categories(self):
        run0 = make_run("M0", 0, [("a", "x", "x"), ("b", "y", "y")])
        run1 = make_run("M1", 1, [("a", "x", "x")])
        series = accuracy_series([run0, run1])
        assert set(series) == {"x"}


class TestAuditSnapshot:
    def test_imbalance_and_low_trust_and_regression(self):
        taxonomy = make_taxonomy(
            {"root": None, "a": "root", "b": "root", "c": "root"}
        )
        instances = [make_instance("a", item_id=f"a{i}") for i in range(40)]
        instances += [make_instance("b", item_id=f"b{i}") for i in range(40)]
        instances += [
            make_instance("c", source="rule", item_id=f"c{i}") for i in range(2)
        ]
        runs = [
            make_run("M0", 0, [(f"e{i}", "a", "a") for i in range(10)]),
            make_run(
                "M1",
                1,
                [(f"e{i}", "a", "a" if i < 5 else "b") for i in range(10)],
            ),
        ]
        snapshot = build_snapshot(taxonomy, instances, {}, runs)
        findings = audit_snapshot(snapshot)
        kinds = {f.kind for f in findings}
        assert DiagnosticKind.LABEL_IMBALANCE in kinds
        assert DiagnosticKind.LOW_TRUST_LABELS in kinds
        assert DiagnosticKind.ACCURACY_REGRESSION in kinds
