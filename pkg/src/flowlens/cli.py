"""Command-line interface: ingest snapshots, run analyses headlessly, export
SVG renderings, and serve the HTTP API.

Exit codes: 0 success, 1 input/usage error, 2 internal error.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

from . import evaluation, serialize
from .errors import FlowlensError, MalformedRecord, UnknownRun
from .ingest import (
    DEFAULT_SOURCE_TRUST,
    build_snapshot,
    load_snapshot,
    parse_features,
    parse_labels,
    parse_runs,
    parse_taxonomy,
    save_snapshot,
)
from .layout import layout_sankey
from .svg import render_svg

ENV_SNAPSHOT = "FLOWLENS_SNAPSHOT"
ENV_BIND = "FLOWLENS_BIND"

REPORT_KINDS = (
    "accuracy",
    "misclassification",
    "diagnose",
    "quantity",
    "quality",
    "multilevel",
    "importance",
    "welch",
    "violin",
    "trend",
    "model-diff",
    "all",
)


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="flowlens",
        description="Flow-based diagnostics for hierarchical classification pipelines.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    ingest = sub.add_parser("ingest", help="validate inputs and write a snapshot bundle")
    ingest.add_argument("--taxonomy", required=True, help="taxonomy JSONL file")
    ingest.add_argument("--labels", required=True, help="label JSONL file")
    ingest.add_argument("--features", help="feature JSONL file")
    ingest.add_argument("--evaluation", help="evaluation JSONL file (may hold several runs)")
    ingest.add_argument("--trust", help="JSON file mapping source -> trust rank")
    ingest.add_argument(
        "--allow-inner-labels",
        action="store_true",
        help="accept labels on inner taxonomy nodes",
    )
    ingest.add_argument("--out", required=True, help="snapshot bundle to write")

    report = sub.add_parser("report", help="run one analysis and emit JSON")
    report.add_argument("--snapshot", default=os.environ.get(ENV_SNAPSHOT))
    report.add_argument("--kind", required=True, choices=REPORT_KINDS)
    report.add_argument("--run", help="model id (accuracy/misclassification/diagnose)")
    report.add_argument("--runs", help="comma-separated model ids (trend/model-diff)")
    report.add_argument("--node", help="taxonomy node (quantity/quality/multilevel)")
    report.add_argument("--feature", help="feature name (importance/welch/violin)")
    report.add_argument("--category", help="category node (violin)")
    report.add_argument("--a", dest="class_a", help="first class (welch)")
    report.add_argument("--b", dest="class_b", help="second class (welch)")
    report.add_argument("--beta", type=float, default=0.5)
    report.add_argument("--trust", type=float, default=0.5, dest="trust_threshold")
    report.add_argument("--depth", type=int, default=2)
    report.add_argument("--grid", type=int, default=64)
    report.add_argument("--min-flow", type=int, default=5)
    report.add_argument("--fanin", type=int, default=3)
    report.add_argument("--epsilon", type=float, default=0.005)
    report.add_argument("--min-share", type=float, default=0.005)
    report.add_argument("--out", help="write JSON here instead of stdout")
    report.add_argument("--pretty", action="store_true")
    report.add_argument(
        "--jsonl",
        action="store_true",
        help="emit line-delimited records (accuracy/misclassification only)",
    )

    export = sub.add_parser("export-svg", help="render a layout JSON file to SVG")
    export.add_argument("--in", dest="infile", required=True)
    export.add_argument("--out", required=True)
    export.add_argument("--width", type=float, default=None)
    export.add_argument("--height", type=float, default=None)

    serve = sub.add_parser("serve", help="serve the HTTP/JSON API")
    serve.add_argument("--snapshot", default=os.environ.get(ENV_SNAPSHOT))
    serve.add_argument("--bind", default=os.environ.get(ENV_BIND, "127.0.0.1:8000"))
    serve.add_argument("--static", help="directory with the web UI build")

    return parser


def _cmd_ingest(args) -> int:
    trust = dict(DEFAULT_SOURCE_TRUST)
    if args.trust:
        with open(args.trust, "r", encoding="utf-8") as fh:
            trust = {str(k): int(v) for k, v in json.load(fh).items()}
    with open(args.taxonomy, "r", encoding="utf-8") as fh:
        taxonomy = parse_taxonomy(fh)
    with open(args.labels, "r", encoding="utf-8") as fh:
        instances = parse_labels(
            fh, taxonomy, source_trust=trust, allow_inner_labels=args.allow_inner_labels
        )
    features = {}
    if args.features:
        with open(args.features, "r", encoding="utf-8") as fh:
            features = parse_features(fh)
    runs = []
    if args.evaluation:
        with open(args.evaluation, "r", encoding="utf-8") as fh:
            runs = parse_runs(fh, taxonomy)
    snapshot = build_snapshot(taxonomy, instances, features, runs, source_trust=trust)
    save_snapshot(snapshot, args.out)
    stats = snapshot.stats()
    print(
        f"wrote {args.out}: {stats['nodes']} nodes, {stats['instances']} instances, "
        f"{stats['features']} features, {len(stats['runs'])} runs"
    )
    return 0


def _require_arg(value, flag: str):
    if value is None:
        raise FlowlensError(f"missing required flag {flag}")
    return value


def _csv(value: str | None) -> list[str] | None:
    if not value:
        return None
    return [p.strip() for p in value.split(",") if p.strip()]


def _cmd_report(args) -> int:
    snapshot_path = _require_arg(args.snapshot, "--snapshot (or $FLOWLENS_SNAPSHOT)")
    snapshot = load_snapshot(snapshot_path)
    kind = args.kind
    if args.jsonl:
        if kind not in ("accuracy", "misclassification"):
            raise FlowlensError("--jsonl applies to accuracy and misclassification only")
        run_id = _require_arg(args.run, "--run")
        if run_id not in snapshot.runs_by_id:
            raise UnknownRun(f"unknown run {run_id!r}")
        run = snapshot.runs_by_id[run_id]
        lines = (
            evaluation.accuracy_report_lines(run)
            if kind == "accuracy"
            else evaluation.misclassification_lines(run)
        )
        text = "\n".join(lines)
        if args.out:
            Path(args.out).write_text(text + "\n", encoding="utf-8")
        else:
            print(text)
        return 0
    if kind == "accuracy":
        payload = serialize.accuracy_payload(snapshot, _require_arg(args.run, "--run"))
    elif kind == "misclassification":
        payload = serialize.misclassification_payload(
            snapshot, _require_arg(args.run, "--run")
        )
    elif kind == "diagnose":
        payload = serialize.diagnose_payload(
            snapshot,
            _require_arg(args.run, "--run"),
            min_flow=args.min_flow,
            broad_fanin=args.fanin,
        )
    elif kind == "quantity":
        payload = serialize.quantity_payload(
            snapshot, _require_arg(args.node, "--node"), beta=args.beta
        )
    elif kind == "quality":
        payload = serialize.quality_payload(
            snapshot, _require_arg(args.node, "--node"), trust=args.trust_threshold
        )
    elif kind == "multilevel":
        payload = serialize.multilevel_payload(
            snapshot, _require_arg(args.node, "--node"), depth=args.depth
        )
    elif kind == "importance":
        payload = serialize.importance_payload(snapshot, args.feature)
    elif kind == "welch":
        payload = serialize.welch_payload(
            snapshot,
            _require_arg(args.feature, "--feature"),
            _require_arg(args.class_a, "--a"),
            _require_arg(args.class_b, "--b"),
        )
    elif kind == "violin":
        payload = serialize.violin_payload(
            snapshot,
            _require_arg(args.feature, "--feature"),
            _require_arg(args.category, "--category"),
            grid_points=args.grid,
        )
    elif kind == "trend":
        payload = serialize.trends_payload(snapshot, _csv(args.runs), epsilon=args.epsilon)
    elif kind == "model-diff":
        payload = serialize.model_diff_payload(
            snapshot, _csv(args.runs), min_share=args.min_share
        )
    else:  # all
        payload = serialize.report_all_payload(snapshot)
    text = json.dumps(payload, indent=2 if args.pretty else None, ensure_ascii=False)
    if args.out:
        Path(args.out).write_text(text + "\n", encoding="utf-8")
    else:
        print(text)
    return 0


def _layout_from_file(path: str):
    with open(path, "r", encoding="utf-8") as fh:
        data = json.load(fh)
    if isinstance(data, list):  # bare violin outline
        return [(float(x), float(y)) for x, y in data]
    if not isinstance(data, dict):
        raise MalformedRecord(0, "layout JSON must be an object or a point list")
    if "outline" in data:
        return [(float(x), float(y)) for x, y in data["outline"]]
    if "placements" in data:
        return serialize.radial_from_json(data)
    if "nodes" in data and "links" in data:
        return serialize.layout_from_json(data)
    if "matrices" in data:
        return layout_sankey([serialize.flow_from_json(m) for m in data["matrices"]])
    if "matrix" in data:
        return layout_sankey(serialize.flow_from_json(data["matrix"]))
    if "counts" in data:
        return layout_sankey(serialize.flow_from_json(data))
    raise MalformedRecord(0, "unrecognized layout JSON shape")


def _cmd_export_svg(args) -> int:
    layout = _layout_from_file(args.infile)
    size = None
    if args.width and args.height:
        size = (args.width, args.height)
    svg = render_svg(layout, size)
    Path(args.out).write_text(svg, encoding="utf-8")
    print(f"wrote {args.out}")
    return 0


def _cmd_serve(args) -> int:
    import uvicorn

    from .service import create_app

    snapshot_path = _require_arg(args.snapshot, "--snapshot (or $FLOWLENS_SNAPSHOT)")
    host, _, port = args.bind.rpartition(":")
    if not host or not port.isdigit():
        raise FlowlensError(f"--bind must look like HOST:PORT, got {args.bind!r}")
    app = create_app(snapshot_path=snapshot_path, static_dir=args.static)
    uvicorn.run(app, host=host, port=int(port), log_level="info")
    return 0


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 0 if exc.code in (0, None) else 1
    handlers = {
        "ingest": _cmd_ingest,
        "report": _cmd_report,
        "export-svg": _cmd_export_svg,
        "serve": _cmd_serve,
    }
    try:
        return handlers[args.command](args)
    except FlowlensError as exc:
        print(f"error [{exc.code}]: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"error [IO]: {exc}", file=sys.stderr)
        return 1
    except Exception as exc:  # pragma: no cover - defensive
        print(f"internal error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
