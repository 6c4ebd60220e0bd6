#!/usr/bin/env python3
"""Record HTTP API responses as JSON fixtures for the frontend contract tests.

Run from the repository root after installing the Python package:

    python frontend/scripts/record_fixtures.py
"""

from __future__ import annotations

import json
import sys
from pathlib import Path

from fastapi.testclient import TestClient

ROOT = Path(__file__).resolve().parents[2]
sys.path.insert(0, str(ROOT / "tests"))

from conftest import build_catalog_snapshot, make_run, make_taxonomy  # noqa: E402
from test_evaluation import diagnostics_taxonomy, injected_run  # noqa: E402

from flowlens.ingest import build_snapshot  # noqa: E402
from flowlens.service import create_app  # noqa: E402

FIXTURES = ROOT / "frontend" / "fixtures"


def record(client: TestClient, name: str, url: str) -> None:
    response = client.get(url)
    payload = {"url": url, "status": response.status_code, "body": response.json()}
    path = FIXTURES / f"{name}.json"
    path.write_text(json.dumps(payload, indent=2, ensure_ascii=False) + "\n")
    print(f"recorded {path.relative_to(ROOT)} ({response.status_code})")


def trend_snapshot():
    """Three runs engineered to produce all five trend classes."""
    leaves = {
        "up": [50, 60, 70],          # strictly increasing -> blue
        "down": [90, 80, 70],        # strictly decreasing -> red
        "flat": [80, 80, 80],        # stable -> light_blue
        "wobble_up": [70, 65, 72],   # overall increasing -> light_blue
        "wobble_down": [70, 75, 62], # overall decreasing -> orange
    }
    edges: dict[str, str | None] = {"root": None}
    edges.update({leaf: "root" for leaf in leaves})
    taxonomy = make_taxonomy(edges)
    runs = []
    for ordinal in range(3):
        rows = []
        for leaf, corrects in leaves.items():
            for i in range(100):
                predicted = leaf if i < corrects[ordinal] else "flat" if leaf != "flat" else "up"
                rows.append((f"{leaf}-{i}", leaf, predicted))
        runs.append(make_run(f"M{ordinal}", ordinal, rows))
    return build_snapshot(taxonomy, [], {}, runs)


def main() -> None:
    FIXTURES.mkdir(parents=True, exist_ok=True)

    catalog = create_app(snapshot=build_catalog_snapshot())
    with TestClient(catalog) as client:
        record(client, "taxonomy", "/api/taxonomy")
        record(client, "runs", "/api/runs")
        record(client, "features", "/api/features")
        record(client, "quantity_root", "/api/nodes/root/quantity")
        record(client, "quantity_cameras", "/api/nodes/cameras/quantity")
        record(client, "quality_camcorders", "/api/nodes/camcorders/quality")
        record(client, "quality_drones_error", "/api/nodes/drones/quality")
        record(client, "accuracy_M0", "/api/runs/M0/accuracy")
        record(client, "misclassification_M0", "/api/runs/M0/misclassification")
        record(client, "model_diff", "/api/flows/model-diff?runs=M0,M1")

    diag = create_app(
        snapshot=build_snapshot(diagnostics_taxonomy(), [], {}, [injected_run()])
    )
    with TestClient(diag) as client:
        record(client, "diag_taxonomy", "/api/taxonomy")
        record(client, "diag_misclassification", "/api/runs/M0/misclassification")
        record(client, "diag_findings", "/api/runs/M0/diagnose")

    trends = create_app(snapshot=trend_snapshot())
    with TestClient(trends) as client:
        record(client, "trends", "/api/trends")
        record(client, "trend_model_diff", "/api/flows/model-diff")
        record(client, "trend_runs", "/api/runs")


if __name__ == "__main__":
    main()
