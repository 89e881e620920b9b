"""Hyperparameter grid runner.

Each configuration is trained, its checkpoint predicts on the held-out
MCQ set, and the responses are scored by invoking the evaluation
toolkit's CLI offline. Results come back sorted ascending by accuracy.
"""
from __future__ import annotations

import json
import logging
import subprocess
import sys
import tempfile
from pathlib import Path

from .config import GridResult, TrainConfig
from .predicting import predict
from .training import train

log = logging.getLogger(__name__)


def score_with_evaluator(dataset_path: str | Path, responses_path: str | Path, model_name: str) -> float:
    """Shell out to ``mcqforge evaluate --responses`` and read back the
    accuracy percentage."""
    with tempfile.TemporaryDirectory() as tmp:
        report_path = Path(tmp) / "report.json"
        subprocess.run(
            [
                sys.executable, "-m", "mcqforge",
                "evaluate",
                "--dataset", str(dataset_path),
                "--model", model_name,
                "--responses", str(responses_path),
                "--report-out", str(report_path),
            ],
            check=True,
            capture_output=True,
        )
        return float(json.loads(report_path.read_text(encoding="utf-8"))["accuracy_pct"])


def grid_search(
    configs: list[TrainConfig],
    train_path: str | Path,
    dev_path: str | Path,
    out_dir: str | Path,
    model_cfg=None,
    max_steps: int | None = None,
) -> list[GridResult]:
    """Run every configuration; per-cell failures are recorded and the
    grid continues. Results sorted ascending by dev accuracy."""
    out_dir = Path(out_dir)
    results: list[GridResult] = []
    for index, cfg in enumerate(configs):
        cell_dir = out_dir / f"cell-{index:02d}"
        try:
            cfg.validate_for_grid()
            best = train(train_path, cfg, cell_dir, model_cfg=model_cfg, max_steps=max_steps)
            responses = cell_dir / "responses.jsonl"
            predict(best, dev_path, responses)
            acc = score_with_evaluator(dev_path, responses, model_name=f"cell-{index:02d}")
            results.append(GridResult(config=cfg, dev_accuracy_pct=acc))
            log.info("cell %d: %.2f%%", index, acc)
        except Exception as exc:
            log.error("cell %d failed: %s", index, exc)
            results.append(GridResult(config=cfg, dev_accuracy_pct=float("nan"), error=str(exc)))
    succeeded = sorted(
        (r for r in results if r.error is None), key=lambda r: r.dev_accuracy_pct
    )
    failed = [r for r in results if r.error is not None]
    ordered = succeeded + failed
    out_dir.mkdir(parents=True, exist_ok=True)
    (out_dir / "grid_results.json").write_text(
        json.dumps([r.to_dict() for r in ordered], indent=2) + "\n", encoding="utf-8"
    )
    return ordered
