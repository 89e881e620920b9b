"""Zero-shot MCQ evaluation: answer extraction, accuracy, and
model-comparison tables."""
from __future__ import annotations

import logging
import re
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from decimal import ROUND_HALF_UP, Decimal
from pathlib import Path
from typing import Mapping, Sequence

from .gateway import ChatRequest, GatewayError
from .model import MCQItem, write_jsonl
from .promptkit import index_for_letter, render_eval_messages

log = logging.getLogger(__name__)

EVAL_TEMPERATURE = 0.0
EVAL_MAX_TOKENS = 16


class EmptyEvalSet(ValueError):
    pass


class DuplicateModelDataset(ValueError):
    pass


@dataclass(frozen=True)
class EvalRecord:
    item_id: str
    model: str
    raw_response: str
    predicted_index: int | None
    correct: bool
    latency_ms: int = 0

    def to_dict(self) -> dict:
        return {
            "item_id": self.item_id,
            "model": self.model,
            "raw_response": self.raw_response,
            "predicted_index": self.predicted_index,
            "correct": self.correct,
            "latency_ms": self.latency_ms,
        }


@dataclass(frozen=True)
class EvalReport:
    model: str
    dataset: str
    n_items: int
    n_correct: int
    n_unparsed: int
    accuracy_pct: float

    def to_dict(self) -> dict:
        return {
            "model": self.model,
            "dataset": self.dataset,
            "n_items": self.n_items,
            "n_correct": self.n_correct,
            "n_unparsed": self.n_unparsed,
            "accuracy_pct": self.accuracy_pct,
        }


_BARE_LETTER_RE = re.compile(r"^([A-Da-d])[.)]?$")
_STANDALONE_LETTER_RE = re.compile(r"(?<![A-Za-z])([A-Da-d])(?![A-Za-z])")


def extract_choice(raw: str, options: Sequence[str]) -> int | None:
    """Map a free-form model response onto an option index.

    Cascade: bare letter reply; first standalone Latin A-D token; longest
    option text quoted verbatim; otherwise None.
    """
    trimmed = raw.strip()
    m = _BARE_LETTER_RE.match(trimmed)
    if m:
        return index_for_letter(m.group(1))
    m = _STANDALONE_LETTER_RE.search(raw)
    if m:
        return index_for_letter(m.group(1))
    best = None
    for idx, option in enumerate(options):
        text = option.strip()
        if text and text in raw:
            if best is None or len(text) > len(options[best].strip()):
                best = idx
    return best


def accuracy(records: Sequence[EvalRecord]) -> float:
    """Percent correct, 2 decimals, rounding half-up."""
    if not records:
        raise EmptyEvalSet("no records to score")
    pct = Decimal(100 * sum(r.correct for r in records)) / Decimal(len(records))
    return float(pct.quantize(Decimal("0.01"), rounding=ROUND_HALF_UP))


def _record_for(item: MCQItem, model: str, raw: str, latency_ms: int = 0) -> EvalRecord:
    predicted = extract_choice(raw, item.options)
    return EvalRecord(
        item_id=item.id,
        model=model,
        raw_response=raw,
        predicted_index=predicted,
        correct=predicted is not None and predicted == item.gold_index,
        latency_ms=latency_ms,
    )


def _report(records: Sequence[EvalRecord], model: str, dataset: str) -> EvalReport:
    if not records:
        raise EmptyEvalSet("dataset is empty")
    return EvalReport(
        model=model,
        dataset=dataset,
        n_items=len(records),
        n_correct=sum(r.correct for r in records),
        n_unparsed=sum(r.predicted_index is None for r in records),
        accuracy_pct=accuracy(records),
    )


def evaluate_model(
    items: Sequence[MCQItem],
    gateway,
    model: str,
    dataset: str = "dataset",
    records_path: str | Path | None = None,
    parallelism: int = 4,
) -> tuple[EvalReport, list[EvalRecord]]:
    """Query the endpoint once per item at temperature 0 and score the
    replies; unparseable responses count as incorrect."""
    if not items:
        raise EmptyEvalSet("dataset is empty")

    def one(item: MCQItem) -> EvalRecord:
        system, user = render_eval_messages(item)
        request = ChatRequest(
            model=model,
            system=system,
            user=user,
            temperature=EVAL_TEMPERATURE,
            max_tokens=EVAL_MAX_TOKENS,
        )
        try:
            response = gateway.chat(request)
        except GatewayError as exc:
            log.warning("item %s failed: %s", item.id, exc)
            return EvalRecord(item.id, model, f"<error: {exc}>", None, False, 0)
        # cache hits report latency 0 so warm-cache reruns are byte-identical
        latency = 0 if response.from_cache else response.latency_ms
        return _record_for(item, model, response.content, latency)

    with ThreadPoolExecutor(max_workers=max(1, parallelism)) as pool:
        records = sorted(pool.map(one, items), key=lambda r: r.item_id)

    if records_path is not None:
        write_jsonl((r.to_dict() for r in records), records_path)
    return _report(records, model, dataset), records


def score_responses(
    items: Sequence[MCQItem],
    responses: Mapping[str, str],
    model: str,
    dataset: str = "dataset",
    records_path: str | Path | None = None,
) -> tuple[EvalReport, list[EvalRecord]]:
    """Score pre-generated raw responses (item_id -> text) offline; items
    without a response count as unparsed."""
    if not items:
        raise EmptyEvalSet("dataset is empty")
    records = sorted(
        (_record_for(item, model, responses.get(item.id, "")) for item in items),
        key=lambda r: r.item_id,
    )
    if records_path is not None:
        write_jsonl((r.to_dict() for r in records), records_path)
    return _report(records, model, dataset), records


def compare_models(reports: Sequence[EvalReport]) -> str:
    """Render a models-by-datasets Markdown accuracy table; best cell per
    dataset column is bolded, missing cells show an em dash."""
    if not reports:
        raise EmptyEvalSet("no reports to compare")
    cells: dict[tuple[str, str], float] = {}
    models: list[str] = []
    datasets: list[str] = []
    for report in reports:
        key = (report.model, report.dataset)
        if key in cells:
            raise DuplicateModelDataset(f"duplicate report for {key}")
        cells[key] = report.accuracy_pct
        if report.model not in models:
            models.append(report.model)
        if report.dataset not in datasets:
            datasets.append(report.dataset)

    best = {
        ds: max(v for (m, d), v in cells.items() if d == ds)
        for ds in datasets
    }
    lines = [
        "| Model | " + " | ".join(datasets) + " |",
        "| --- | " + " | ".join("---" for _ in datasets) + " |",
    ]
    for model in models:
        row = [model]
        for ds in datasets:
            value = cells.get((model, ds))
            if value is None:
                row.append("—")
            elif value == best[ds]:
                row.append(f"**{value:.2f}**")
            else:
                row.append(f"{value:.2f}")
        lines.append("| " + " | ".join(row) + " |")
    return "\n".join(lines) + "\n"
