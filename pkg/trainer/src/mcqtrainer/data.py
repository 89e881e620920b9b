"""Readers and writers for the interchange JSONL files."""
from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path


class DataError(ValueError):
    pass


def read_jsonl(path: str | Path) -> list[dict]:
    records = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                records.append(json.loads(line))
            except json.JSONDecodeError as exc:
                raise DataError(f"{path}:{lineno}: invalid JSON: {exc}") from exc
    return records


def write_jsonl(records, path: str | Path) -> int:
    n = 0
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for rec in records:
            fh.write(json.dumps(rec, ensure_ascii=False, sort_keys=True, separators=(",", ":")))
            fh.write("\n")
            n += 1
    return n


@dataclass(frozen=True)
class TrainExample:
    id: str
    text: str


def load_train_file(path: str | Path) -> list[TrainExample]:
    examples = []
    for lineno, rec in enumerate(read_jsonl(path), start=1):
        if not isinstance(rec.get("id"), str) or not isinstance(rec.get("text"), str):
            raise DataError(f"{path}:{lineno}: expected {{id, text}} strings")
        examples.append(TrainExample(id=rec["id"], text=rec["text"]))
    if not examples:
        raise DataError(f"{path}: training file is empty")
    return examples


@dataclass(frozen=True)
class MCQRow:
    id: str
    question: str
    options: tuple[str, str, str, str]
    gold_index: int


def load_mcq_file(path: str | Path) -> list[MCQRow]:
    rows = []
    for lineno, rec in enumerate(read_jsonl(path), start=1):
        try:
            options = tuple(rec["options"])
            if len(options) != 4:
                raise ValueError("expected 4 options")
            rows.append(
                MCQRow(
                    id=rec["id"],
                    question=rec["question"],
                    options=options,
                    gold_index=int(rec["gold_index"]),
                )
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise DataError(f"{path}:{lineno}: bad MCQ record: {exc}") from exc
    return rows


# Prompt contract shared with the evaluation toolkit: same system
# sentence and option layout, answer requested as a bare letter.
EVAL_SYSTEM = (
    "You're a helpful Arabic assistant that answers multiple-choice questions "
    "accurately. Choose the best answer based only on the given question and options."
)

LETTERS = ("A", "B", "C", "D")


def eval_prompt(row: MCQRow) -> str:
    lines = [EVAL_SYSTEM, row.question]
    lines.extend(f"{LETTERS[i]}. {opt}" for i, opt in enumerate(row.options))
    lines.append("Answer with the letter only.")
    return "\n".join(lines) + "\n"
