"""Byte-exact rendering of the fine-tuning and evaluation prompts.

The marker layout lives in release-versioned template assets under
``templates/``; rendering is a pure function of the item, so golden-file
tests can pin every byte.
"""
from __future__ import annotations

import re
from dataclasses import dataclass
from importlib import resources
from pathlib import Path
from typing import Iterable

from .model import MCQItem, Problem, ValidationError, read_jsonl, write_jsonl

LETTERS = ("A", "B", "C", "D")

_FIELD_RE = re.compile(r"\{(question|option_a|option_b|option_c|option_d)\}")


def _template(name: str) -> str:
    text = resources.files("mcqforge.templates").joinpath(name).read_text(encoding="utf-8")
    return text


_TRAIN_TEMPLATE = _template("train.txt")
_EVAL_SYSTEM = _template("eval_system.txt")
_EVAL_USER_TEMPLATE = _template("eval_user.txt")


def letter_for_index(index: int) -> str:
    return LETTERS[index]


def index_for_letter(letter: str) -> int:
    return LETTERS.index(letter.upper())


@dataclass(frozen=True)
class RenderedExample:
    """Full training sequence plus its answer-free prefix."""

    id: str
    text: str
    prompt_text: str


def _substitute(template: str, item: MCQItem) -> str:
    fields = {
        "question": item.question,
        "option_a": item.options[0],
        "option_b": item.options[1],
        "option_c": item.options[2],
        "option_d": item.options[3],
    }
    return _FIELD_RE.sub(lambda m: fields[m.group(1)], template)


def render_train_example(item: MCQItem) -> RenderedExample:
    """Render the full fine-tuning sequence; the model turn carries the
    gold option letter only."""
    partial = _substitute(_TRAIN_TEMPLATE, item)
    marker = "{answer_letter}"
    cut = partial.index(marker)
    prompt_text = partial[:cut]
    text = prompt_text + letter_for_index(item.gold_index) + partial[cut + len(marker):]
    return RenderedExample(id=item.id, text=text, prompt_text=prompt_text)


def render_eval_messages(item: MCQItem) -> tuple[str, str]:
    """(system, user) messages for zero-shot MCQ evaluation."""
    return _EVAL_SYSTEM, _substitute(_EVAL_USER_TEMPLATE, item)


@dataclass(frozen=True)
class TrainRecord:
    id: str
    text: str


def to_train_record(example: RenderedExample) -> TrainRecord:
    return TrainRecord(id=example.id, text=example.text)


def emit_train_jsonl(records: Iterable[TrainRecord | RenderedExample], path: str | Path) -> int:
    return write_jsonl(({"id": r.id, "text": r.text} for r in records), path)


def load_train_jsonl(path: str | Path) -> list[TrainRecord]:
    out = []
    for lineno, rec in enumerate(read_jsonl(path), start=1):
        rec_id, text = rec.get("id"), rec.get("text")
        if not isinstance(rec_id, str) or not isinstance(text, str):
            raise ValidationError(
                [Problem("SchemaError", "line", f"line {lineno}: expected {{id, text}} strings")]
            )
        out.append(TrainRecord(id=rec_id, text=text))
    return out
