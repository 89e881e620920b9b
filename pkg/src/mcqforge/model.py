"""Domain types, validation, and canonical JSONL serialization.

Every stage of the pipeline exchanges data through JSONL files whose
records are validated into the immutable value objects defined here.
Canonical form: one UTF-8 JSON object per line, keys sorted, compact
separators, no trailing whitespace. Optional fields are omitted when
absent, so canonical files are byte-stable across runs.
"""
from __future__ import annotations

import json
import math
import re
import unicodedata
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Iterable, Sequence
from urllib.parse import urlparse

SOURCE_TAGS = ("palm", "palmx_ext", "user")
QA_FLAGS = ("unsure_relevance", "refined_answer")

ANSWER_EVAL_CORRECT = "Correct"
ANSWER_EVAL_INCORRECT = "Incorrect"
ANSWER_EVAL_PARTIAL = "PartiallyCorrect"
RELEVANCE_YES = "Yes"
RELEVANCE_NO = "No"
RELEVANCE_UNSURE = "Unsure"

# The 22 Arab League member states; country identification replies must
# name exactly one of these (a few common aliases are accepted).
ARAB_COUNTRIES: tuple[tuple[str, str], ...] = (
    ("Algeria", "DZ"),
    ("Bahrain", "BH"),
    ("Comoros", "KM"),
    ("Djibouti", "DJ"),
    ("Egypt", "EG"),
    ("Iraq", "IQ"),
    ("Jordan", "JO"),
    ("Kuwait", "KW"),
    ("Lebanon", "LB"),
    ("Libya", "LY"),
    ("Mauritania", "MR"),
    ("Morocco", "MA"),
    ("Oman", "OM"),
    ("Palestine", "PS"),
    ("Qatar", "QA"),
    ("Saudi Arabia", "SA"),
    ("Somalia", "SO"),
    ("Sudan", "SD"),
    ("Syria", "SY"),
    ("Tunisia", "TN"),
    ("United Arab Emirates", "AE"),
    ("Yemen", "YE"),
)

_COUNTRY_ALIASES = {
    "uae": "AE",
    "emirates": "AE",
    "the united arab emirates": "AE",
    "ksa": "SA",
    "kingdom of saudi arabia": "SA",
    "syrian arab republic": "SY",
    "state of palestine": "PS",
    "state of qatar": "QA",
}

_NAME_TO_CODE = {name.casefold(): code for name, code in ARAB_COUNTRIES}
_NAME_TO_CODE.update(_COUNTRY_ALIASES)
_CODE_TO_NAME = {code: name for name, code in ARAB_COUNTRIES}


@dataclass(frozen=True)
class Problem:
    """One violated constraint, attributed to a field."""

    code: str
    field: str
    message: str


class ValidationError(ValueError):
    """Raised with the full list of violations found in a record."""

    def __init__(self, problems: Sequence[Problem]):
        self.problems = list(problems)
        super().__init__("; ".join(f"{p.code}({p.field}): {p.message}" for p in self.problems))

    def codes(self) -> set[str]:
        return {p.code for p in self.problems}


def _fail(code: str, field_name: str, message: str) -> ValidationError:
    return ValidationError([Problem(code, field_name, message)])


def normalize_text(s: str) -> str:
    """NFC + trim + collapse internal whitespace runs; used wherever two
    pieces of model-produced text are compared for equality."""
    s = unicodedata.normalize("NFC", s)
    return re.sub(r"\s+", " ", s).strip()


def canonical_line(obj: dict) -> str:
    return json.dumps(obj, ensure_ascii=False, sort_keys=True, separators=(",", ":"))


def write_jsonl(records: Iterable[dict], path: str | Path) -> int:
    """Write records in canonical JSONL form; returns the line count."""
    n = 0
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for rec in records:
            fh.write(canonical_line(rec))
            fh.write("\n")
            n += 1
    return n


def read_jsonl(path: str | Path) -> list[dict]:
    out = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise _fail("SchemaError", "line", f"line {lineno}: invalid JSON: {exc}") from exc
            if not isinstance(obj, dict):
                raise _fail("SchemaError", "line", f"line {lineno}: expected JSON object")
            out.append(obj)
    return out


@dataclass(frozen=True)
class QAPair:
    """A free-form question/answer with provenance."""

    id: str
    question: str
    answer: str
    country: str | None = None
    source_url: str | None = None
    source_tag: str = "user"
    flags: frozenset[str] = frozenset()

    def to_dict(self) -> dict:
        d = {
            "id": self.id,
            "question": self.question,
            "answer": self.answer,
            "source_tag": self.source_tag,
        }
        if self.country is not None:
            d["country"] = self.country
        if self.source_url is not None:
            d["source_url"] = self.source_url
        if self.flags:
            d["flags"] = sorted(self.flags)
        return d


def validate_qa(record: dict) -> QAPair:
    """Validate one raw JSON object into a QAPair.

    Collects every violation before raising, so a bad record reports all
    of its problems at once.
    """
    problems: list[Problem] = []
    for name in ("id", "question", "answer"):
        value = record.get(name)
        if value is None:
            problems.append(Problem("MissingField", name, "field is required"))
        elif not isinstance(value, str):
            problems.append(Problem("SchemaError", name, "expected a string"))
        elif name != "id" and not value.strip():
            problems.append(Problem("EmptyText", name, "empty after whitespace trim"))
        elif name == "id" and not value:
            problems.append(Problem("EmptyText", name, "id must be non-empty"))

    source_tag = record.get("source_tag", "user")
    if source_tag not in SOURCE_TAGS:
        problems.append(Problem("SchemaError", "source_tag", f"must be one of {SOURCE_TAGS}"))

    source_url = record.get("source_url")
    if source_url is not None:
        parsed = urlparse(str(source_url))
        if not (parsed.scheme and parsed.netloc):
            problems.append(Problem("BadUrl", "source_url", f"not an absolute URL: {source_url!r}"))

    flags = record.get("flags", [])
    for flag in flags:
        if flag not in QA_FLAGS:
            problems.append(Problem("SchemaError", "flags", f"unknown flag {flag!r}"))

    country = record.get("country")
    if country is not None and not isinstance(country, str):
        problems.append(Problem("SchemaError", "country", "expected a string code"))

    if problems:
        raise ValidationError(problems)
    return QAPair(
        id=record["id"],
        question=record["question"],
        answer=record["answer"],
        country=country,
        source_url=source_url,
        source_tag=source_tag,
        flags=frozenset(flags),
    )


def load_qa_jsonl(path: str | Path) -> list[QAPair]:
    """Load and validate a qa.jsonl file; ids must be unique file-wide."""
    pairs = [validate_qa(rec) for rec in read_jsonl(path)]
    seen: set[str] = set()
    for qa in pairs:
        if qa.id in seen:
            raise _fail("DuplicateId", "id", f"duplicate id {qa.id!r}")
        seen.add(qa.id)
    return pairs


@dataclass(frozen=True)
class Lineage:
    source_qa_id: str
    distractor_model: str
    shuffle_seed: int
    answer: str | None = None  # source answer text, when recorded

    def to_dict(self) -> dict:
        d = {
            "source_qa_id": self.source_qa_id,
            "distractor_model": self.distractor_model,
            "shuffle_seed": self.shuffle_seed,
        }
        if self.answer is not None:
            d["answer"] = self.answer
        return d


@dataclass(frozen=True)
class MCQItem:
    """A four-option multiple-choice item with gold index and lineage."""

    id: str
    question: str
    options: tuple[str, str, str, str]
    gold_index: int
    country: str | None = None
    lineage: Lineage | None = None
    token_count: int | None = None

    @property
    def gold_option(self) -> str:
        return self.options[self.gold_index]

    def to_dict(self) -> dict:
        d = {
            "id": self.id,
            "question": self.question,
            "options": list(self.options),
            "gold_index": self.gold_index,
        }
        if self.country is not None:
            d["country"] = self.country
        if self.lineage is not None:
            d["lineage"] = self.lineage.to_dict()
        if self.token_count is not None:
            d["token_count"] = self.token_count
        return d


def validate_mcq(record: dict) -> MCQItem:
    """Validate one raw JSON object into an MCQItem."""
    problems: list[Problem] = []
    for name in ("id", "question"):
        value = record.get(name)
        if value is None:
            problems.append(Problem("MissingField", name, "field is required"))
        elif not isinstance(value, str) or not value.strip():
            problems.append(Problem("EmptyText", name, "must be non-empty text"))

    options = record.get("options")
    if not isinstance(options, list):
        problems.append(Problem("MissingField", "options", "field is required"))
        options = []
    if len(options) != 4:
        problems.append(Problem("OptionCountError", "options", f"expected 4 options, got {len(options)}"))
    else:
        normalized = [normalize_text(str(o)) for o in options]
        if len(set(normalized)) != 4:
            problems.append(Problem("DuplicateOption", "options", "options not pairwise distinct"))
        if any(not n for n in normalized):
            problems.append(Problem("EmptyText", "options", "option empty after trim"))

    gold_index = record.get("gold_index")
    if not isinstance(gold_index, int) or isinstance(gold_index, bool) or not 0 <= gold_index <= 3:
        problems.append(Problem("GoldIndexOutOfRange", "gold_index", f"got {gold_index!r}"))

    lineage_rec = record.get("lineage")
    lineage = None
    if lineage_rec is not None:
        try:
            lineage = Lineage(
                source_qa_id=str(lineage_rec["source_qa_id"]),
                distractor_model=str(lineage_rec["distractor_model"]),
                shuffle_seed=int(lineage_rec["shuffle_seed"]),
                answer=lineage_rec.get("answer"),
            )
        except (KeyError, TypeError, ValueError):
            problems.append(Problem("SchemaError", "lineage", "malformed lineage record"))
    if (
        lineage is not None
        and lineage.answer is not None
        and len(options) == 4
        and isinstance(gold_index, int)
        and 0 <= gold_index <= 3
        and normalize_text(str(options[gold_index])) != normalize_text(lineage.answer)
    ):
        problems.append(Problem("GoldMismatch", "gold_index", "options[gold_index] != recorded answer"))

    token_count = record.get("token_count")
    if token_count is not None and (not isinstance(token_count, int) or token_count < 0):
        problems.append(Problem("SchemaError", "token_count", "must be a non-negative integer"))

    if problems:
        raise ValidationError(problems)
    return MCQItem(
        id=record["id"],
        question=record["question"],
        options=tuple(str(o) for o in options),
        gold_index=gold_index,
        country=record.get("country"),
        lineage=lineage,
        token_count=token_count,
    )


def load_mcq_jsonl(path: str | Path) -> list[MCQItem]:
    items = [validate_mcq(rec) for rec in read_jsonl(path)]
    seen: set[str] = set()
    for item in items:
        if item.id in seen:
            raise _fail("DuplicateId", "id", f"duplicate id {item.id!r}")
        seen.add(item.id)
    return items


@dataclass(frozen=True)
class Assessment:
    """Verdict triple for one QA pair: answer quality, optional rewrite,
    and cultural relevance."""

    answer_evaluation: str  # Correct | Incorrect | PartiallyCorrect
    corrected_answer: str
    culture_relevance: str  # Yes | No | Unsure


_EVAL_LITERALS = {
    "correct": ANSWER_EVAL_CORRECT,
    "incorrect": ANSWER_EVAL_INCORRECT,
    "partiallycorrect": ANSWER_EVAL_PARTIAL,
    "partially correct": ANSWER_EVAL_PARTIAL,
    "partially_correct": ANSWER_EVAL_PARTIAL,
}
_RELEVANCE_LITERALS = {
    "yes": RELEVANCE_YES,
    "no": RELEVANCE_NO,
    "unsure": RELEVANCE_UNSURE,
}


def parse_assessment(obj: dict) -> Assessment:
    """Parse the three-field assessment JSON; enum values are
    case-normalized, anything else is a SchemaError."""
    problems: list[Problem] = []
    raw_eval = obj.get("answer_evaluation")
    raw_relevance = obj.get("culture_relevance")
    answer_eval = relevance = None
    if not isinstance(raw_eval, str):
        problems.append(Problem("SchemaError", "answer_evaluation", "missing or not a string"))
    else:
        answer_eval = _EVAL_LITERALS.get(raw_eval.strip().casefold())
        if answer_eval is None:
            problems.append(Problem("SchemaError", "answer_evaluation", f"illegal value {raw_eval!r}"))
    if not isinstance(raw_relevance, str):
        problems.append(Problem("SchemaError", "culture_relevance", "missing or not a string"))
    else:
        relevance = _RELEVANCE_LITERALS.get(raw_relevance.strip().casefold())
        if relevance is None:
            problems.append(Problem("SchemaError", "culture_relevance", f"illegal value {raw_relevance!r}"))
    corrected = obj.get("corrected_answer", "")
    if corrected is None:
        corrected = ""
    if not isinstance(corrected, str):
        problems.append(Problem("SchemaError", "corrected_answer", "must be a string"))
    if problems:
        raise ValidationError(problems)
    return Assessment(answer_eval, corrected, relevance)


@dataclass(frozen=True)
class CountryTag:
    name: str  # canonical English name
    code: str


def parse_country(name: str) -> CountryTag:
    """Map a country name to the fixed Arab-country table; unknown names
    are rejected."""
    code = _NAME_TO_CODE.get(normalize_text(name).casefold())
    if code is None:
        raise _fail("UnknownCountry", "country", f"not an Arab-country table entry: {name!r}")
    return CountryTag(name=_CODE_TO_NAME[code], code=code)


@dataclass(frozen=True)
class DatasetSplit:
    """Two disjoint halves of a dataset, stratified by country."""

    half_a: tuple[str, ...]
    half_b: tuple[str, ...]
    stratum_key: str = "country"
    seed: int = 0

    def to_dict(self) -> dict:
        return {
            "half_a": list(self.half_a),
            "half_b": list(self.half_b),
            "stratum_key": self.stratum_key,
            "seed": self.seed,
        }


def approx_token_count(text: str) -> int:
    """Cheap tokenizer stand-in: Unicode word count scaled by 1.3,
    rounded up. Exact tokenizers plug in via the counter argument of the
    token guard."""
    words = len(re.findall(r"\w+", text))
    return math.ceil(words * 1.3)
