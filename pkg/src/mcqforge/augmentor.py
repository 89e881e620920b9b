"""QA-to-MCQ augmentation pipeline.

Stage order per item: country identification, domain allowlist filter,
answer assessment/refinement, distractor generation, MCQ assembly,
token-limit guard. Accepted and rejected items always partition the
input exactly.
"""
from __future__ import annotations

import csv
import hashlib
import logging
import random
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Callable, Sequence
from urllib.parse import urlparse

from . import prompts
from .gateway import ChatRequest, GatewayError, JsonExtractError, extract_json
from .model import (
    ANSWER_EVAL_INCORRECT,
    RELEVANCE_NO,
    RELEVANCE_UNSURE,
    Assessment,
    CountryTag,
    Lineage,
    MCQItem,
    Problem,
    QAPair,
    ValidationError,
    approx_token_count,
    load_qa_jsonl,
    normalize_text,
    parse_assessment,
    parse_country,
    write_jsonl,
)
from .promptkit import letter_for_index, render_train_example

log = logging.getLogger(__name__)

STAGES = ("country", "domain", "assess", "distractor", "assemble", "token_guard")

COUNTRY_TEMPERATURE = 0.0
ASSESS_TEMPERATURE = 0.0
DISTRACTOR_TEMPERATURE = 0.7


class DistractorQualityError(Exception):
    """Distractor generation kept violating the validation rules."""


class SampleTooLarge(ValueError):
    pass


@dataclass(frozen=True)
class PipelineConfig:
    max_prompt_tokens: int = 512
    unsure_policy: str = "keep_flagged"  # or "drop"
    distractor_retries: int = 2
    shuffle_seed: int = 0
    domain_allowlist: frozenset[str] | None = None

    def __post_init__(self):
        if self.max_prompt_tokens < 32:
            raise ValueError("max_prompt_tokens must be >= 32")
        if self.unsure_policy not in ("keep_flagged", "drop"):
            raise ValueError(f"unknown unsure_policy {self.unsure_policy!r}")
        if self.distractor_retries < 0:
            raise ValueError("distractor_retries must be >= 0")


@dataclass(frozen=True)
class Rejection:
    qa_id: str
    stage: str
    reason: str

    def to_dict(self) -> dict:
        return {"qa_id": self.qa_id, "stage": self.stage, "reason": self.reason}


@dataclass(frozen=True)
class PipelineOutput:
    accepted: tuple[MCQItem, ...]
    rejected: tuple[Rejection, ...]


def identify_country(qa: QAPair, gateway) -> CountryTag:
    """Ask the model which Arab country the question refers to."""
    request = ChatRequest(
        model=gateway.model,
        system=prompts.COUNTRY_SYSTEM,
        user=prompts.fill(prompts.COUNTRY_USER, question=qa.question),
        temperature=COUNTRY_TEMPERATURE,
        max_tokens=64,
    )
    reply = extract_json(gateway.chat(request).content)
    name = reply.get("country")
    if not isinstance(name, str):
        raise ValidationError([Problem("SchemaError", "country", "reply lacks a 'country' string")])
    return parse_country(name)


def assess_qa(qa: QAPair, gateway) -> Assessment:
    """Ask the model to grade, optionally rewrite, and relevance-check
    the answer."""
    request = ChatRequest(
        model=gateway.model,
        system=prompts.ASSESS_SYSTEM,
        user=prompts.fill(prompts.ASSESS_USER, question=qa.question, answer=qa.answer),
        temperature=ASSESS_TEMPERATURE,
        max_tokens=512,
    )
    return parse_assessment(extract_json(gateway.chat(request).content))


@dataclass(frozen=True)
class AssessmentDecision:
    kept: QAPair | None
    drop_reason: str | None = None


def apply_assessment(qa: QAPair, assessment: Assessment, cfg: PipelineConfig) -> AssessmentDecision:
    """Total function mapping a verdict onto keep/drop plus flags."""
    if assessment.answer_evaluation == ANSWER_EVAL_INCORRECT:
        return AssessmentDecision(None, "factually_incorrect")
    if assessment.culture_relevance == RELEVANCE_NO:
        return AssessmentDecision(None, "irrelevant")
    kept = qa
    if assessment.culture_relevance == RELEVANCE_UNSURE:
        if cfg.unsure_policy == "drop":
            return AssessmentDecision(None, "unsure_relevance")
        kept = replace(kept, flags=kept.flags | {"unsure_relevance"})
    corrected = assessment.corrected_answer.strip()
    if corrected:
        kept = replace(kept, answer=corrected, flags=kept.flags | {"refined_answer"})
    return AssessmentDecision(kept)


def filter_by_domain(qa: QAPair, allowlist: frozenset[str] | None) -> bool:
    """True when the source host is allowlisted (exact or parent-domain
    match). Items without a URL pass only when no allowlist is set."""
    if allowlist is None:
        return True
    if not qa.source_url:
        return False
    host = (urlparse(qa.source_url).hostname or "").casefold()
    if not host:
        return False
    allowed = {a.casefold() for a in allowlist}
    return host in allowed or any(host.endswith("." + a) for a in allowed)


def generate_distractors(qa: QAPair, gateway, cfg: PipelineConfig) -> list[str]:
    """Obtain 3 distinct distractors that differ from the gold answer;
    malformed or low-quality replies are retried."""
    request = ChatRequest(
        model=gateway.model,
        system=prompts.DISTRACTOR_SYSTEM,
        user=prompts.fill(prompts.DISTRACTOR_USER, question=qa.question, answer=qa.answer),
        temperature=DISTRACTOR_TEMPERATURE,
        max_tokens=512,
    )
    last_problem = "no attempt"
    for _ in range(cfg.distractor_retries + 1):
        try:
            reply = extract_json(gateway.chat(request).content)
        except JsonExtractError as exc:
            last_problem = str(exc)
            continue
        # The prompt's own JSON sketch is inconsistent ("A." vs "B");
        # normalize keys by stripping trailing periods.
        by_key = {str(k).strip().rstrip("."): str(v) for k, v in reply.items()}
        if not all(k in by_key for k in ("A", "B", "C")):
            last_problem = f"expected keys A/B/C, got {sorted(reply)}"
            continue
        distractors = [by_key["A"], by_key["B"], by_key["C"]]
        normalized = [normalize_text(d) for d in distractors]
        if "" in normalized:
            last_problem = "empty distractor"
            continue
        if len(set(normalized)) != 3:
            last_problem = "distractors not pairwise distinct"
            continue
        if normalize_text(qa.answer) in normalized:
            last_problem = "distractor equals the correct answer"
            continue
        return distractors
    raise DistractorQualityError(last_problem)


def _shuffle_rng(seed: int, qa_id: str) -> random.Random:
    # Stable across processes; independent streams per (seed, id).
    digest = hashlib.sha256(f"{seed}|{qa_id}".encode("utf-8")).digest()
    return random.Random(int.from_bytes(digest[:8], "big"))


def assemble_mcq(qa: QAPair, distractors: Sequence[str], seed: int, distractor_model: str = "") -> MCQItem:
    """Shuffle gold + distractors deterministically per (seed, qa.id)."""
    texts = [qa.answer, *distractors]
    normalized = [normalize_text(t) for t in texts]
    if len(set(normalized)) != 4 or "" in normalized:
        raise ValidationError([Problem("DuplicateOption", "options", "options not pairwise distinct")])
    order = [0, 1, 2, 3]
    _shuffle_rng(seed, qa.id).shuffle(order)
    options = tuple(texts[i] for i in order)
    return MCQItem(
        id=qa.id,
        question=qa.question,
        options=options,  # type: ignore[arg-type]
        gold_index=order.index(0),
        country=qa.country,
        lineage=Lineage(source_qa_id=qa.id, distractor_model=distractor_model, shuffle_seed=seed),
    )


def guard_token_limit(
    item: MCQItem,
    counter: Callable[[str], int] = approx_token_count,
    limit: int = 512,
) -> tuple[MCQItem | None, int]:
    """Count tokens over the fully rendered training sequence; boundary
    inclusive (count == limit passes). Returns (item-with-count, count)
    on pass, (None, count) on reject."""
    count = counter(render_train_example(item).text)
    if count <= limit:
        return replace(item, token_count=count), count
    return None, count


def sample_for_review(items: Sequence[MCQItem], n: int, seed: int, path: str | Path) -> int:
    """Export a seeded uniform sample as a review CSV with empty score
    columns (0-10 scale)."""
    if n > len(items):
        raise SampleTooLarge(f"asked for {n} of {len(items)} items")
    chosen = random.Random(seed).sample(list(items), n)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["id", "question", "options", "gold", "accuracy_score", "clarity_score"])
        for item in chosen:
            writer.writerow(
                [
                    item.id,
                    item.question,
                    " | ".join(f"{letter_for_index(i)}. {o}" for i, o in enumerate(item.options)),
                    letter_for_index(item.gold_index),
                    "",
                    "",
                ]
            )
    return len(chosen)


def process_item(qa: QAPair, cfg: PipelineConfig, gateway) -> MCQItem | Rejection:
    """Run one QAPair through all stages; any stage failure becomes a
    Rejection carrying the stage label."""
    try:
        tag = identify_country(qa, gateway)
    except (GatewayError, ValidationError) as exc:
        return Rejection(qa.id, "country", str(exc))
    qa = replace(qa, country=tag.code)

    if not filter_by_domain(qa, cfg.domain_allowlist):
        return Rejection(qa.id, "domain", f"source_url host not in allowlist: {qa.source_url!r}")

    try:
        decision = apply_assessment(qa, assess_qa(qa, gateway), cfg)
    except (GatewayError, ValidationError) as exc:
        return Rejection(qa.id, "assess", str(exc))
    if decision.kept is None:
        return Rejection(qa.id, "assess", decision.drop_reason or "dropped")
    qa = decision.kept

    try:
        distractors = generate_distractors(qa, gateway, cfg)
    except (GatewayError, DistractorQualityError) as exc:
        return Rejection(qa.id, "distractor", str(exc))

    try:
        item = assemble_mcq(qa, distractors, cfg.shuffle_seed, distractor_model=gateway.model)
    except ValidationError as exc:
        return Rejection(qa.id, "assemble", str(exc))

    guarded, count = guard_token_limit(item, limit=cfg.max_prompt_tokens)
    if guarded is None:
        return Rejection(qa.id, "token_guard", f"token count {count} > {cfg.max_prompt_tokens}")
    return guarded


def run_pipeline(
    source: str | Path,
    cfg: PipelineConfig,
    gateway,
    mcq_path: str | Path | None = None,
    rejected_path: str | Path | None = None,
    parallelism: int = 4,
) -> PipelineOutput:
    """Process a qa.jsonl file end to end; outputs are ordered by input
    id regardless of completion order, so runs against a warm cache are
    byte-identical."""
    qa_pairs = load_qa_jsonl(source)
    if qa_pairs:
        with ThreadPoolExecutor(max_workers=max(1, parallelism)) as pool:
            results = list(pool.map(lambda qa: process_item(qa, cfg, gateway), qa_pairs))
    else:
        results = []

    accepted = sorted((r for r in results if isinstance(r, MCQItem)), key=lambda m: m.id)
    rejected = sorted((r for r in results if isinstance(r, Rejection)), key=lambda r: r.qa_id)

    if accepted:
        ratios = [
            (sum(len(o) for i, o in enumerate(m.options) if i != m.gold_index) / 3)
            / max(1, len(m.gold_option))
            for m in accepted
        ]
        log.info(
            "distractor/gold length ratio over %d accepted items: mean %.2f",
            len(accepted),
            sum(ratios) / len(ratios),
        )

    if mcq_path is not None:
        write_jsonl((m.to_dict() for m in accepted), mcq_path)
    if rejected_path is not None:
        write_jsonl((r.to_dict() for r in rejected), rejected_path)
    return PipelineOutput(accepted=tuple(accepted), rejected=tuple(rejected))
