"""Command-line entry point.

Configuration is layered: built-in defaults, then the config file, then
flags, then environment variables (``MCQFORGE_API_KEY``). Exit codes:
0 success, 1 validation/data error, 2 configuration/usage error.
"""
from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from . import augmentor, evaluator, splitter
from .augmentor import PipelineConfig, sample_for_review
from .evaluator import EvalReport
from .gateway import CachingGateway, HttpChatGateway, ResponseCache
from .model import (
    ValidationError,
    load_mcq_jsonl,
    load_qa_jsonl,
    read_jsonl,
    validate_qa,
    write_jsonl,
)
from .promptkit import emit_train_jsonl, render_train_example, to_train_record

log = logging.getLogger("mcqforge")

DEFAULTS = {
    "llm.base_url": None,
    "llm.model": "gpt-4.1",
    "llm.cache_dir": None,
    "llm.parallelism": "4",
    "llm.timeout": "60",
    "pipeline.max_prompt_tokens": "512",
    "pipeline.unsure_policy": "keep_flagged",
    "pipeline.distractor_retries": "2",
}


class ConfigError(Exception):
    pass


def load_config(path: str | None) -> dict:
    """Flat dotted-key config file: one ``key = value`` per line, ``#``
    comments."""
    config = dict(DEFAULTS)
    if path is None:
        return config
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path}: {exc}") from exc
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{lineno}: expected 'key = value'")
        key, _, value = line.partition("=")
        config[key.strip()] = value.strip()
    return config


def _build_gateway(config: dict, args) -> CachingGateway | HttpChatGateway:
    base_url = getattr(args, "base_url", None) or config.get("llm.base_url")
    if not base_url:
        raise ConfigError("llm.base_url is not configured (config key llm.base_url or --base-url)")
    model = getattr(args, "model", None) or config["llm.model"]
    gateway = HttpChatGateway(
        base_url=base_url,
        model=model,
        timeout=float(config["llm.timeout"]),
        parallelism=int(getattr(args, "parallelism", None) or config["llm.parallelism"]),
    )
    cache_dir = getattr(args, "cache_dir", None) or config.get("llm.cache_dir")
    if cache_dir:
        return CachingGateway(gateway, ResponseCache(cache_dir))
    return gateway


def cmd_ingest(args) -> int:
    records = read_jsonl(args.infile)
    out = []
    for i, rec in enumerate(records, start=1):
        rec = dict(rec)
        rec.setdefault("id", f"{args.id_prefix}-{i:04d}")
        rec.setdefault("source_tag", args.source_tag)
        out.append(validate_qa(rec).to_dict())
    seen: set[str] = set()
    for rec in out:
        if rec["id"] in seen:
            raise ValidationError([])
        seen.add(rec["id"])
    n = write_jsonl(out, args.out)
    log.info("ingested %d QA pairs -> %s", n, args.out)
    return 0


def cmd_augment(args) -> int:
    config = load_config(args.config)
    gateway = _build_gateway(config, args)
    cfg = PipelineConfig(
        max_prompt_tokens=int(args.max_prompt_tokens or config["pipeline.max_prompt_tokens"]),
        unsure_policy=args.unsure_policy or config["pipeline.unsure_policy"],
        distractor_retries=int(
            args.distractor_retries
            if args.distractor_retries is not None
            else config["pipeline.distractor_retries"]
        ),
        shuffle_seed=args.seed,
        domain_allowlist=frozenset(args.allow_domain) if args.allow_domain else None,
    )
    rejected_path = args.rejected or str(Path(args.out).with_name("rejected.jsonl"))
    output = augmentor.run_pipeline(
        args.infile,
        cfg,
        gateway,
        mcq_path=args.out,
        rejected_path=rejected_path,
        parallelism=int(args.parallelism or config["llm.parallelism"]),
    )
    log.info("accepted %d, rejected %d", len(output.accepted), len(output.rejected))
    return 0


def cmd_split(args) -> int:
    records = read_jsonl(args.infile)

    class _Row:
        __slots__ = ("id", "country")

        def __init__(self, rec):
            self.id = rec["id"]
            self.country = rec.get("country")

    split = splitter.stratified_split([_Row(r) for r in records], args.ratio, args.seed)
    by_id = {r["id"]: r for r in records}
    write_jsonl((by_id[i] for i in split.half_a), args.out_a)
    write_jsonl((by_id[i] for i in split.half_b), args.out_b)
    log.info("split %d items into %d + %d", len(records), len(split.half_a), len(split.half_b))
    return 0


def cmd_emit_train(args) -> int:
    items = load_mcq_jsonl(args.infile)
    n = emit_train_jsonl((to_train_record(render_train_example(m)) for m in items), args.out)
    log.info("emitted %d training lines -> %s", n, args.out)
    return 0


def cmd_evaluate(args) -> int:
    items = load_mcq_jsonl(args.dataset)
    dataset_name = args.dataset_name or Path(args.dataset).stem
    if args.responses:
        responses = {r["item_id"]: r["raw_response"] for r in read_jsonl(args.responses)}
        report, _ = evaluator.score_responses(
            items, responses, args.model, dataset_name, records_path=args.out
        )
    else:
        config = load_config(args.config)
        gateway = _build_gateway(config, args)
        report, _ = evaluator.evaluate_model(
            items,
            gateway,
            args.model,
            dataset_name,
            records_path=args.out,
            parallelism=int(args.parallelism or config["llm.parallelism"]),
        )
    if args.report_out:
        Path(args.report_out).write_text(
            json.dumps(report.to_dict(), ensure_ascii=False, sort_keys=True, indent=2) + "\n",
            encoding="utf-8",
        )
    log.info(
        "%s on %s: %.2f%% (%d/%d, %d unparsed)",
        report.model,
        report.dataset,
        report.accuracy_pct,
        report.n_correct,
        report.n_items,
        report.n_unparsed,
    )
    return 0


def cmd_report(args) -> int:
    reports = []
    for path in args.reports:
        data = json.loads(Path(path).read_text(encoding="utf-8"))
        reports.append(EvalReport(**data))
    table = evaluator.compare_models(reports)
    if args.out:
        Path(args.out).write_text(table, encoding="utf-8")
    else:
        sys.stdout.write(table)
    return 0


def cmd_review_sample(args) -> int:
    items = load_mcq_jsonl(args.infile)
    n = sample_for_review(items, args.n, args.seed, args.out)
    log.info("sampled %d items for review -> %s", n, args.out)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="mcqforge", description=__doc__)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ingest", help="validate raw QA JSONL into canonical qa.jsonl")
    p.add_argument("--in", dest="infile", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--source-tag", default="user", choices=["palm", "palmx_ext", "user"])
    p.add_argument("--id-prefix", default="palm")
    p.set_defaults(func=cmd_ingest)

    p = sub.add_parser("augment", help="run the QA-to-MCQ pipeline")
    p.add_argument("--in", dest="infile", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--rejected")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--config")
    p.add_argument("--base-url", dest="base_url")
    p.add_argument("--model")
    p.add_argument("--cache-dir", dest="cache_dir")
    p.add_argument("--max-prompt-tokens", type=int, dest="max_prompt_tokens")
    p.add_argument("--unsure-policy", choices=["keep_flagged", "drop"], dest="unsure_policy")
    p.add_argument("--distractor-retries", type=int, dest="distractor_retries")
    p.add_argument("--allow-domain", action="append", dest="allow_domain")
    p.add_argument("--parallelism", type=int)
    p.set_defaults(func=cmd_augment)

    p = sub.add_parser("split", help="country-stratified split into two halves")
    p.add_argument("--in", dest="infile", required=True)
    p.add_argument("--ratio", type=float, default=0.5)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out-a", default="half_a.jsonl")
    p.add_argument("--out-b", default="half_b.jsonl")
    p.set_defaults(func=cmd_split)

    p = sub.add_parser("emit-train", help="render mcq.jsonl into train.jsonl")
    p.add_argument("--in", dest="infile", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_emit_train)

    p = sub.add_parser("evaluate", help="score a model on an MCQ dataset")
    p.add_argument("--dataset", required=True)
    p.add_argument("--model", required=True)
    p.add_argument("--out", help="per-item records.jsonl path")
    p.add_argument("--report-out", dest="report_out", help="JSON report path")
    p.add_argument("--responses", help="score pre-generated responses.jsonl offline")
    p.add_argument("--dataset-name", dest="dataset_name")
    p.add_argument("--config")
    p.add_argument("--base-url", dest="base_url")
    p.add_argument("--cache-dir", dest="cache_dir")
    p.add_argument("--parallelism", type=int)
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("report", help="render a model-comparison Markdown table")
    p.add_argument("reports", nargs="+", help="JSON report files from evaluate")
    p.add_argument("--out")
    p.set_defaults(func=cmd_report)

    p = sub.add_parser("review-sample", help="export a seeded review sample CSV")
    p.add_argument("--in", dest="infile", required=True)
    p.add_argument("--n", type=int, default=50)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_review_sample)

    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        stream=sys.stderr,
        level=logging.DEBUG if args.verbose else logging.INFO,
        format="%(levelname)s %(name)s: %(message)s",
    )
    try:
        return args.func(args)
    except ConfigError as exc:
        log.error("configuration error: %s", exc)
        return 2
    except (ValidationError, ValueError, OSError) as exc:
        log.error("%s", exc)
        return 1


if __name__ == "__main__":
    sys.exit(main())
