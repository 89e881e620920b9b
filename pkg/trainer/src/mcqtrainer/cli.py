"""CLI for the toy-scale fine-tuning companion: train, grid, predict."""
from __future__ import annotations

import argparse
import logging
import sys

from .config import ConfigError, TrainConfig, reference_grid
from .data import DataError
from .grid import grid_search, score_with_evaluator
from .predicting import predict
from .training import LoadError, train

log = logging.getLogger("mcqtrainer")


def _config_from(args) -> TrainConfig:
    return TrainConfig(
        epochs=args.epochs,
        learning_rate=args.lr,
        lora_rank=args.rank,
        lora_alpha=args.alpha,
        lora_dropout=args.dropout,
        batch_size=args.batch_size,
        grad_accum_steps=args.grad_accum,
        quantize_4bit=args.quantize_4bit,
        base_model_id=args.base_model,
        seed=args.seed,
    )


def cmd_train(args) -> int:
    cfg = _config_from(args)
    score_fn = None
    if args.dev:
        import tempfile
        from pathlib import Path

        def score_fn(checkpoint):
            with tempfile.TemporaryDirectory() as tmp:
                responses = Path(tmp) / "responses.jsonl"
                predict(checkpoint, args.dev, responses)
                return score_with_evaluator(args.dev, responses, model_name="checkpoint")

    best = train(args.data, cfg, args.out, max_steps=args.max_steps, epoch_score_fn=score_fn)
    log.info("best checkpoint: %s", best)
    return 0


def cmd_grid(args) -> int:
    configs = reference_grid(seed=args.seed, quantize_4bit=args.quantize_4bit)
    results = grid_search(configs, args.data, args.dev, args.out, max_steps=args.max_steps)
    for result in results:
        cfg = result.config
        cell = (
            f"epochs={cfg.epochs} lr={cfg.learning_rate:g} r={cfg.lora_rank} "
            f"dropout={cfg.lora_dropout} alpha={cfg.lora_alpha}"
        )
        if result.error:
            log.info("%s -> failed: %s", cell, result.error)
        else:
            log.info("%s -> %.2f%%", cell, result.dev_accuracy_pct)
    return 0


def cmd_predict(args) -> int:
    n = predict(args.checkpoint, args.dataset, args.out, max_new_tokens=args.max_new_tokens)
    log.info("wrote %d responses -> %s", n, args.out)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="mcqforge-train", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("train", help="train adapters on train.jsonl")
    p.add_argument("--data", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--dev", help="mcq.jsonl used for best-checkpoint selection")
    p.add_argument("--epochs", type=int, default=3)
    p.add_argument("--lr", type=float, default=2e-4)
    p.add_argument("--rank", type=int, default=64)
    p.add_argument("--alpha", type=int, default=16)
    p.add_argument("--dropout", type=float, default=0.1)
    p.add_argument("--batch-size", type=int, default=4)
    p.add_argument("--grad-accum", type=int, default=4)
    p.add_argument("--quantize-4bit", action="store_true")
    p.add_argument("--base-model", default="tiny-random")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--max-steps", type=int)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("grid", help="run the reference hyperparameter grid")
    p.add_argument("--data", required=True)
    p.add_argument("--dev", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--quantize-4bit", action="store_true")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--max-steps", type=int)
    p.set_defaults(func=cmd_grid)

    p = sub.add_parser("predict", help="generate responses for an MCQ dataset")
    p.add_argument("--checkpoint", required=True)
    p.add_argument("--dataset", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--max-new-tokens", type=int, default=8)
    p.set_defaults(func=cmd_predict)

    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(stream=sys.stderr, level=logging.INFO, format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except ConfigError as exc:
        log.error("configuration error: %s", exc)
        return 2
    except (DataError, LoadError, OSError) as exc:
        log.error("%s", exc)
        return 1


if __name__ == "__main__":
    sys.exit(main())
