"""Adapter training loop with per-epoch checkpointing."""
from __future__ import annotations

import json
import logging
import math
import shutil
from pathlib import Path

import torch
import torch.nn.functional as F

from .config import TrainConfig
from .data import DataError, load_train_file
from .modeling import (
    PAD_ID,
    ModelConfig,
    adapter_state_dict,
    apply_lora,
    build_base_model,
    encode,
    quantize_model_4bit,
    trainable_parameter_fraction,
)

log = logging.getLogger(__name__)


class LoadError(RuntimeError):
    pass


def build_model(cfg: TrainConfig, model_cfg: ModelConfig | None = None):
    model = build_base_model(cfg.seed, model_cfg)
    if cfg.quantize_4bit:
        model = quantize_model_4bit(model)
    return apply_lora(model, cfg.lora_rank, cfg.lora_alpha, cfg.lora_dropout)


def _batches(examples, cfg: TrainConfig, max_len: int):
    for start in range(0, len(examples), cfg.batch_size):
        chunk = examples[start : start + cfg.batch_size]
        encoded = [encode(ex.text, max_len) for ex in chunk]
        width = max(len(e) for e in encoded)
        ids = torch.full((len(chunk), width), PAD_ID, dtype=torch.long)
        for row, e in enumerate(encoded):
            ids[row, : len(e)] = torch.tensor(e, dtype=torch.long)
        yield ids


def _loss(model, ids):
    logits = model(ids)
    return F.cross_entropy(
        logits[:, :-1].reshape(-1, logits.shape[-1]),
        ids[:, 1:].reshape(-1),
        ignore_index=PAD_ID,
    )


def _save_checkpoint(model, cfg: TrainConfig, model_cfg: ModelConfig, path: Path):
    path.mkdir(parents=True, exist_ok=True)
    torch.save(adapter_state_dict(model), path / "adapter.pt")
    (path / "config.json").write_text(
        json.dumps({"train": cfg.to_dict(), "model": model_cfg.to_dict()}, indent=2) + "\n",
        encoding="utf-8",
    )


def train(
    data_path: str | Path,
    cfg: TrainConfig,
    out_dir: str | Path,
    model_cfg: ModelConfig | None = None,
    max_steps: int | None = None,
    epoch_score_fn=None,
) -> Path:
    """Train adapters on train.jsonl; a checkpoint is written at the end
    of every epoch and the best one is kept at ``<out_dir>/best``.

    Checkpoint selection uses ``epoch_score_fn(checkpoint_dir) -> float``
    (higher is better, typically dev-set accuracy) when given, else the
    lowest epoch-mean training loss. ``max_steps`` caps total optimizer
    steps for smoke runs.
    """
    cfg.validate()
    examples = load_train_file(data_path)
    model_cfg = model_cfg or ModelConfig()
    out_dir = Path(out_dir)

    torch.manual_seed(cfg.seed)
    model = build_model(cfg, model_cfg)
    log.info(
        "trainable fraction: %.2f%% (%d examples, quantize_4bit=%s)",
        100 * trainable_parameter_fraction(model),
        len(examples),
        cfg.quantize_4bit,
    )
    optimizer = torch.optim.AdamW(
        [p for p in model.parameters() if p.requires_grad], lr=cfg.learning_rate
    )

    best_score = -math.inf
    best_path = out_dir / "best"
    steps = 0
    stop = False
    losses: list[float] = []
    for epoch in range(1, cfg.epochs + 1):
        model.train()
        epoch_losses = []
        optimizer.zero_grad()
        accumulated = 0
        for ids in _batches(examples, cfg, model_cfg.max_len):
            loss = _loss(model, ids)
            if not torch.isfinite(loss):
                raise DataError(f"non-finite training loss at step {steps}")
            (loss / cfg.grad_accum_steps).backward()
            accumulated += 1
            loss_value = float(loss.detach())
            epoch_losses.append(loss_value)
            losses.append(loss_value)
            log.info("epoch %d step %d loss %.4f", epoch, steps, loss_value)
            if accumulated == cfg.grad_accum_steps:
                optimizer.step()
                optimizer.zero_grad()
                accumulated = 0
                steps += 1
                if max_steps is not None and steps >= max_steps:
                    stop = True
                    break
        if accumulated and not stop:
            optimizer.step()
            optimizer.zero_grad()
            steps += 1
            stop = max_steps is not None and steps >= max_steps

        checkpoint = out_dir / f"epoch-{epoch}"
        _save_checkpoint(model, cfg, model_cfg, checkpoint)
        if epoch_score_fn is not None:
            score = float(epoch_score_fn(checkpoint))
        else:
            score = -(sum(epoch_losses) / max(1, len(epoch_losses)))
        log.info("epoch %d checkpoint score %.4f", epoch, score)
        if score > best_score:
            best_score = score
            if best_path.exists():
                shutil.rmtree(best_path)
            shutil.copytree(checkpoint, best_path)
        if stop:
            break

    (out_dir / "losses.json").write_text(json.dumps(losses) + "\n", encoding="utf-8")
    return best_path


def load_checkpoint(checkpoint_dir: str | Path):
    """Rebuild the base model from its seed and load adapter weights."""
    checkpoint_dir = Path(checkpoint_dir)
    try:
        meta = json.loads((checkpoint_dir / "config.json").read_text(encoding="utf-8"))
        cfg = TrainConfig.from_dict(meta["train"])
        model_cfg = ModelConfig(**meta["model"])
        state = torch.load(checkpoint_dir / "adapter.pt", weights_only=True)
    except (OSError, ValueError, KeyError, TypeError) as exc:
        raise LoadError(f"cannot load checkpoint {checkpoint_dir}: {exc}") from exc
    model = build_model(cfg, model_cfg)
    missing, unexpected = model.load_state_dict(state, strict=False)
    if unexpected or any("lora_" in k for k in missing):
        raise LoadError(f"adapter state mismatch: missing={missing} unexpected={unexpected}")
    model.eval()
    return model, cfg, model_cfg
