"""Tiny random-weight causal LM with low-rank adapters.

The base model is a small GPT-style transformer over raw UTF-8 bytes,
built procedurally from a seed so checkpoints only need to carry the
adapter weights. Linear layers can be swapped for a 4-bit quantized
variant before adapters are attached.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, asdict

import torch
import torch.nn as nn
import torch.nn.functional as F

PAD_ID = 256
VOCAB_SIZE = 257


def encode(text: str, max_len: int | None = None) -> list[int]:
    ids = list(text.encode("utf-8"))
    return ids[:max_len] if max_len else ids


def decode(ids: list[int]) -> str:
    return bytes(i for i in ids if 0 <= i < 256).decode("utf-8", errors="replace")


@dataclass(frozen=True)
class ModelConfig:
    d_model: int = 512
    n_layers: int = 2
    n_heads: int = 8
    d_ff: int = 2048
    max_len: int = 512

    def to_dict(self) -> dict:
        return asdict(self)


class Quantized4BitLinear(nn.Module):
    """Frozen linear layer with weights stored as 4-bit codes plus a
    per-output-channel scale; dequantized on the fly in forward."""

    def __init__(self, linear: nn.Linear):
        super().__init__()
        self.in_features = linear.in_features
        self.out_features = linear.out_features
        with torch.no_grad():
            weight = linear.weight.detach()
            scale = weight.abs().amax(dim=1, keepdim=True) / 7.0
            scale = torch.clamp(scale, min=1e-8)
            codes = torch.clamp(torch.round(weight / scale), -8, 7).to(torch.int8)
        self.register_buffer("codes", codes)
        self.register_buffer("scale", scale)
        if linear.bias is not None:
            self.register_buffer("bias", linear.bias.detach())
        else:
            self.bias = None

    def forward(self, x):
        weight = self.codes.to(x.dtype) * self.scale
        return F.linear(x, weight, self.bias)


class LoRALinear(nn.Module):
    """Adapter around a frozen (possibly quantized) linear layer."""

    def __init__(self, base: nn.Module, rank: int, alpha: int, dropout: float):
        super().__init__()
        self.base = base
        for p in self.base.parameters():
            p.requires_grad_(False)
        in_features = base.in_features
        out_features = base.out_features
        self.lora_a = nn.Parameter(torch.empty(rank, in_features))
        self.lora_b = nn.Parameter(torch.zeros(out_features, rank))
        nn.init.kaiming_uniform_(self.lora_a, a=math.sqrt(5))
        self.scaling = alpha / rank
        self.dropout = nn.Dropout(dropout)

    def forward(self, x):
        delta = self.dropout(x) @ self.lora_a.T @ self.lora_b.T
        return self.base(x) + delta * self.scaling


class Block(nn.Module):
    def __init__(self, cfg: ModelConfig):
        super().__init__()
        self.n_heads = cfg.n_heads
        self.ln1 = nn.LayerNorm(cfg.d_model)
        self.q_proj = nn.Linear(cfg.d_model, cfg.d_model, bias=False)
        self.k_proj = nn.Linear(cfg.d_model, cfg.d_model, bias=False)
        self.v_proj = nn.Linear(cfg.d_model, cfg.d_model, bias=False)
        self.o_proj = nn.Linear(cfg.d_model, cfg.d_model, bias=False)
        self.ln2 = nn.LayerNorm(cfg.d_model)
        self.up_proj = nn.Linear(cfg.d_model, cfg.d_ff, bias=False)
        self.down_proj = nn.Linear(cfg.d_ff, cfg.d_model, bias=False)

    def forward(self, x):
        b, t, d = x.shape
        h = self.ln1(x)

        def heads(proj):
            return proj(h).view(b, t, self.n_heads, d // self.n_heads).transpose(1, 2)

        attn = F.scaled_dot_product_attention(
            heads(self.q_proj), heads(self.k_proj), heads(self.v_proj), is_causal=True
        )
        x = x + self.o_proj(attn.transpose(1, 2).reshape(b, t, d))
        x = x + self.down_proj(F.gelu(self.up_proj(self.ln2(x))))
        return x


class TinyCausalLM(nn.Module):
    """Byte-level causal LM small enough for desk-scale smoke runs."""

    def __init__(self, cfg: ModelConfig):
        super().__init__()
        self.cfg = cfg
        self.tok_emb = nn.Embedding(VOCAB_SIZE, cfg.d_model)
        self.pos_emb = nn.Embedding(cfg.max_len, cfg.d_model)
        self.blocks = nn.ModuleList(Block(cfg) for _ in range(cfg.n_layers))
        self.ln_f = nn.LayerNorm(cfg.d_model)
        self.lm_head = nn.Linear(cfg.d_model, VOCAB_SIZE, bias=False)

    def forward(self, ids):
        t = ids.shape[1]
        pos = torch.arange(t, device=ids.device)
        x = self.tok_emb(ids) + self.pos_emb(pos)
        for block in self.blocks:
            x = block(x)
        return self.lm_head(self.ln_f(x))

    @torch.no_grad()
    def generate(self, prompt_ids: list[int], max_new_tokens: int = 8) -> list[int]:
        ids = list(prompt_ids)[-(self.cfg.max_len - max_new_tokens):]
        out = []
        for _ in range(max_new_tokens):
            logits = self(torch.tensor([ids[-self.cfg.max_len:]], dtype=torch.long))
            next_id = int(logits[0, -1].argmax())
            if next_id == PAD_ID:
                break
            out.append(next_id)
            ids.append(next_id)
        return out


LORA_TARGETS = ("q_proj", "v_proj")


def build_base_model(seed: int, model_cfg: ModelConfig | None = None) -> TinyCausalLM:
    """Deterministic random-weight base model; the seed fully determines
    the weights, so checkpoints carry adapters only."""
    model_cfg = model_cfg or ModelConfig()
    generator_state = torch.random.get_rng_state()
    torch.manual_seed(seed)
    model = TinyCausalLM(model_cfg)
    torch.random.set_rng_state(generator_state)
    return model


def quantize_model_4bit(model: TinyCausalLM) -> TinyCausalLM:
    """Swap every projection linear in the blocks for its 4-bit variant;
    embeddings and lm_head stay full precision."""
    for block in model.blocks:
        for name in ("q_proj", "k_proj", "v_proj", "o_proj", "up_proj", "down_proj"):
            setattr(block, name, Quantized4BitLinear(getattr(block, name)))
    return model


def apply_lora(model: TinyCausalLM, rank: int, alpha: int, dropout: float) -> TinyCausalLM:
    """Freeze the whole model, then attach trainable adapters to the
    attention query/value projections."""
    for p in model.parameters():
        p.requires_grad_(False)
    for block in model.blocks:
        for name in LORA_TARGETS:
            setattr(block, name, LoRALinear(getattr(block, name), rank, alpha, dropout))
    return model


def trainable_parameter_fraction(model: nn.Module) -> float:
    trainable = sum(p.numel() for p in model.parameters() if p.requires_grad)
    total = sum(p.numel() for p in model.parameters())
    return trainable / total


def adapter_state_dict(model: nn.Module) -> dict:
    return {k: v for k, v in model.state_dict().items() if "lora_" in k}
