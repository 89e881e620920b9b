"""Generate raw responses for an MCQ dataset from a trained checkpoint.

Output lines are {"item_id", "raw_response"}, one per dataset item in
dataset order, ready for offline scoring by the evaluation toolkit
(``mcqforge evaluate --responses``).
"""
from __future__ import annotations

from pathlib import Path

from .data import eval_prompt, load_mcq_file, write_jsonl
from .modeling import decode, encode
from .training import load_checkpoint


def predict(
    checkpoint_dir: str | Path,
    dataset_path: str | Path,
    out_path: str | Path,
    max_new_tokens: int = 8,
) -> int:
    model, _, model_cfg = load_checkpoint(checkpoint_dir)
    rows = load_mcq_file(dataset_path)

    def respond(row):
        prompt_ids = encode(eval_prompt(row), model_cfg.max_len - max_new_tokens)
        return decode(model.generate(prompt_ids, max_new_tokens=max_new_tokens))

    return write_jsonl(
        ({"item_id": row.id, "raw_response": respond(row)} for row in rows),
        out_path,
    )
