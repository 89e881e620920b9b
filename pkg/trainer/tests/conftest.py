import pytest

from mcqtrainer.data import write_jsonl
from mcqtrainer.modeling import ModelConfig

QUESTIONS = [
    ("ما هي عاصمة قطر؟", ("الدوحة", "الرياض", "مسقط", "المنامة"), 0),
    ("ما هو الطبق الوطني في السعودية؟", ("المنسف", "الكبسة", "الكسكس", "الهريس"), 1),
    ("في أي بلد يقع نهر النيل؟", ("العراق", "المغرب", "مصر", "عمان"), 2),
    ("ما هي عملة الكويت؟", ("الدرهم", "الريال", "الجنيه", "الدينار"), 3),
    ("أين تقع مدينة فاس؟", ("المغرب", "تونس", "ليبيا", "السودان"), 0),
    ("ما هو أكبر بلد عربي مساحة؟", ("مصر", "الجزائر", "السعودية", "ليبيا"), 1),
    ("ما هي لغة الضاد؟", ("الفارسية", "التركية", "العربية", "الأمازيغية"), 2),
    ("أين يقع جامع الزيتونة؟", ("الرباط", "القاهرة", "بغداد", "تونس"), 3),
]


@pytest.fixture
def small_model_cfg() -> ModelConfig:
    return ModelConfig(d_model=64, n_layers=1, n_heads=4, d_ff=128, max_len=256)


@pytest.fixture
def train_file(tmp_path):
    path = tmp_path / "train.jsonl"
    records = []
    for i, (question, options, gold) in enumerate(QUESTIONS):
        lines = [question] + [f"{letter}. {o}" for letter, o in zip("ABCD", options)]
        records.append({"id": f"t{i:02d}", "text": "\n".join(lines) + f"\n{'ABCD'[gold]}"})
    write_jsonl(records, path)
    return path


@pytest.fixture
def mcq_file(tmp_path):
    path = tmp_path / "mcq.jsonl"
    write_jsonl(
        (
            {"id": f"m{i:02d}", "question": q, "options": list(options), "gold_index": gold}
            for i, (q, options, gold) in enumerate(QUESTIONS)
        ),
        path,
    )
    return path
