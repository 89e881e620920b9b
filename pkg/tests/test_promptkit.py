from pathlib import Path

import pytest

from mcqforge.model import MCQItem, ValidationError
from mcqforge.promptkit import (
    TrainRecord,
    emit_train_jsonl,
    index_for_letter,
    letter_for_index,
    load_train_jsonl,
    render_eval_messages,
    render_train_example,
    to_train_record,
)

GOLDEN = Path(__file__).parent / "golden"

SYSTEM_SENTENCE = (
    "You're a helpful Arabic assistant that answers multiple-choice questions "
    "accurately. Choose the best answer based only on the given question and options."
)


def test_train_render_matches_golden_bytes(arabic_items):
    for item in arabic_items:
        rendered = render_train_example(item)
        golden = (GOLDEN / f"{item.id}_train.txt").read_text(encoding="utf-8")
        assert rendered.text == golden


def test_eval_render_matches_golden_bytes(arabic_items):
    for item in arabic_items:
        system, user = render_eval_messages(item)
        assert system == SYSTEM_SENTENCE
        assert user == (GOLDEN / f"{item.id}_eval_user.txt").read_text(encoding="utf-8")


def test_prompt_text_is_strict_prefix(arabic_items):
    for item in arabic_items:
        rendered = render_train_example(item)
        assert rendered.text.startswith(rendered.prompt_text)
        assert len(rendered.text) > len(rendered.prompt_text)
        assert rendered.text.endswith("<end_of_turn>")


def test_gold_index_changes_only_final_letter(arabic_items):
    item = arabic_items[0]
    other = MCQItem(
        id=item.id, question=item.question, options=item.options, gold_index=2, country=item.country
    )
    a, b = render_train_example(item), render_train_example(other)
    assert a.prompt_text == b.prompt_text
    assert a.text != b.text
    assert a.text[len(a.prompt_text)] == "A"
    assert b.text[len(b.prompt_text)] == "C"


def test_newline_option_rendered_verbatim(arabic_items):
    item = arabic_items[2]  # option C contains a newline
    rendered = render_train_example(item)
    assert "بيروت\nعاصمة لبنان" in rendered.text
    assert rendered.text.count("<end_of_turn>") == 2


def test_eval_user_has_four_label_lines(arabic_items):
    _, user = render_eval_messages(arabic_items[0])
    labels = [line[:3] for line in user.splitlines() if line[:3] in ("A. ", "B. ", "C. ", "D. ")]
    assert labels == ["A. ", "B. ", "C. ", "D. "]
    assert user.endswith("Answer with the letter only.")


def test_render_is_pure(arabic_items):
    item = arabic_items[1]
    assert render_train_example(item) == render_train_example(item)
    assert render_eval_messages(item) == render_eval_messages(item)


def test_letter_bijection():
    for index in range(4):
        assert index_for_letter(letter_for_index(index)) == index
    assert [letter_for_index(i) for i in range(4)] == ["A", "B", "C", "D"]


def test_train_jsonl_roundtrip(tmp_path, arabic_items):
    records = [to_train_record(render_train_example(m)) for m in arabic_items]
    path = tmp_path / "train.jsonl"
    assert emit_train_jsonl(records, path) == 3
    assert load_train_jsonl(path) == records


def test_train_jsonl_line_counts(tmp_path):
    # dataset sizes from the toolkit's target corpora: 2000+500+950+22000
    path = tmp_path / "train.jsonl"
    records = (TrainRecord(id=f"t{i}", text="x") for i in range(2000 + 500 + 950 + 22000))
    assert emit_train_jsonl(records, path) == 25450
    with open(path, encoding="utf-8") as fh:
        assert sum(1 for _ in fh) == 25450


def test_malformed_line_reports_line_number(tmp_path):
    path = tmp_path / "train.jsonl"
    path.write_text('{"id":"a","text":"x"}\n{"id":"b"}\n', encoding="utf-8")
    with pytest.raises(ValidationError) as err:
        load_train_jsonl(path)
    assert "line 2" in str(err.value)
