import pytest

from mcqforge.evaluator import (
    DuplicateModelDataset,
    EmptyEvalSet,
    EvalRecord,
    EvalReport,
    accuracy,
    compare_models,
    evaluate_model,
    extract_choice,
    score_responses,
)
from mcqforge.gateway import ChatResponse
from mcqforge.model import MCQItem, read_jsonl
from mcqforge.promptkit import letter_for_index

OPTIONS = ("الدوحة", "الرياض", "مسقط قديمة جدا", "المنامة")


@pytest.mark.parametrize(
    "raw,expected",
    [
        ("B", 1),
        ("b", 1),
        ("C.", 2),
        ("D)", 3),
        ("  A  ", 0),
        ("الإجابة: C.", 2),
        ("The answer is (B) obviously", 1),
        ("اخترت الدوحة", 0),
        ("مسقط قديمة جدا هي الجواب", 2),
        ("لا أعرف الجواب", None),
        ("", None),
    ],
)
def test_extract_choice_cascade(raw, expected):
    assert extract_choice(raw, OPTIONS) == expected


def test_extract_choice_prefers_longest_option_match():
    # both options quoted: the longer one wins
    raw = "مسقط قديمة جدا وليست المنامة"
    options = ("الدوحة", "المنامة", "مسقط قديمة جدا", "غيرها")
    assert extract_choice(raw, options) == 2


def record(correct: bool) -> EvalRecord:
    return EvalRecord("i", "m", "x", 0 if correct else None, correct)


@pytest.mark.parametrize(
    "n_correct,n_total,expected",
    [(362, 500, 72.40), (403, 500, 80.60), (0, 7, 0.00), (1, 3, 33.33), (2, 3, 66.67)],
)
def test_accuracy_arithmetic(n_correct, n_total, expected):
    records = [record(True)] * n_correct + [record(False)] * (n_total - n_correct)
    assert accuracy(records) == expected


def test_accuracy_rounds_half_up():
    # 1/8 = 12.5% -> 12.50; 1/16 = 6.25 -> 6.25; 5/8 -> 62.50
    assert accuracy([record(True)] + [record(False)] * 7) == 12.50
    # 0.005 boundary: 241/800 = 30.125 -> 30.13 (half-up)
    assert accuracy([record(True)] * 241 + [record(False)] * 559) == 30.13


def test_accuracy_permutation_invariant():
    records = [record(True), record(False), record(True)]
    assert accuracy(records) == accuracy(list(reversed(records)))


def test_accuracy_empty():
    with pytest.raises(EmptyEvalSet):
        accuracy([])


def make_items(n: int) -> list[MCQItem]:
    items = []
    for i in range(n):
        items.append(
            MCQItem(
                id=f"e{i:04d}",
                question=f"سؤال {i}؟",
                options=(f"صحيح {i}", f"خطأ1 {i}", f"خطأ2 {i}", f"خطأ3 {i}"),
                gold_index=i % 4,
            )
        )
    return items


class LetterGateway:
    """Replies with a fixed letter, or the gold letter when fed one."""

    def __init__(self, items=None, letter=None):
        self.model = "mock"
        self.letter = letter
        self.by_question = {i.question: letter_for_index(i.gold_index) for i in items or []}

    def chat(self, request):
        reply = self.letter
        if reply is None:
            reply = next(v for q, v in self.by_question.items() if q in request.user)
        return ChatResponse(content=reply, model=self.model)


def test_always_gold_mock_is_100(tmp_path):
    items = make_items(40)
    report, records = evaluate_model(
        items, LetterGateway(items=items), "mock", "dev", records_path=tmp_path / "records.jsonl"
    )
    assert report.accuracy_pct == 100.00
    assert report.n_unparsed == 0
    saved = read_jsonl(tmp_path / "records.jsonl")
    assert [r["item_id"] for r in saved] == sorted(i.id for i in items)
    assert all(r.correct for r in records)


def test_always_a_matches_gold_at_a_fraction():
    items = make_items(2000)
    gold_at_a = sum(1 for i in items if i.gold_index == 0)
    report, _ = evaluate_model(items, LetterGateway(letter="A"), "mock", "dev")
    assert report.n_correct == gold_at_a
    assert report.accuracy_pct == accuracy(
        [record(True)] * gold_at_a + [record(False)] * (2000 - gold_at_a)
    )


def test_empty_dataset():
    with pytest.raises(EmptyEvalSet):
        evaluate_model([], LetterGateway(letter="A"), "mock")


def test_score_consistency_invariant(tmp_path):
    items = make_items(100)
    _, records = evaluate_model(items, LetterGateway(letter="B"), "mock", "dev")
    gold = {i.id: i.gold_index for i in items}
    for r in records:
        if r.correct:
            assert r.predicted_index == gold[r.item_id]
        if r.predicted_index is None:
            assert not r.correct


def test_score_responses_offline(tmp_path):
    items = make_items(8)
    responses = {i.id: letter_for_index(i.gold_index) for i in items[:6]}
    report, records = score_responses(items, responses, "toy", "dev")
    assert report.n_items == 8
    assert report.n_correct == 6
    assert report.n_unparsed == 2  # missing responses count as unparsed
    assert report.accuracy_pct == 75.00


def make_report(model, dataset, pct):
    return EvalReport(model, dataset, 100, int(pct), 0, pct)


def test_compare_models_table_layout():
    models = [f"model-{i}" for i in range(8)]
    reports = []
    for i, m in enumerate(models):
        reports.append(make_report(m, "dev", 60.0 + i))
        reports.append(make_report(m, "test", 70.0 - i))
    table = compare_models(reports)
    lines = table.strip().splitlines()
    assert lines[0] == "| Model | dev | test |"
    assert len(lines) == 2 + 8
    assert "**67.00**" in lines[-1]  # best dev is the last model
    assert "**70.00**" in lines[2]  # best test is the first model


def test_compare_models_single_and_missing_cells():
    table = compare_models([make_report("m", "dev", 50.0)])
    assert "**50.00**" in table
    table = compare_models([make_report("m1", "dev", 50.0), make_report("m2", "test", 60.0)])
    assert "—" in table


def test_compare_models_duplicate():
    with pytest.raises(DuplicateModelDataset):
        compare_models([make_report("m", "dev", 50.0), make_report("m", "dev", 51.0)])


def test_reevaluation_determinism(tmp_path):
    from mcqforge.gateway import CachingGateway, ResponseCache

    items = make_items(30)

    class CountingLetterGateway(LetterGateway):
        calls = 0

        def chat(self, request):
            type(self).calls += 1
            return super().chat(request)

    gateway = CachingGateway(CountingLetterGateway(letter="A"), ResponseCache(tmp_path / "c"))
    p1, p2 = tmp_path / "r1.jsonl", tmp_path / "r2.jsonl"
    evaluate_model(items, gateway, "mock", "dev")  # cold run warms the cache
    evaluate_model(items, gateway, "mock", "dev", records_path=p1)
    evaluate_model(items, gateway, "mock", "dev", records_path=p2)
    assert CountingLetterGateway.calls == 30
    assert p1.read_bytes() == p2.read_bytes()
