import json

import pytest
from hypothesis import given, strategies as st

from mcqforge.model import (
    ARAB_COUNTRIES,
    ValidationError,
    canonical_line,
    load_qa_jsonl,
    parse_assessment,
    parse_country,
    validate_mcq,
    validate_qa,
    write_jsonl,
)


def test_minimal_valid_qa():
    qa = validate_qa({"id": "p1", "question": "س؟", "answer": "ج", "source_tag": "palm"})
    assert qa.id == "p1"
    assert qa.source_tag == "palm"
    assert qa.flags == frozenset()


def test_whitespace_only_question_rejected():
    with pytest.raises(ValidationError) as err:
        validate_qa({"id": "p2", "question": "  ", "answer": "ج"})
    assert "EmptyText" in err.value.codes()


def test_missing_fields_all_reported():
    with pytest.raises(ValidationError) as err:
        validate_qa({})
    fields = {p.field for p in err.value.problems}
    assert {"id", "question", "answer"} <= fields


def test_bad_url_rejected():
    with pytest.raises(ValidationError) as err:
        validate_qa({"id": "x", "question": "q", "answer": "a", "source_url": "not-a-url"})
    assert "BadUrl" in err.value.codes()


def test_1926_records_load_without_error(tmp_path):
    path = tmp_path / "palm.jsonl"
    write_jsonl(
        (
            {"id": f"palm-{i:04d}", "question": f"سؤال {i}", "answer": f"جواب {i}", "source_tag": "palm"}
            for i in range(1926)
        ),
        path,
    )
    assert len(load_qa_jsonl(path)) == 1926


def test_duplicate_id_detected(tmp_path):
    path = tmp_path / "dup.jsonl"
    rec = {"id": "p1", "question": "q", "answer": "a", "source_tag": "palm"}
    write_jsonl([rec, rec], path)
    with pytest.raises(ValidationError) as err:
        load_qa_jsonl(path)
    assert "DuplicateId" in err.value.codes()


def test_valid_mcq():
    item = validate_mcq(
        {"id": "m1", "question": "q", "options": ["w", "x", "y", "z"], "gold_index": 2}
    )
    assert item.gold_option == "y"


@pytest.mark.parametrize(
    "record,code",
    [
        ({"id": "m", "question": "q", "options": ["a", "b", "c"], "gold_index": 0}, "OptionCountError"),
        ({"id": "m", "question": "q", "options": ["a", "b", "c", "d"], "gold_index": 4}, "GoldIndexOutOfRange"),
        ({"id": "m", "question": "q", "options": ["a", "a ", "c", "d"], "gold_index": 0}, "DuplicateOption"),
    ],
)
def test_mcq_invariant_violations(record, code):
    with pytest.raises(ValidationError) as err:
        validate_mcq(record)
    assert code in err.value.codes()


def test_gold_mismatch_against_lineage_answer():
    record = {
        "id": "m",
        "question": "q",
        "options": ["a", "b", "c", "d"],
        "gold_index": 1,
        "lineage": {"source_qa_id": "q1", "distractor_model": "m", "shuffle_seed": 0, "answer": "a"},
    }
    with pytest.raises(ValidationError) as err:
        validate_mcq(record)
    assert "GoldMismatch" in err.value.codes()


def test_qa_roundtrip_is_canonical():
    record = {
        "answer": "ج",
        "country": "QA",
        "id": "p1",
        "question": "س؟",
        "source_tag": "palm",
        "source_url": "https://gov.qa/page",
    }
    assert canonical_line(validate_qa(record).to_dict()) == canonical_line(record)


@given(
    st.builds(
        dict,
        id=st.text(min_size=1, max_size=8),
        question=st.text(min_size=1).filter(lambda s: s.strip()),
        answer=st.text(min_size=1).filter(lambda s: s.strip()),
        source_tag=st.sampled_from(["palm", "palmx_ext", "user"]),
    )
)
def test_qa_roundtrip_property(record):
    qa = validate_qa(record)
    assert canonical_line(qa.to_dict()) == canonical_line(record)
    assert validate_qa(json.loads(canonical_line(qa.to_dict()))) == qa


@given(
    options=st.lists(st.text(min_size=1, max_size=10).filter(lambda s: s.strip()), min_size=0, max_size=6),
    gold_index=st.integers(min_value=-2, max_value=6),
)
def test_mcq_validation_property(options, gold_index):
    record = {"id": "m", "question": "q", "options": options, "gold_index": gold_index}
    try:
        item = validate_mcq(record)
    except ValidationError:
        return
    assert len(item.options) == 4
    assert 0 <= item.gold_index <= 3
    from mcqforge.model import normalize_text

    assert len({normalize_text(o) for o in item.options}) == 4


def test_assessment_case_normalization():
    a = parse_assessment(
        {"answer_evaluation": "Partially Correct", "corrected_answer": "x", "culture_relevance": "yes"}
    )
    assert a.answer_evaluation == "PartiallyCorrect"
    assert a.culture_relevance == "Yes"


def test_assessment_illegal_enum():
    with pytest.raises(ValidationError):
        parse_assessment(
            {"answer_evaluation": "Maybe", "corrected_answer": "", "culture_relevance": "Yes"}
        )


def test_country_table_has_22_entries():
    assert len(ARAB_COUNTRIES) == 22
    assert len({code for _, code in ARAB_COUNTRIES}) == 22


def test_country_aliases_and_unknown():
    assert parse_country("Qatar").code == "QA"
    assert parse_country("UAE").code == "AE"
    assert parse_country("saudi arabia").name == "Saudi Arabia"
    with pytest.raises(ValidationError) as err:
        parse_country("France")
    assert "UnknownCountry" in err.value.codes()
