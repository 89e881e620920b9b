import json
import threading

import pytest

from mcqforge import prompts
from mcqforge.gateway import ChatResponse
from mcqforge.model import MCQItem, QAPair


@pytest.fixture
def arabic_items() -> list[MCQItem]:
    return [
        MCQItem(
            id="fx-001",
            question="ما هي عاصمة قطر؟",
            options=("الدوحة", "الرياض", "مسقط", "المنامة"),
            gold_index=0,
            country="QA",
        ),
        MCQItem(
            id="fx-002",
            question="ما هو الطبق الوطني في السعودية؟",
            options=("المنسف", "الكبسة", "الكسكس", "الهريس"),
            gold_index=1,
            country="SA",
        ),
        MCQItem(
            id="fx-003",
            question="أي مدينة تُلقب بعروس البحر الأبيض المتوسط؟",
            options=("طرابلس", "تونس", "بيروت\nعاصمة لبنان", "الإسكندرية"),
            gold_index=3,
            country="EG",
        ),
    ]


class ReplayGateway:
    """Scripted gateway: answers the three augmentation prompts from
    canned per-question tables; records every call."""

    def __init__(
        self,
        questions: list[str],
        countries: dict[str, str] | None = None,
        assessments: dict[str, dict] | None = None,
        distractors: dict[str, dict] | None = None,
        model: str = "mock",
    ):
        self.questions = questions
        self.countries = countries or {}
        self.assessments = assessments or {}
        self.distractors = distractors or {}
        self.model = model
        self.calls: list[tuple[str, str]] = []
        self._lock = threading.Lock()

    def _question_in(self, text: str) -> str:
        for q in self.questions:
            if q in text:
                return q
        raise AssertionError(f"no known question in prompt: {text[:120]!r}")

    def chat(self, request) -> ChatResponse:
        q = self._question_in(request.user)
        if request.system == prompts.COUNTRY_SYSTEM:
            kind = "country"
            content = json.dumps({"country": self.countries.get(q, "Qatar")}, ensure_ascii=False)
        elif request.system == prompts.ASSESS_SYSTEM:
            kind = "assess"
            verdict = self.assessments.get(
                q, {"answer_evaluation": "Correct", "corrected_answer": "", "culture_relevance": "Yes"}
            )
            content = json.dumps(verdict, ensure_ascii=False)
        elif request.system == prompts.DISTRACTOR_SYSTEM:
            kind = "distractor"
            reply = self.distractors.get(
                q, {"A.": f"بديل أول {q}", "B": f"بديل ثان {q}", "C": f"بديل ثالث {q}"}
            )
            content = json.dumps(reply, ensure_ascii=False)
        else:
            raise AssertionError(f"unexpected system prompt: {request.system[:60]!r}")
        with self._lock:
            self.calls.append((kind, q))
        return ChatResponse(content=content, model=self.model)


@pytest.fixture
def pipeline_fixture(tmp_path):
    """20 QA pairs plus a scripted gateway: 3 fail the answer check,
    2 fail cultural relevance, 1 trips the token guard."""
    pairs = []
    for i in range(1, 21):
        answer = f"الإجابة رقم {i:02d}"
        if i == 20:  # long enough to exceed the 512-token guard
            answer = " ".join(f"كلمة{j}" for j in range(500))
        pairs.append(
            QAPair(id=f"q{i:02d}", question=f"سؤال تجريبي رقم {i:02d}؟", answer=answer, source_tag="palm")
        )
    assessments = {}
    for i in (3, 7, 11):
        assessments[pairs[i - 1].question] = {
            "answer_evaluation": "Incorrect",
            "corrected_answer": "",
            "culture_relevance": "Yes",
        }
    for i in (5, 14):
        assessments[pairs[i - 1].question] = {
            "answer_evaluation": "Correct",
            "corrected_answer": "",
            "culture_relevance": "No",
        }
    gateway = ReplayGateway([p.question for p in pairs], assessments=assessments)
    qa_path = tmp_path / "qa.jsonl"
    from mcqforge.model import write_jsonl

    write_jsonl((p.to_dict() for p in pairs), qa_path)
    return pairs, gateway, qa_path
