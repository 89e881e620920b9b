"""mcqforge: build multiple-choice benchmarks from free-form QA pairs
and evaluate chat models on them."""

from .model import (
    Assessment,
    CountryTag,
    DatasetSplit,
    MCQItem,
    QAPair,
    ValidationError,
    validate_mcq,
    validate_qa,
)
from .gateway import ChatRequest, ChatResponse, extract_json

__version__ = "0.1.0"

__all__ = [
    "Assessment",
    "ChatRequest",
    "ChatResponse",
    "CountryTag",
    "DatasetSplit",
    "MCQItem",
    "QAPair",
    "ValidationError",
    "extract_json",
    "validate_mcq",
    "validate_qa",
    "__version__",
]
