"""Prompt texts for the three augmentation LLM calls.

Placeholders ({question}, {answer}) are substituted with str.replace,
not str.format, because the surrounding prompt text contains literal
braces.
"""

COUNTRY_SYSTEM = "You are an AI assistant for country identification."

COUNTRY_USER = """You are an expert in Arab culture and geography.
Given a question in Arabic, your task is to identify the most relevant Arab
country that the question is likely referring to, either explicitly or implicitly.

Always return the name of a single Arab country in English
(e.g., Qatar, Egypt, Saudi Arabia, UAE, Morocco, etc.).

Even if the country is not directly named, use cultural, linguistic,
environmental, or historical clues to infer the closest matching Arab country.

Return your response in JSON format with a single field "country"
containing only the country name.

QUESTION: "{question}"
"""

ASSESS_SYSTEM = """You are an advanced NLP annotation assistant specializing in evaluating Arabic questions and answers. Your role is to classify questions, assess answers, and refine them for conciseness and accuracy.

Follow the structured guidelines for classification:
- **Step 1: Evaluate and refine the answer**, ensuring it is concise and factually correct.
- **Step 2: Determine if the question-answer pair is relevant to the Arabic culture.

### **Annotation Task**
You are an expert Arabic NLP QA annotator. Your task is to evaluate and refine a question-answer pair based on the following steps:

### **Step 1: Evaluate and Edit the Answer**
- **Answer Evaluation:**
  - **Correct:** Fully and accurately answers the question.
  - **Incorrect:** Does not answer the question or contains false information.
  - **Partially Correct:** Provides some relevant information but is incomplete.
- **Answer Refinement:**
  - If correct or partially correct but **too long, vague, or redundant**, rewrite it to be **concise and precise**.

### **Step 2: Determine Arabic cultural relevance**
- **Yes:** The question explicitly refers to the Arabic culture.
- **No:** The question is about a different culture than Arabic.
- **Unsure:** It is difficult to determine whether the question refers to any specific culture.
"""

ASSESS_USER = """### **Input Data:**

Question: {question}
Answer: {answer}

### **Your Response in JSON format:**
{
"answer_evaluation": "Correct" or "Incorrect" or "Partially Correct",
"corrected_answer": "Provide a concise, precise answer if needed, otherwise leave empty.",
"culture_relevance": "Yes" or "No" or "Unsure"
}
"""

DISTRACTOR_SYSTEM = """You are an expert in educational content creation specializing in Arabic language and culture. Your task is to convert culturally relevant question-answer pairs into multiple-choice questions (MCQs) by generating three plausible, culturally relevant, and contextually appropriate incorrect answer options (distractors) in Arabic for each question.

Requirements:
- All options must be in Arabic.
- Distractors must be plausible and relevant to the question.
- Avoid answers that are obviously incorrect, unrelated, or closely paraphrase the correct answer.
- Output only the 3 incorrect answers in the following JSON format:

JSON Output format:
{
"A.": "",
"B": "",
"C": ""
}
"""

DISTRACTOR_USER = """Given the following question and its correct answer, generate 3 plausible but incorrect answer options in Arabic.

Question: "{question}"
Correct Answer: "{answer}"
"""


def fill(template: str, **fields: str) -> str:
    out = template
    for name, value in fields.items():
        out = out.replace("{" + name + "}", value)
    return out
