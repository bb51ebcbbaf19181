"""JSON Lines corpus format: one answer record per line.

Each record carries the question, the aggregated model answer, one student
answer, its SME-annotated true gaps, and the extracted triples for both
answers, so every model/student pair is self-contained.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

from .errors import ValidationError
from .graph import Triple

GROUPS = ("dir", "nodir")

_REQUIRED = (
    "question_id",
    "question",
    "model_answer",
    "student_answer_id",
    "student_answer",
    "true_gaps",
    "model_triples",
    "student_triples",
)


@dataclass(frozen=True)
class AnswerRecord:
    question_id: str
    question: str
    model_answer: str
    student_answer_id: str
    student_answer: str
    true_gaps: tuple[str, ...]
    model_triples: tuple[Triple, ...]
    student_triples: tuple[Triple, ...]
    group: str | None = None

    @property
    def key(self) -> tuple[str, str]:
        return (self.question_id, self.student_answer_id)

    def as_dict(self) -> dict:
        def triple_dict(t: Triple) -> dict:
            return {"subject": t.subject, "predicate": t.predicate, "object": t.object}

        payload = {
            "question_id": self.question_id,
            "question": self.question,
            "model_answer": self.model_answer,
            "student_answer_id": self.student_answer_id,
            "student_answer": self.student_answer,
            "true_gaps": list(self.true_gaps),
            "model_triples": [triple_dict(t) for t in self.model_triples],
            "student_triples": [triple_dict(t) for t in self.student_triples],
        }
        if self.group is not None:
            payload["group"] = self.group
        return payload


def _parse_triples(raw, lineno: int, field_name: str) -> tuple[Triple, ...]:
    if not isinstance(raw, list):
        raise ValidationError(f"line {lineno}: {field_name} must be a list")
    triples = []
    for i, item in enumerate(raw):
        if not isinstance(item, dict):
            raise ValidationError(f"line {lineno}: {field_name}[{i}] must be an object")
        try:
            triples.append(
                Triple(
                    subject=item.get("subject", ""),
                    predicate=item.get("predicate", ""),
                    object=item.get("object"),
                )
            )
        except (ValueError, TypeError) as exc:
            raise ValidationError(f"line {lineno}: {field_name}[{i}]: {exc}") from None
    return tuple(triples)


def parse_record(payload: dict, lineno: int = 0) -> AnswerRecord:
    for name in _REQUIRED:
        if name not in payload:
            raise ValidationError(f"line {lineno}: missing required field {name!r}")
    group = payload.get("group")
    if group is not None and group not in GROUPS:
        raise ValidationError(f"line {lineno}: group must be one of {GROUPS}, got {group!r}")
    true_gaps = payload["true_gaps"]
    if not isinstance(true_gaps, list) or not all(isinstance(g, str) for g in true_gaps):
        raise ValidationError(f"line {lineno}: true_gaps must be a list of strings")
    model_triples = _parse_triples(payload["model_triples"], lineno, "model_triples")
    if not model_triples:
        raise ValidationError(f"line {lineno}: model_triples must be nonempty")
    student_triples = _parse_triples(payload["student_triples"], lineno, "student_triples")
    return AnswerRecord(
        question_id=str(payload["question_id"]),
        question=str(payload["question"]),
        model_answer=str(payload["model_answer"]),
        student_answer_id=str(payload["student_answer_id"]),
        student_answer=str(payload["student_answer"]),
        true_gaps=tuple(true_gaps),
        model_triples=model_triples,
        student_triples=student_triples,
        group=group,
    )


def load_corpus(path) -> list[AnswerRecord]:
    records: list[AnswerRecord] = []
    seen: dict[tuple[str, str], int] = {}
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                payload = json.loads(line)
            except json.JSONDecodeError as exc:
                raise ValidationError(f"line {lineno}: invalid JSON: {exc}") from None
            record = parse_record(payload, lineno)
            if record.key in seen:
                raise ValidationError(
                    f"line {lineno}: duplicate (question_id, student_answer_id) "
                    f"{record.key}; first seen at line {seen[record.key]}"
                )
            seen[record.key] = lineno
            records.append(record)
    return records


def save_corpus(records: list[AnswerRecord], path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for record in records:
            fh.write(json.dumps(record.as_dict(), sort_keys=True) + "\n")


def validate_corpus(records: list[AnswerRecord], clustering=None) -> list[str]:
    """Non-fatal quality checks; returns human-readable warnings."""
    warnings: list[str] = []
    for record in records:
        rid = f"{record.question_id}/{record.student_answer_id}"
        if not record.student_answer.strip():
            warnings.append(f"{rid}: empty student answer")
        for gap in record.true_gaps:
            if gap not in record.model_answer:
                warnings.append(f"{rid}: true gap {gap!r} is not a model-answer substring")
        if clustering is not None:
            for triple in record.model_triples + record.student_triples:
                if triple.predicate not in clustering.assignment:
                    warnings.append(
                        f"{rid}: predicate {triple.predicate!r} missing from clustering"
                    )
    return warnings


def corpus_predicates(records: list[AnswerRecord]) -> set[str]:
    """Union of model and student predicates across the corpus."""
    preds: set[str] = set()
    for record in records:
        for triple in record.model_triples + record.student_triples:
            preds.add(triple.predicate)
    return preds
