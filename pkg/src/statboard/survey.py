"""Questionnaire definitions, response validation and access tokens."""

from __future__ import annotations

import base64
import hashlib
import math
import secrets
from dataclasses import dataclass, field
from datetime import datetime, timezone

QUESTION_KINDS = ("likert5", "choice", "numeric", "free_text")

# Token states
UNUSED = "unused"
REDEEMED = "redeemed"
REVOKED = "revoked"


class DefinitionError(ValueError):
    """A questionnaire definition is invalid and was rejected."""


class ResponseValidationError(ValueError):
    """A submitted answer map violated the questionnaire contract.

    Carries the complete list of violations, not just the first one.
    """

    def __init__(self, violations: list[Violation]):
        self.violations = violations
        super().__init__("; ".join(v.message for v in violations))


class TokenError(ValueError):
    """Token redemption was rejected (unknown, already redeemed, revoked)."""


@dataclass(frozen=True)
class Violation:
    question_id: str
    code: str
    message: str

    def as_dict(self) -> dict:
        return {"question_id": self.question_id, "code": self.code, "message": self.message}


@dataclass(frozen=True)
class Question:
    id: str
    prompt: str
    kind: str
    options: tuple[str, ...] | None = None
    required: bool = True

    def __post_init__(self):
        if self.kind not in QUESTION_KINDS:
            raise DefinitionError(f"question {self.id!r}: unknown kind {self.kind!r}")
        if self.kind == "choice":
            if not self.options:
                raise DefinitionError(f"question {self.id!r}: choice question without options")
        elif self.options:
            raise DefinitionError(f"question {self.id!r}: options only allowed for choice questions")
        if not self.id:
            raise DefinitionError("question with empty id")
        if not self.prompt:
            raise DefinitionError(f"question {self.id!r}: empty prompt")


@dataclass(frozen=True)
class Questionnaire:
    id: str
    title: str
    questions: tuple[Question, ...]
    min_level_to_view_report: int = 0
    version: int = 1

    def __post_init__(self):
        if not self.questions:
            raise DefinitionError("empty question list")
        seen = set()
        for q in self.questions:
            if q.id in seen:
                raise DefinitionError(f"duplicate question id {q.id!r}")
            seen.add(q.id)
        if self.min_level_to_view_report < 0:
            raise DefinitionError("min_level_to_view_report must be >= 0")
        if self.version < 1:
            raise DefinitionError("version must be >= 1")

    def question(self, qid: str) -> Question:
        for q in self.questions:
            if q.id == qid:
                return q
        raise KeyError(qid)

    def question_ids(self) -> list[str]:
        return [q.id for q in self.questions]

    def as_dict(self) -> dict:
        return {
            "id": self.id,
            "title": self.title,
            "version": self.version,
            "min_level_to_view_report": self.min_level_to_view_report,
            "questions": [
                {
                    "id": q.id,
                    "prompt": q.prompt,
                    "kind": q.kind,
                    "options": list(q.options) if q.options else None,
                    "required": q.required,
                }
                for q in self.questions
            ],
        }

    @classmethod
    def from_dict(cls, doc: dict) -> Questionnaire:
        questions = tuple(
            Question(
                id=q["id"],
                prompt=q["prompt"],
                kind=q["kind"],
                options=tuple(q["options"]) if q.get("options") else None,
                required=bool(q.get("required", True)),
            )
            for q in doc["questions"]
        )
        return cls(
            id=doc["id"],
            title=doc["title"],
            questions=questions,
            min_level_to_view_report=int(doc.get("min_level_to_view_report", 0)),
            version=int(doc.get("version", 1)),
        )


@dataclass(frozen=True)
class ResponseRecord:
    questionnaire_id: str
    token_fingerprint: str
    answers: dict
    submitted_at: str  # RFC 3339 UTC

    def as_dict(self) -> dict:
        return {
            "questionnaire_id": self.questionnaire_id,
            "token_fingerprint": self.token_fingerprint,
            "answers": dict(self.answers),
            "submitted_at": self.submitted_at,
        }

    @classmethod
    def from_dict(cls, doc: dict) -> ResponseRecord:
        return cls(
            questionnaire_id=doc["questionnaire_id"],
            token_fingerprint=doc["token_fingerprint"],
            answers=dict(doc["answers"]),
            submitted_at=doc["submitted_at"],
        )


def utc_now_rfc3339() -> str:
    return datetime.now(timezone.utc).strftime("%Y-%m-%dT%H:%M:%S.%fZ")


def _check_answer(q: Question, value) -> Violation | None:
    """Type-check one answer against its question; None when valid."""
    if q.kind == "likert5":
        if isinstance(value, bool) or not isinstance(value, int):
            return Violation(q.id, "bad_type", f"{q.id}: likert answer must be an integer")
        if not 1 <= value <= 5:
            return Violation(q.id, "out_of_range", f"{q.id}: likert answer {value} out of range 1..5")
    elif q.kind == "choice":
        if isinstance(value, bool) or not isinstance(value, int):
            return Violation(q.id, "bad_type", f"{q.id}: choice answer must be an option index")
        if not 0 <= value < len(q.options):
            return Violation(q.id, "bad_option", f"{q.id}: option index {value} out of range")
    elif q.kind == "numeric":
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            return Violation(q.id, "bad_type", f"{q.id}: numeric answer must be a number")
        if not math.isfinite(value):
            return Violation(q.id, "not_finite", f"{q.id}: numeric answer must be finite")
    elif q.kind == "free_text":
        if not isinstance(value, str):
            return Violation(q.id, "bad_type", f"{q.id}: free text answer must be a string")
        if not value.strip():
            return Violation(q.id, "empty_text", f"{q.id}: free text answer is empty")
    return None


def validate_response(
    q: Questionnaire, answers: dict, *, token_fingerprint: str = "", submitted_at: str | None = None
) -> ResponseRecord:
    """Validate a raw answer map against a questionnaire.

    Returns a fully typed record, or raises ResponseValidationError carrying
    every violation found (missing required answers, unknown question ids,
    type and range errors) rather than only the first.
    """
    violations: list[Violation] = []
    known = {qq.id for qq in q.questions}
    for qid in answers:
        if qid not in known:
            violations.append(Violation(qid, "unknown_question", f"unknown question {qid!r}"))
    for question in q.questions:
        if question.id not in answers:
            if question.required:
                violations.append(
                    Violation(question.id, "missing", f"{question.id}: required question not answered")
                )
            continue
        bad = _check_answer(question, answers[question.id])
        if bad is not None:
            violations.append(bad)
    if violations:
        raise ResponseValidationError(violations)
    typed = {qid: answers[qid] for qid in q.question_ids() if qid in answers}
    return ResponseRecord(
        questionnaire_id=q.id,
        token_fingerprint=token_fingerprint,
        answers=typed,
        submitted_at=submitted_at or utc_now_rfc3339(),
    )


# --- Access tokens -----------------------------------------------------------
#
# Raw tokens are 26-character base32 strings carrying 128 bits from the
# OS CSPRNG. Only a salted SHA-256 digest is ever persisted; the raw token
# leaves the process exactly once, at issuance.

TOKEN_BYTES = 16  # 128 bits -> 26 base32 chars after stripping padding


@dataclass
class TokenRecord:
    digest: str
    salt: str
    level: int
    state: str = UNUSED
    issued_at: str = field(default_factory=utc_now_rfc3339)


@dataclass(frozen=True)
class Principal:
    questionnaire_id: str
    level: int
    token_fingerprint: str


def generate_token() -> str:
    raw = secrets.token_bytes(TOKEN_BYTES)
    return base64.b32encode(raw).decode("ascii").rstrip("=")


def token_digest(raw_token: str, salt_hex: str) -> str:
    return hashlib.sha256(bytes.fromhex(salt_hex) + raw_token.encode("utf-8")).hexdigest()


def issue_tokens(n: int, level: int) -> tuple[list[str], list[TokenRecord]]:
    """Mint n fresh tokens at the given hierarchy level.

    Returns the raw tokens (to hand out once) and the records to persist;
    the records contain only salted digests.
    """
    if n < 1:
        raise TokenError("token count must be >= 1")
    if level < 0:
        raise TokenError("hierarchy level must be >= 0")
    raws: list[str] = []
    records: list[TokenRecord] = []
    for _ in range(n):
        raw = generate_token()
        salt = secrets.token_hex(16)
        records.append(TokenRecord(digest=token_digest(raw, salt), salt=salt, level=level))
        raws.append(raw)
    return raws, records


def find_token(raw_token: str, records: list[TokenRecord]) -> TokenRecord | None:
    """Locate the record whose salted digest matches the raw token."""
    for rec in records:
        if secrets.compare_digest(rec.digest, token_digest(raw_token, rec.salt)):
            return rec
    return None
