"""Parser for the questionnaire definition file format.

The format is line oriented: a header of ``key: value`` pairs followed by
ordered ``[question <id>]`` blocks, each again ``key: value``. Blank lines
and ``#`` comments are ignored. See docs/formats.md for the full grammar
and a worked example.
"""

from __future__ import annotations

import re

from .survey import DefinitionError, Question, Questionnaire

_HEADER_KEYS = {"id", "title", "min_level_to_view_report"}
_QUESTION_KEYS = {"prompt", "kind", "options", "required"}
_BLOCK_RE = re.compile(r"^\[question\s+([^\]\s]+)\]$")
_BOOL = {"yes": True, "true": True, "no": False, "false": False}


def _fail(lineno: int, message: str):
    raise DefinitionError(f"line {lineno}: {message}")


def _slug(text: str) -> str:
    out = re.sub(r"[^a-z0-9]+", "-", text.lower()).strip("-")
    return out or "questionnaire"


def parse_questionnaire(text: str) -> Questionnaire:
    """Parse a definition document into a version-1 Questionnaire.

    Invalid input is rejected, never repaired: duplicate question ids,
    unknown keys, missing prompts and malformed values all raise
    DefinitionError naming the offending line.
    """
    header: dict[str, str] = {}
    blocks: list[tuple[int, str, dict[str, str]]] = []
    current: dict[str, str] | None = None

    for lineno, rawline in enumerate(text.splitlines(), start=1):
        line = rawline.strip()
        if not line or line.startswith("#"):
            continue
        m = _BLOCK_RE.match(line)
        if m:
            current = {}
            blocks.append((lineno, m.group(1), current))
            continue
        if ":" not in line:
            _fail(lineno, f"expected 'key: value', got {line!r}")
        key, _, value = line.partition(":")
        key = key.strip()
        value = value.strip()
        if current is None:
            if key not in _HEADER_KEYS:
                _fail(lineno, f"unknown header key {key!r}")
            if key in header:
                _fail(lineno, f"duplicate header key {key!r}")
            header[key] = value
        else:
            if key not in _QUESTION_KEYS:
                _fail(lineno, f"unknown question key {key!r}")
            if key in current:
                _fail(lineno, f"duplicate question key {key!r}")
            current[key] = value

    if "title" not in header or not header["title"]:
        raise DefinitionError("missing header key 'title'")
    title = header["title"]
    qn_id = header.get("id") or _slug(title)

    min_level = 0
    if "min_level_to_view_report" in header:
        try:
            min_level = int(header["min_level_to_view_report"])
        except ValueError:
            raise DefinitionError("min_level_to_view_report must be an integer") from None

    if not blocks:
        raise DefinitionError("empty question list")

    seen_ids = set()
    questions: list[Question] = []
    for lineno, qid, fields in blocks:
        if qid in seen_ids:
            _fail(lineno, f"duplicate question id {qid!r}")
        seen_ids.add(qid)
        if "prompt" not in fields:
            _fail(lineno, f"question {qid!r} has no prompt")
        if "kind" not in fields:
            _fail(lineno, f"question {qid!r} has no kind")
        options = None
        if "options" in fields:
            options = tuple(o.strip() for o in fields["options"].split("|") if o.strip())
            if not options:
                _fail(lineno, f"question {qid!r}: empty options list")
        required = True
        if "required" in fields:
            flag = fields["required"].lower()
            if flag not in _BOOL:
                _fail(lineno, f"question {qid!r}: required must be yes/no")
            required = _BOOL[flag]
        try:
            questions.append(
                Question(id=qid, prompt=fields["prompt"], kind=fields["kind"],
                         options=options, required=required)
            )
        except DefinitionError as exc:
            _fail(lineno, str(exc))

    return Questionnaire(
        id=qn_id,
        title=title,
        questions=tuple(questions),
        min_level_to_view_report=min_level,
        version=1,
    )


def create_questionnaire(definition_text: str) -> Questionnaire:
    """Build a Questionnaire from a definition document (version 1)."""
    return parse_questionnaire(definition_text)
