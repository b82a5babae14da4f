"""Report composition: analysis blocks over stored data, role filtering, caching.

A report spec binds an ordered list of analysis blocks to one source
(questionnaire or dataset). Composition is a pure function of an immutable
snapshot, so a report computed twice at the same data version serializes
to byte-identical text; the report timestamp is derived from the data
(latest submission, or the dataset's stored_at), never from the wall
clock. Failing blocks are isolated: one bad block renders an error panel
while its siblings survive, and an empty source yields "no data yet"
placeholders rather than errors.

Freshness is lazy with version stamping: reports are recomputed on read
when the cached data version is stale, which gives the same observable
behavior as recompute-on-write (every view reflects every committed
response) at a fraction of the cost under write bursts.
"""

from __future__ import annotations

import json
import threading
from dataclasses import dataclass

from . import charts, descriptive, pca, spc
from .store import Dataset, Snapshot, Store
from .survey import Questionnaire

BLOCK_KINDS = ("frequency", "summary", "likert", "crosstab", "xbar_r", "pca")
SOURCE_TYPES = ("questionnaire", "dataset")

EPOCH = "1970-01-01T00:00:00.000000Z"


class SpecError(ValueError):
    """Report spec is malformed or references missing questions/columns."""


@dataclass(frozen=True)
class BlockSpec:
    kind: str
    params: dict
    min_level: int = 0
    title: str | None = None

    def __post_init__(self):
        if self.kind not in BLOCK_KINDS:
            raise SpecError(f"unknown block kind {self.kind!r}")
        if self.min_level < 0:
            raise SpecError("block min_level must be >= 0")


@dataclass(frozen=True)
class ReportSpec:
    id: str
    source_type: str
    source_id: str
    blocks: tuple[BlockSpec, ...]

    def __post_init__(self):
        if self.source_type not in SOURCE_TYPES:
            raise SpecError(f"unknown source type {self.source_type!r}")
        if not self.blocks:
            raise SpecError("report spec needs at least one block")

    def as_dict(self) -> dict:
        return {
            "id": self.id,
            "source": {self.source_type: self.source_id},
            "blocks": [
                {"kind": b.kind, "params": dict(b.params),
                 "min_level": b.min_level, "title": b.title}
                for b in self.blocks
            ],
        }

    @classmethod
    def from_dict(cls, doc: dict) -> ReportSpec:
        source = doc.get("source", {})
        if len(source) != 1:
            raise SpecError("spec source must name exactly one questionnaire or dataset")
        source_type, source_id = next(iter(source.items()))
        return cls(
            id=doc["id"],
            source_type=source_type,
            source_id=source_id,
            blocks=tuple(
                BlockSpec(kind=b["kind"], params=dict(b.get("params", {})),
                          min_level=int(b.get("min_level", 0)), title=b.get("title"))
                for b in doc.get("blocks", [])
            ),
        )


@dataclass(frozen=True)
class Report:
    spec_id: str
    source_type: str
    source_id: str
    data_version: int
    generated_at: str
    blocks: tuple[dict, ...]

    def as_dict(self) -> dict:
        return {
            "spec_id": self.spec_id,
            "source": {self.source_type: self.source_id},
            "data_version": self.data_version,
            "generated_at": self.generated_at,
            "blocks": [dict(b) for b in self.blocks],
        }


@dataclass(frozen=True)
class SourceData:
    questionnaire: Questionnaire | None = None
    snapshot: Snapshot | None = None
    dataset: Dataset | None = None


def serialize_report(report: Report) -> str:
    """Canonical text form of a report; byte-stable for a fixed snapshot."""
    return json.dumps(report.as_dict(), indent=2, sort_keys=True, allow_nan=False) + "\n"


def validate_spec(spec: ReportSpec, source: Questionnaire | Dataset):
    """Reject specs whose blocks reference missing questions or columns."""
    if isinstance(source, Questionnaire):
        known = set(source.question_ids())
        for b in spec.blocks:
            if b.kind == "xbar_r":
                raise SpecError("xbar_r blocks require a dataset source")
            for key in ("question", "row", "col"):
                qid = b.params.get(key)
                if qid is not None and qid not in known:
                    raise SpecError(f"block references unknown question {qid!r}")
            for qid in b.params.get("questions", []):
                if qid not in known:
                    raise SpecError(f"block references unknown question {qid!r}")
    else:
        known = set(source.columns)
        for b in spec.blocks:
            if b.kind in ("frequency", "likert", "crosstab"):
                raise SpecError(f"{b.kind} blocks require a questionnaire source")
            col = b.params.get("column")
            if col is not None and col not in known:
                raise SpecError(f"block references unknown column {col!r}")


# -- block computation over questionnaire responses -------------------------


def _categorical_value(question, answer):
    if question.kind == "choice":
        return question.options[answer]
    return answer


def _answers_for(question, snapshot: Snapshot) -> list:
    return [r.answers[question.id] for r in snapshot.records if question.id in r.answers]


def _declared_categories(question):
    if question.kind == "choice":
        return tuple(question.options)
    if question.kind == "likert5":
        return descriptive.LIKERT_CATEGORIES
    return None


def _compute_questionnaire_block(block: BlockSpec, q: Questionnaire, snapshot: Snapshot):
    if block.kind == "likert":
        question = q.question(block.params["question"])
        table, summary = descriptive.likert_profile(_answers_for(question, snapshot))
        result = {
            "question": question.id,
            "prompt": question.prompt,
            "table": table.as_dict(),
            "summary": summary.as_dict() if summary else None,
        }
        return result, charts.render_chart_svg("likert", {"table": table})
    if block.kind == "frequency":
        question = q.question(block.params["question"])
        values = [_categorical_value(question, a) for a in _answers_for(question, snapshot)]
        table = descriptive.frequency_table(values, categories=_declared_categories(question))
        result = {"question": question.id, "prompt": question.prompt, "table": table.as_dict()}
        return result, charts.render_chart_svg("frequency", {"table": table})
    if block.kind == "summary":
        question = q.question(block.params["question"])
        values = _answers_for(question, snapshot)
        if not values:
            return {"question": question.id, "prompt": question.prompt, "summary": None}, {}
        stats = descriptive.summary_stats(values)
        return {"question": question.id, "prompt": question.prompt,
                "summary": stats.as_dict()}, {}
    if block.kind == "crosstab":
        row_q = q.question(block.params["row"])
        col_q = q.question(block.params["col"])
        pairs = [
            (_categorical_value(row_q, r.answers[row_q.id]),
             _categorical_value(col_q, r.answers[col_q.id]))
            for r in snapshot.records
            if row_q.id in r.answers and col_q.id in r.answers
        ]
        table = descriptive.cross_tab(pairs)
        return {"row_question": row_q.id, "col_question": col_q.id,
                "table": table.as_dict()}, {}
    if block.kind == "pca":
        qids = block.params.get("questions") or [
            qq.id for qq in q.questions if qq.kind in ("likert5", "numeric")
        ]
        questions = [q.question(qid) for qid in qids]
        rows = [
            [float(r.answers[qq.id]) for qq in questions]
            for r in snapshot.records
            if all(qq.id in r.answers for qq in questions)
        ]
        if len(rows) < 2:
            raise pca.PcaError("need at least 2 complete responses")
        data = pca.DataMatrix.from_rows(qids, rows)
        res = pca.pca(data, mode=block.params.get("mode", "correlation"))
        return res.as_dict(), charts.render_chart_svg("pca", res)
    raise SpecError(f"block kind {block.kind!r} not supported for questionnaire sources")


def _compute_dataset_block(block: BlockSpec, dataset: Dataset):
    if block.kind == "xbar_r":
        data = spc.SubgroupData.from_rows(dataset.rows)
        res = spc.xbar_r_chart(data)
        return res.as_dict(), charts.render_chart_svg("xbar_r", res)
    if block.kind == "pca":
        data = pca.DataMatrix.from_rows(dataset.columns, dataset.rows)
        res = pca.pca(data, mode=block.params.get("mode", "correlation"))
        return res.as_dict(), charts.render_chart_svg("pca", res)
    if block.kind == "summary":
        col = block.params["column"]
        idx = dataset.columns.index(col)
        stats = descriptive.summary_stats([row[idx] for row in dataset.rows])
        return {"column": col, "summary": stats.as_dict()}, {}
    raise SpecError(f"block kind {block.kind!r} not supported for dataset sources")


def _default_title(block: BlockSpec, source: SourceData) -> str:
    if block.title:
        return block.title
    qid = block.params.get("question")
    if qid and source.questionnaire is not None:
        try:
            return source.questionnaire.question(qid).prompt
        except KeyError:
            return f"{block.kind}: {qid}"
    return block.kind


def compose_report(spec: ReportSpec, source: SourceData) -> Report:
    """Compute every block of a spec from one immutable snapshot.

    Deterministic given the snapshot. A block whose analysis fails is
    rendered as an error panel; the other blocks still compute.
    """
    if spec.source_type == "questionnaire":
        q, snapshot = source.questionnaire, source.snapshot
        data_version = snapshot.version
        generated_at = max((r.submitted_at for r in snapshot.records), default=EPOCH)
        empty = snapshot.version == 0
    else:
        dataset = source.dataset
        data_version = dataset.version
        generated_at = dataset.stored_at
        empty = len(dataset.rows) == 0

    blocks = []
    for block in spec.blocks:
        rendered = {
            "kind": block.kind,
            "title": _default_title(block, source),
            "params": dict(block.params),
            "min_level": block.min_level,
            "status": "ok",
            "result": None,
            "charts": {},
            "detail": None,
        }
        if empty:
            rendered["status"] = "empty"
            rendered["detail"] = "no data yet"
        else:
            try:
                if spec.source_type == "questionnaire":
                    result, svg = _compute_questionnaire_block(block, q, snapshot)
                else:
                    result, svg = _compute_dataset_block(block, dataset)
                rendered["result"] = result
                rendered["charts"] = svg
            except (descriptive.StatsError, spc.SpcError, pca.PcaError,
                    charts.ChartError, SpecError, KeyError, ValueError) as exc:
                rendered["status"] = "error"
                rendered["detail"] = f"{type(exc).__name__}: {exc}"
        blocks.append(rendered)

    return Report(
        spec_id=spec.id,
        source_type=spec.source_type,
        source_id=spec.source_id,
        data_version=data_version,
        generated_at=generated_at,
        blocks=tuple(blocks),
    )


def filter_by_role(report: Report, level: int) -> Report:
    """Retain exactly the blocks visible at the viewer's hierarchy level."""
    return Report(
        spec_id=report.spec_id,
        source_type=report.source_type,
        source_id=report.source_id,
        data_version=report.data_version,
        generated_at=report.generated_at,
        blocks=tuple(b for b in report.blocks if b["min_level"] <= level),
    )


class ReportEngine:
    """Lazily recomputing, version-stamped report cache over a store."""

    def __init__(self, store: Store):
        self.store = store
        self._cache: dict[str, Report] = {}
        self._lock = threading.Lock()

    def load_spec(self, spec_id: str) -> ReportSpec:
        return ReportSpec.from_dict(self.store.load_report_spec(spec_id))

    def specs_for_questionnaire(self, qid: str) -> list[str]:
        out = []
        for spec_id in self.store.list_report_specs():
            spec = self.load_spec(spec_id)
            if spec.source_type == "questionnaire" and spec.source_id == qid:
                out.append(spec_id)
        return out

    def source_version(self, spec: ReportSpec) -> int:
        if spec.source_type == "questionnaire":
            return self.store.version(spec.source_id)
        return self.store.load_dataset(spec.source_id).version

    def load_source(self, spec: ReportSpec, at_version: int | None = None) -> SourceData:
        if spec.source_type == "questionnaire":
            return SourceData(
                questionnaire=self.store.load_questionnaire(spec.source_id),
                snapshot=self.store.load_responses(spec.source_id, at_version=at_version),
            )
        return SourceData(dataset=self.store.load_dataset(spec.source_id))

    def compose_at(self, spec_id: str, at_version: int | None = None) -> Report:
        spec = self.load_spec(spec_id)
        return compose_report(spec, self.load_source(spec, at_version=at_version))

    def get_report(self, spec_id: str) -> Report:
        """Current report; recomputed only when the source version moved."""
        spec = self.load_spec(spec_id)
        current = self.source_version(spec)
        with self._lock:
            cached = self._cache.get(spec_id)
            if cached is not None and cached.data_version == current:
                return cached
        fresh = compose_report(spec, self.load_source(spec))
        with self._lock:
            cached = self._cache.get(spec_id)
            # compare-and-swap: never replace a newer report with an older one
            if cached is None or fresh.data_version >= cached.data_version:
                self._cache[spec_id] = fresh
                return fresh
            return cached
