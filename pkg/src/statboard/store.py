"""Durable single-directory file store.

Layout (all text UTF-8, timestamps RFC 3339 UTC):

    <root>/
      questionnaires/<qid>/
        definition.json    questionnaire document
        tokens.jsonl       append-only token events (issue / redeem / revoke)
        responses.jsonl    append-only response log, one JSON record per line
      datasets/<dsid>.csv  header row, comma separated, period decimals
      datasets/<dsid>.json dataset metadata
      specs/<spec id>.json report specs
      locks/<qid>.lock     cross-process writer locks

The response log is append-only and flushed+fsynced before an append
returns, so a reported version is always durable. The data version of a
questionnaire equals the number of complete records in its log. Readers
never block writers: a snapshot is whatever complete lines exist at read
time, and a trailing partially-written record (crash artifact) is ignored,
yielding a valid prefix after recovery.

One serialized writer per questionnaire: a process-wide mutex plus a file
lock, so the CLI can safely mutate a store that a live service also uses.
"""

from __future__ import annotations

import json
import math
import os
import re
import threading
from contextlib import contextmanager
from dataclasses import dataclass
from pathlib import Path

from filelock import FileLock

from . import survey
from .survey import Principal, Questionnaire, ResponseRecord, TokenError, TokenRecord


class StoreError(Exception):
    """Storage failure or contract violation (duplicate id, unknown id, bad data)."""


class DatasetFormatError(StoreError):
    """Malformed CSV dataset input."""


_ID_RE = re.compile(r"^[A-Za-z0-9][A-Za-z0-9_-]*$")


def _check_id(kind: str, value: str):
    if not _ID_RE.match(value):
        raise StoreError(f"invalid {kind} id {value!r} (use letters, digits, '-', '_')")


@dataclass(frozen=True)
class Snapshot:
    questionnaire_id: str
    records: tuple[ResponseRecord, ...]
    version: int


@dataclass(frozen=True)
class Dataset:
    id: str
    name: str
    columns: tuple[str, ...]
    rows: tuple[tuple[float, ...], ...]
    version: int
    stored_at: str


def parse_dataset_csv(text: str) -> tuple[list[str], list[list[float]]]:
    """Parse the dataset CSV wire format: header row then numeric rows.

    Errors name the offending row and column (1-based, header = row 1).
    """
    lines = [ln for ln in text.splitlines() if ln.strip()]
    if not lines:
        raise DatasetFormatError("empty CSV")
    columns = [c.strip() for c in lines[0].split(",")]
    if any(not c for c in columns):
        raise DatasetFormatError("row 1: empty column name in header")
    rows: list[list[float]] = []
    for i, line in enumerate(lines[1:], start=2):
        cells = [c.strip() for c in line.split(",")]
        if len(cells) != len(columns):
            raise DatasetFormatError(
                f"row {i}: expected {len(columns)} cells, got {len(cells)} (ragged rows)"
            )
        row = []
        for j, cell in enumerate(cells, start=1):
            try:
                value = float(cell)
            except ValueError:
                raise DatasetFormatError(f"row {i}, column {j}: not a number: {cell!r}") from None
            if not math.isfinite(value):
                raise DatasetFormatError(f"row {i}, column {j}: non-finite value {cell!r}")
            row.append(value)
        rows.append(row)
    return columns, rows


def format_dataset_csv(columns, rows) -> str:
    out = [",".join(columns)]
    for row in rows:
        out.append(",".join(repr(float(v)) for v in row))
    return "\n".join(out) + "\n"


def _write_document(path: Path, text: str):
    tmp = path.with_suffix(path.suffix + ".tmp")
    with open(tmp, "w", encoding="utf-8") as fh:
        fh.write(text)
        fh.flush()
        os.fsync(fh.fileno())
    os.replace(tmp, path)


def _read_log_lines(path: Path) -> list[dict]:
    """All complete records of an append-only log; a torn trailing line is dropped."""
    if not path.exists():
        return []
    raw = path.read_bytes()
    if not raw:
        return []
    complete = raw.endswith(b"\n")
    lines = raw.decode("utf-8", errors="replace").split("\n")
    if lines and lines[-1] == "":
        lines.pop()
    records = []
    for i, line in enumerate(lines):
        last = i == len(lines) - 1
        try:
            records.append(json.loads(line))
        except json.JSONDecodeError:
            if last:
                break  # partially written trailing record: valid prefix ends here
            raise StoreError(f"{path}: corrupt record at line {i + 1}")
    if not complete and records and len(records) == len(lines):
        records.pop()  # last line has no newline yet: not committed
    return records


_registry_guard = threading.Lock()


class Store:
    def __init__(self, root: str | Path):
        self.root = Path(root)
        for sub in ("questionnaires", "datasets", "specs", "locks"):
            (self.root / sub).mkdir(parents=True, exist_ok=True)
        self._mutexes: dict[str, threading.RLock] = {}

    # -- locking --------------------------------------------------------

    def _mutex(self, key: str) -> threading.RLock:
        with _registry_guard:
            if key not in self._mutexes:
                self._mutexes[key] = threading.RLock()
            return self._mutexes[key]

    @contextmanager
    def writer_lock(self, qid: str):
        """Serialized writer for one questionnaire, across threads and processes."""
        with self._mutex(qid):
            lock = FileLock(str(self.root / "locks" / f"{qid}.lock"))
            with lock:
                yield

    # -- questionnaires ---------------------------------------------------

    def _qdir(self, qid: str) -> Path:
        return self.root / "questionnaires" / qid

    def store_questionnaire(self, q: Questionnaire, *, overwrite: bool = False) -> str:
        _check_id("questionnaire", q.id)
        qdir = self._qdir(q.id)
        with self.writer_lock(q.id):
            if (qdir / "definition.json").exists():
                if not overwrite:
                    raise StoreError(f"questionnaire {q.id!r} exists")
                old = self.load_questionnaire(q.id)
                q = Questionnaire(
                    id=q.id, title=q.title, questions=q.questions,
                    min_level_to_view_report=q.min_level_to_view_report,
                    version=old.version + 1,
                )
            qdir.mkdir(parents=True, exist_ok=True)
            _write_document(qdir / "definition.json", json.dumps(q.as_dict(), indent=2))
        return q.id

    def load_questionnaire(self, qid: str) -> Questionnaire:
        path = self._qdir(qid) / "definition.json"
        if not path.exists():
            raise StoreError(f"unknown questionnaire {qid!r}")
        return Questionnaire.from_dict(json.loads(path.read_text(encoding="utf-8")))

    def list_questionnaires(self) -> list[str]:
        base = self.root / "questionnaires"
        return sorted(p.name for p in base.iterdir() if (p / "definition.json").exists())

    # -- tokens ---------------------------------------------------------
    #
    # Token state is an append-only event log, replayed on read. The raw
    # token never reaches disk: events carry only the salted digest.

    def _token_log(self, qid: str) -> Path:
        return self._qdir(qid) / "tokens.jsonl"

    def _append_log(self, path: Path, records: list[dict]):
        with open(path, "a", encoding="utf-8") as fh:
            for rec in records:
                fh.write(json.dumps(rec, separators=(",", ":")) + "\n")
            fh.flush()
            os.fsync(fh.fileno())

    def record_tokens(self, qid: str, records: list[TokenRecord]):
        self.load_questionnaire(qid)  # raises for unknown id
        with self.writer_lock(qid):
            self._append_log(
                self._token_log(qid),
                [
                    {"event": "issue", "digest": r.digest, "salt": r.salt,
                     "level": r.level, "at": r.issued_at}
                    for r in records
                ],
            )

    def token_records(self, qid: str) -> list[TokenRecord]:
        """Replay the token event log into current token states."""
        by_digest: dict[str, TokenRecord] = {}
        for event in _read_log_lines(self._token_log(qid)):
            kind = event["event"]
            if kind == "issue":
                by_digest[event["digest"]] = TokenRecord(
                    digest=event["digest"], salt=event["salt"],
                    level=int(event["level"]), state=survey.UNUSED,
                    issued_at=event.get("at", ""),
                )
            elif kind == "redeem":
                rec = by_digest.get(event["digest"])
                if rec is not None and rec.state == survey.UNUSED:
                    rec.state = survey.REDEEMED
            elif kind == "revoke":
                rec = by_digest.get(event["digest"])
                if rec is not None:
                    rec.state = survey.REVOKED
        return list(by_digest.values())

    def find_token(self, raw_token: str) -> tuple[str, TokenRecord] | None:
        """Scan every questionnaire for the token's salted digest."""
        for qid in self.list_questionnaires():
            rec = survey.find_token(raw_token, self.token_records(qid))
            if rec is not None:
                return qid, rec
        return None

    def redeem_token(self, raw_token: str, qid: str) -> Principal:
        """Single-use redemption: exactly one winner under any interleaving."""
        with self.writer_lock(qid):
            rec = survey.find_token(raw_token, self.token_records(qid))
            if rec is None:
                raise TokenError("unknown token")
            if rec.state == survey.REVOKED:
                raise TokenError("token revoked")
            if rec.state == survey.REDEEMED:
                raise TokenError("token already redeemed")
            self._append_log(
                self._token_log(qid),
                [{"event": "redeem", "digest": rec.digest, "at": survey.utc_now_rfc3339()}],
            )
            return Principal(questionnaire_id=qid, level=rec.level, token_fingerprint=rec.digest)

    def revoke_token(self, qid: str, digest: str):
        with self.writer_lock(qid):
            self._append_log(
                self._token_log(qid),
                [{"event": "revoke", "digest": digest, "at": survey.utc_now_rfc3339()}],
            )

    # -- responses --------------------------------------------------------

    def _response_log(self, qid: str) -> Path:
        return self._qdir(qid) / "responses.jsonl"

    def append_response(self, qid: str, record: ResponseRecord, *, on_commit=None) -> int:
        """Append one validated response; returns the new data version.

        The record is flushed and fsynced before the version is returned,
        so callers may promise durability (the confirmation notification
        depends on this). `on_commit(version)` runs under the writer lock,
        preserving commit order for its side effects.
        """
        self.load_questionnaire(qid)
        with self.writer_lock(qid):
            current = len(_read_log_lines(self._response_log(qid)))
            self._append_log(self._response_log(qid), [record.as_dict()])
            version = current + 1
            if on_commit is not None:
                on_commit(version)
            return version

    def load_responses(self, qid: str, at_version: int | None = None) -> Snapshot:
        self.load_questionnaire(qid)
        raw = _read_log_lines(self._response_log(qid))
        if at_version is not None:
            if at_version < 0:
                raise StoreError("at_version must be >= 0")
            raw = raw[:at_version]
        return Snapshot(
            questionnaire_id=qid,
            records=tuple(ResponseRecord.from_dict(r) for r in raw),
            version=len(raw),
        )

    def version(self, qid: str) -> int:
        self.load_questionnaire(qid)
        return len(_read_log_lines(self._response_log(qid)))

    def has_response_for(self, qid: str, token_fingerprint: str) -> bool:
        return any(
            r.token_fingerprint == token_fingerprint
            for r in self.load_responses(qid).records
        )

    # -- datasets ---------------------------------------------------------

    def _dataset_paths(self, dsid: str) -> tuple[Path, Path]:
        base = self.root / "datasets"
        return base / f"{dsid}.csv", base / f"{dsid}.json"

    def store_dataset(self, name: str, columns, rows, *, overwrite: bool = False) -> str:
        dsid = re.sub(r"[^a-z0-9_-]+", "-", name.lower()).strip("-")
        if not dsid:
            raise StoreError(f"dataset name {name!r} yields an empty id")
        _check_id("dataset", dsid)
        columns = [str(c) for c in columns]
        width = len(columns)
        if width == 0:
            raise StoreError("dataset needs at least one column")
        clean_rows = []
        for i, row in enumerate(rows):
            row = list(row)
            if len(row) != width:
                raise StoreError(f"ragged rows: row {i + 1} has {len(row)} cells, expected {width}")
            for v in row:
                if not math.isfinite(float(v)):
                    raise StoreError(f"row {i + 1}: non-finite value {v!r}")
            clean_rows.append([float(v) for v in row])
        csv_path, meta_path = self._dataset_paths(dsid)
        with self._mutex("datasets"):
            version = 1
            if meta_path.exists():
                if not overwrite:
                    raise StoreError(f"dataset {dsid!r} exists")
                version = json.loads(meta_path.read_text(encoding="utf-8"))["version"] + 1
            _write_document(csv_path, format_dataset_csv(columns, clean_rows))
            _write_document(meta_path, json.dumps({
                "id": dsid, "name": name, "version": version,
                "stored_at": survey.utc_now_rfc3339(),
                "n_rows": len(clean_rows), "columns": columns,
            }, indent=2))
        return dsid

    def load_dataset(self, dsid: str) -> Dataset:
        csv_path, meta_path = self._dataset_paths(dsid)
        if not meta_path.exists() or not csv_path.exists():
            raise StoreError(f"unknown dataset {dsid!r}")
        meta = json.loads(meta_path.read_text(encoding="utf-8"))
        columns, rows = parse_dataset_csv(csv_path.read_text(encoding="utf-8"))
        return Dataset(
            id=dsid, name=meta["name"], columns=tuple(columns),
            rows=tuple(tuple(r) for r in rows),
            version=int(meta["version"]), stored_at=meta["stored_at"],
        )

    def list_datasets(self) -> list[str]:
        return sorted(p.stem for p in (self.root / "datasets").glob("*.json"))

    # -- report specs -----------------------------------------------------

    def store_report_spec(self, spec: dict, *, overwrite: bool = False) -> str:
        spec_id = spec.get("id", "")
        _check_id("report spec", spec_id)
        path = self.root / "specs" / f"{spec_id}.json"
        with self._mutex("specs"):
            if path.exists() and not overwrite:
                raise StoreError(f"report spec {spec_id!r} exists")
            _write_document(path, json.dumps(spec, indent=2))
        return spec_id

    def load_report_spec(self, spec_id: str) -> dict:
        path = self.root / "specs" / f"{spec_id}.json"
        if not path.exists():
            raise StoreError(f"unknown report spec {spec_id!r}")
        return json.loads(path.read_text(encoding="utf-8"))

    def list_report_specs(self) -> list[str]:
        return sorted(p.stem for p in (self.root / "specs").glob("*.json"))
