"""Policy-program corpus: line-delimited JSON records, sorted by id.

One record per line with exactly the fields {id, instruction, code, source,
tags}; unknown fields are rejected so format drift fails loudly. Entries are
kept sorted by id, which makes every downstream ranking tie deterministic.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

from .errors import DuplicateId, IoFailure, MalformedRecord

_FIELDS = {"id", "instruction", "code", "source", "tags"}


@dataclass(frozen=True)
class PolicyEntry:
    id: str
    instruction: str
    code: str
    source: str
    tags: tuple[str, ...] = ()

    def to_record(self) -> dict:
        return {
            "id": self.id,
            "instruction": self.instruction,
            "code": self.code,
            "source": self.source,
            "tags": list(self.tags),
        }


@dataclass(frozen=True)
class Codebase:
    entries: tuple[PolicyEntry, ...] = field(default_factory=tuple)

    def __len__(self) -> int:
        return len(self.entries)

    def __iter__(self):
        return iter(self.entries)

    def ids(self) -> list[str]:
        return [e.id for e in self.entries]

    def get(self, entry_id: str) -> PolicyEntry | None:
        for e in self.entries:
            if e.id == entry_id:
                return e
        return None


def _parse_record(raw: dict, line_no: int) -> PolicyEntry:
    if not isinstance(raw, dict):
        raise MalformedRecord(line_no, "record is not an object")
    unknown = set(raw) - _FIELDS
    if unknown:
        raise MalformedRecord(line_no, f"unknown fields {sorted(unknown)}")
    missing = _FIELDS - set(raw)
    if missing:
        raise MalformedRecord(line_no, f"missing fields {sorted(missing)}")
    for key in ("id", "instruction", "code", "source"):
        if not isinstance(raw[key], str):
            raise MalformedRecord(line_no, f"field {key!r} must be a string")
    if not raw["id"]:
        raise MalformedRecord(line_no, "empty id")
    if not raw["instruction"]:
        raise MalformedRecord(line_no, "empty instruction")
    if not raw["code"]:
        raise MalformedRecord(line_no, "empty code")
    tags = raw["tags"]
    if not isinstance(tags, list) or any(not isinstance(t, str) for t in tags):
        raise MalformedRecord(line_no, "field 'tags' must be a list of strings")
    return PolicyEntry(
        id=raw["id"],
        instruction=raw["instruction"],
        code=raw["code"],
        source=raw["source"],
        tags=tuple(tags),
    )


def load_codebase(path: str | Path) -> Codebase:
    """Load a corpus file; raises MalformedRecord / DuplicateId on bad input."""
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise IoFailure(f"cannot read {path}: {exc}") from exc
    entries: dict[str, PolicyEntry] = {}
    for line_no, line in enumerate(text.splitlines(), start=1):
        if not line.strip():
            continue
        try:
            raw = json.loads(line)
        except json.JSONDecodeError as exc:
            raise MalformedRecord(line_no, f"invalid JSON: {exc.msg}") from exc
        entry = _parse_record(raw, line_no)
        if entry.id in entries:
            raise DuplicateId(entry.id)
        entries[entry.id] = entry
    ordered = tuple(entries[k] for k in sorted(entries))
    return Codebase(entries=ordered)


def save_codebase(cb: Codebase, path: str | Path) -> None:
    """Write one record per line, sorted by id; load(save(cb)) == cb."""
    path = Path(path)
    lines = []
    for entry in sorted(cb.entries, key=lambda e: e.id):
        lines.append(json.dumps(entry.to_record(), ensure_ascii=False, sort_keys=True))
    try:
        path.write_text("\n".join(lines) + ("\n" if lines else ""), encoding="utf-8")
    except OSError as exc:
        raise IoFailure(f"cannot write {path}: {exc}") from exc


def add_entry(cb: Codebase, entry: PolicyEntry) -> Codebase:
    """Return a new Codebase with the entry inserted in sorted position."""
    if any(e.id == entry.id for e in cb.entries):
        raise DuplicateId(entry.id)
    merged = sorted(cb.entries + (entry,), key=lambda e: e.id)
    return Codebase(entries=tuple(merged))
