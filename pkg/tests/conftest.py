import json
from pathlib import Path

import pytest

from ragplan.corpus import Codebase, PolicyEntry
from ragplan.embedding import CachingProvider, HashEmbedder


def make_entry(eid, instruction, code='pick_place(obj="the red block", target="the blue bowl")\n', source="test", tags=()):
    return PolicyEntry(id=eid, instruction=instruction, code=code, source=source, tags=tuple(tags))


def make_codebase(*instructions, ids=None):
    entries = []
    for i, text in enumerate(instructions):
        eid = ids[i] if ids else f"e{i:02d}"
        entries.append(make_entry(eid, text))
    return Codebase(entries=tuple(sorted(entries, key=lambda e: e.id)))


class FakeGateway:
    """In-process gateway double; returns canned strings and counts calls."""

    def __init__(self, text_response="pick up the block. place it into the bowl", plan_response='detect(obj="the block")\n'):
        self.text_response = text_response
        self.plan_response = plan_response
        self.text_calls = []
        self.mm_calls = []

    def complete_text(self, prompt):
        self.text_calls.append(prompt)
        return self.text_response

    def complete_multimodal(self, bundle):
        self.mm_calls.append(bundle)
        return self.plan_response


@pytest.fixture
def provider():
    return CachingProvider(HashEmbedder(256))


@pytest.fixture
def data_dir():
    import ragplan

    return Path(ragplan.__file__).resolve().parent / "data"


def write_corpus(path: Path, records: list[dict]):
    path.write_text("\n".join(json.dumps(r) for r in records) + "\n", encoding="utf-8")
    return path
