"""Replay of recorded candidates for hermetic runs."""

from __future__ import annotations

import json
from collections import defaultdict
from pathlib import Path

from ..errors import ParseError
from .base import CandidateAnswer, Proposal, SourceId, SourceKind

FIXTURE_KEYS = ("entity", "target", "kind", "engine", "source_lang", "value")


class RecordedSource:
    """Adapter answering from a Candidate JSONL fixture.

    Rows are keyed by (entity, source_lang, target); lookups for
    unrecorded keys return nothing.
    """

    def __init__(self, rows, name="recorded"):
        self.name = name
        self._by_key = defaultdict(list)
        self._by_entity = defaultdict(list)
        for cand in rows:
            self._by_key[(cand.entity_id, cand.source.source_lang, cand.target_lang)].append(cand)
            self._by_entity[(cand.entity_id, cand.target_lang)].append(cand)

    @classmethod
    def from_file(cls, path):
        path = Path(path)
        rows = []
        with path.open(encoding="utf-8") as fh:
            for lineno, line in enumerate(fh, start=1):
                if not line.strip():
                    continue
                try:
                    obj = json.loads(line)
                    missing = [k for k in FIXTURE_KEYS if k not in obj]
                    if missing:
                        raise ValueError(f"missing keys {missing}")
                    source = SourceId(SourceKind(obj["kind"]), obj["engine"], obj["source_lang"])
                    rows.append(CandidateAnswer(obj["value"], source, obj["target"], obj["entity"]))
                except (ValueError, TypeError) as exc:
                    raise ParseError(str(exc), line=lineno, path=path) from None
        return cls(rows, name=str(path))

    def lookup(self, entity_id, source_lang, target):
        return list(self._by_key.get((entity_id, source_lang, target), ()))

    def source_ids(self, target):
        return sorted({c.source for cands in self._by_entity.values() for c in cands
                       if c.target_lang == target})

    def propose(self, entity, target):
        return Proposal(candidates=list(self._by_entity.get((entity.id, target), ())))


def recorded_source(fixture):
    return RecordedSource.from_file(fixture)


def candidate_to_json(cand):
    return {
        "entity": cand.entity_id,
        "target": cand.target_lang,
        "kind": cand.source.kind.value,
        "engine": cand.source.engine,
        "source_lang": cand.source.source_lang,
        "value": cand.value,
    }
