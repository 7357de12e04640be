"""Identity and payload types shared by every source system."""

from __future__ import annotations

import enum
import threading
from dataclasses import dataclass, field, fields

from ..languages import check_tag


class SourceKind(str, enum.Enum):
    MT = "mt"
    WS = "ws"
    LLM = "llm"


@dataclass(frozen=True, order=True)
class SourceId:
    """(kind, engine, source language): the unit of one vote."""

    kind: SourceKind
    engine: str
    source_lang: str

    def __post_init__(self):
        object.__setattr__(self, "kind", SourceKind(self.kind))
        if not self.engine:
            raise ValueError("engine must be non-empty")
        check_tag(self.source_lang)

    def __str__(self):
        return f"{self.kind.value}:{self.engine}:{self.source_lang}"

    @classmethod
    def parse(cls, text):
        kind, engine, lang = text.split(":")
        return cls(SourceKind(kind), engine, lang)


@dataclass(frozen=True)
class CandidateAnswer:
    value: str
    source: SourceId
    target_lang: str
    entity_id: str = ""
    raw: str | None = field(default=None, compare=False)

    def __post_init__(self):
        if not isinstance(self.value, str) or not self.value.strip():
            raise ValueError("candidate value must be non-empty")
        check_tag(self.target_lang)


@dataclass(frozen=True)
class SourceRequest:
    entity_id: str
    source_lang: str
    target_lang: str
    marked: object = None
    name: str | None = None
    description: str | None = None

    def __post_init__(self):
        check_tag(self.source_lang)
        check_tag(self.target_lang)
        if self.source_lang == self.target_lang:
            raise ValueError("source and target language must differ")


@dataclass
class Counters:
    """Failure counters; safe to update from several threads."""

    alignment_failures: int = 0
    source_errors: int = 0
    format_errors: int = 0
    pages_skipped: int = 0
    no_context: int = 0
    no_example: int = 0

    def __post_init__(self):
        self._lock = threading.Lock()

    def add(self, name, n=1):
        with self._lock:
            setattr(self, name, getattr(self, name) + n)

    def merge(self, other):
        for f in fields(self):
            self.add(f.name, getattr(other, f.name))

    def as_dict(self):
        return {f.name: getattr(self, f.name) for f in fields(self)}


@dataclass
class Proposal:
    """What one adapter produced for one (entity, target) pair."""

    candidates: list = field(default_factory=list)
    counters: Counters = field(default_factory=Counters)
