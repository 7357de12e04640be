"""Entity snapshots: JSONL ingestion, popularity buckets, name updates."""

from __future__ import annotations

import enum
import json
import math
import threading
from dataclasses import dataclass, field, replace
from pathlib import Path
from types import MappingProxyType

from .errors import DuplicateEntityError, EntityNotFoundError, ParseError, ValidationError
from .languages import check_tag
from .matchers import normalize_name

DEFAULT_VIEWS_FLOOR = 100
HEAD_FRACTION = 0.10
TORSO_FRACTION = 0.50


class PopularityBucket(enum.IntEnum):
    # Ordered so that more popular compares smaller.
    HEAD = 0
    TORSO = 1
    TAIL = 2

    @property
    def label(self):
        return self.name.lower()


@dataclass(frozen=True)
class EntityRecord:
    id: str
    names: dict = field(default_factory=dict)
    descriptions: dict = field(default_factory=dict)
    instance_of: dict = field(default_factory=dict)
    page_views: dict = field(default_factory=dict)

    def __post_init__(self):
        if not isinstance(self.id, str) or not self.id:
            raise ValidationError("entity id must be a non-empty string")
        for lang, names in self.names.items():
            check_tag(lang)
            seen = set()
            for name in names:
                if not isinstance(name, str) or not name.strip():
                    raise ValidationError(f"{self.id}: empty name in {lang!r}")
                key = normalize_name(name)
                if key in seen and key:
                    raise ValidationError(f"{self.id}: duplicate name {name!r} in {lang!r}")
                seen.add(key)
        for lang, desc in self.descriptions.items():
            check_tag(lang)
            if not isinstance(desc, str):
                raise ValidationError(f"{self.id}: description in {lang!r} is not a string")
        for lang, labels in self.instance_of.items():
            check_tag(lang)
            if not all(isinstance(x, str) for x in labels):
                raise ValidationError(f"{self.id}: instance_of labels must be strings")
        for lang, views in self.page_views.items():
            check_tag(lang)
            if isinstance(views, bool) or not isinstance(views, int) or views < 0:
                raise ValidationError(f"{self.id}: page_views[{lang!r}] must be a non-negative int")

    def primary_name(self, lang):
        names = self.names.get(lang)
        return names[0] if names else None

    def context(self, lang):
        """Description in ``lang``, else the first instance-of label, else None."""
        desc = self.descriptions.get(lang, "").strip()
        if desc:
            return desc
        for label in self.instance_of.get(lang, ()):
            if label.strip():
                return label.strip()
        return None

    def to_json(self):
        obj = {"id": self.id}
        for key in ("names", "descriptions", "instance_of", "page_views"):
            value = getattr(self, key)
            if value:
                obj[key] = {k: (list(v) if isinstance(v, (list, tuple)) else v) for k, v in value.items()}
        return obj

    @classmethod
    def from_json(cls, obj, dedupe=True):
        if not isinstance(obj, dict):
            raise ValidationError("entity line must be a JSON object")
        unknown = set(obj) - {"id", "names", "descriptions", "instance_of", "page_views"}
        if unknown:
            raise ValidationError(f"unknown keys: {sorted(unknown)}")
        maps = {}
        for key in ("names", "descriptions", "instance_of", "page_views"):
            value = obj.get(key) or {}
            if not isinstance(value, dict):
                raise ValidationError(f"{key!r} must be an object")
            maps[key] = dict(value)
        for key in ("names", "instance_of"):
            for lang, values in maps[key].items():
                if not isinstance(values, list):
                    raise ValidationError(f"{key}[{lang!r}] must be a list")
        if dedupe:
            maps["names"] = {lang: _dedupe(names) for lang, names in maps["names"].items()}
        return cls(id=obj.get("id"), **maps)


def _dedupe(names):
    out, seen = [], set()
    for name in names:
        key = normalize_name(name) if isinstance(name, str) else name
        if key and key in seen:
            continue
        seen.add(key)
        out.append(name)
    return out


@dataclass(frozen=True)
class AuditEntry:
    entity_id: str
    lang: str
    name: str
    provenance: str

    def to_json(self):
        return {"entity": self.entity_id, "lang": self.lang, "name": self.name, "provenance": self.provenance}


class KgSnapshot:
    """Read-only collection of entities; updates return a new snapshot."""

    def __init__(self, entities=(), window="", audit_log=()):
        table = {}
        for ent in entities:
            if ent.id in table:
                raise DuplicateEntityError(f"duplicate entity id {ent.id!r}")
            table[ent.id] = ent
        self._entities = table
        self.window = window
        self.audit_log = tuple(audit_log)
        self._ranks = {}
        self._rank_lock = threading.Lock()

    @property
    def entities(self):
        return MappingProxyType(self._entities)

    def __len__(self):
        return len(self._entities)

    def __iter__(self):
        return iter(self._entities.values())

    def __contains__(self, entity_id):
        return entity_id in self._entities

    def get(self, entity_id):
        try:
            return self._entities[entity_id]
        except KeyError:
            raise EntityNotFoundError(f"unknown entity {entity_id!r}") from None

    def ids(self):
        return list(self._entities)

    def languages(self):
        langs = set()
        for ent in self:
            for key in ("names", "descriptions", "instance_of", "page_views"):
                langs.update(getattr(ent, key))
        return sorted(langs)

    def bucket_table(self, lang, floor=DEFAULT_VIEWS_FLOOR):
        key = (lang, floor)
        with self._rank_lock:
            table = self._ranks.get(key)
            if table is None:
                eligible = [
                    (e.id, e.page_views[lang])
                    for e in self
                    if e.page_views.get(lang, 0) >= floor
                ]
                table = rank_buckets(eligible)
                self._ranks[key] = table
        return table

    def _with(self, entities, audit_log):
        return KgSnapshot(entities, window=self.window, audit_log=audit_log)


def rank_buckets(items):
    """Map ids to buckets given ``(id, views)`` pairs for the eligible population.

    Rank by views descending, ties by ascending id.  The first
    ceil(10% N) are head, up to ceil(50% N) torso, the rest tail.
    """
    ordered = sorted(items, key=lambda kv: (-kv[1], kv[0]))
    n = len(ordered)
    n_head = math.ceil(HEAD_FRACTION * n)
    n_torso = math.ceil(TORSO_FRACTION * n)
    table = {}
    for rank, (entity_id, _) in enumerate(ordered, start=1):
        if rank <= n_head:
            table[entity_id] = PopularityBucket.HEAD
        elif rank <= n_torso:
            table[entity_id] = PopularityBucket.TORSO
        else:
            table[entity_id] = PopularityBucket.TAIL
    return table


def popularity_bucket(entity_id, lang, snapshot, floor=DEFAULT_VIEWS_FLOOR):
    """Head/Torso/Tail for ``entity_id`` in ``lang``, or None if ineligible."""
    snapshot.get(entity_id)
    return snapshot.bucket_table(lang, floor).get(entity_id)


def load_snapshot(path, window=""):
    path = Path(path)
    entities = []
    seen = set()
    with path.open("r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                obj = json.loads(line)
                ent = EntityRecord.from_json(obj)
            except (json.JSONDecodeError, ValidationError) as exc:
                raise ParseError(str(exc), line=lineno, path=path) from None
            if ent.id in seen:
                raise DuplicateEntityError(f"duplicate entity id {ent.id!r}", line=lineno, path=path)
            seen.add(ent.id)
            entities.append(ent)
    return KgSnapshot(entities, window=window)


def dump_entity(ent):
    return json.dumps(ent.to_json(), sort_keys=True, ensure_ascii=False)


def save_snapshot(snapshot, path):
    path = Path(path)
    with path.open("w", encoding="utf-8", newline="\n") as fh:
        for ent in snapshot:
            fh.write(dump_entity(ent))
            fh.write("\n")


def upsert_names(snapshot, entity_id, lang, names, provenance):
    """Union ``names`` into the entity's names for ``lang``; returns a new snapshot."""
    check_tag(lang)
    ent = snapshot.get(entity_id)
    for name in names:
        if not isinstance(name, str) or not name.strip():
            raise ValueError("names must be non-empty strings")
    current = list(ent.names.get(lang, ()))
    seen = {normalize_name(n) for n in current}
    added = []
    for name in names:
        key = normalize_name(name)
        if not key or key in seen:
            continue
        seen.add(key)
        current.append(name)
        added.append(AuditEntry(entity_id, lang, name, provenance))
    if not added:
        return snapshot
    new_names = dict(ent.names)
    new_names[lang] = current
    table = dict(snapshot.entities)
    table[entity_id] = replace(ent, names=new_names)
    return snapshot._with(table.values(), snapshot.audit_log + tuple(added))


def save_audit_log(snapshot, path):
    with Path(path).open("w", encoding="utf-8", newline="\n") as fh:
        for entry in snapshot.audit_log:
            fh.write(json.dumps(entry.to_json(), sort_keys=True, ensure_ascii=False) + "\n")
