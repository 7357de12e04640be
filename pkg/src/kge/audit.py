"""Per-language coverage of names/descriptions broken down by popularity."""

from __future__ import annotations

import csv
import enum
from dataclasses import dataclass
from pathlib import Path

from .store import DEFAULT_VIEWS_FLOOR, PopularityBucket, rank_buckets


class Field(str, enum.Enum):
    NAMES = "names"
    DESCRIPTIONS = "descriptions"


class Eligibility(str, enum.Enum):
    MAX = "max"
    SUM = "sum"


class Denominator(str, enum.Enum):
    REFERENCE = "reference"
    ELIGIBLE = "eligible"


# Cumulative buckets first (head, torso = top 50%, tail), then the disjoint
# 10-50% band and the whole eligible population.
BUCKET_LABELS = ("head", "torso", "tail", "torso_band", "all")

_MEMBERS = {
    "head": {PopularityBucket.HEAD},
    "torso": {PopularityBucket.HEAD, PopularityBucket.TORSO},
    "tail": {PopularityBucket.TAIL},
    "torso_band": {PopularityBucket.TORSO},
    "all": set(PopularityBucket),
}


@dataclass(frozen=True)
class CoverageRow:
    lang: str
    bucket: str
    field: Field
    covered: int
    total: int

    @property
    def fraction(self):
        return self.covered / self.total

    def as_csv(self):
        return [self.lang, self.bucket, self.field.value, self.covered, self.total,
                f"{self.fraction:.4f}"]


@dataclass
class CoverageTable:
    rows: list

    def get(self, lang, bucket):
        for row in self.rows:
            if row.lang == lang and row.bucket == bucket:
                return row
        raise KeyError((lang, bucket))

    def write_csv(self, path):
        with Path(path).open("w", encoding="utf-8", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(["lang", "bucket", "field", "covered", "total", "fraction"])
            for row in self.rows:
                writer.writerow(row.as_csv())


def _has(entity, fld, lang):
    if fld is Field.NAMES:
        return bool(entity.names.get(lang))
    return bool(entity.descriptions.get(lang, "").strip())


def eligible_views(entity, mode):
    views = entity.page_views.values()
    if not views:
        return 0
    return sum(views) if mode is Eligibility.SUM else max(views)


def audit_coverage(snapshot, langs, reference="en", field=Field.NAMES, *,
                   floor=DEFAULT_VIEWS_FLOOR, eligibility=Eligibility.MAX,
                   denominator=Denominator.REFERENCE):
    fld = Field(field)
    eligibility = Eligibility(eligibility)
    denominator = Denominator(denominator)
    eligible = [e for e in snapshot if eligible_views(e, eligibility) >= floor]
    if not eligible:
        return CoverageTable([])
    buckets = rank_buckets([(e.id, e.page_views.get(reference, 0)) for e in eligible])
    order = [reference] + [l for l in langs if l != reference]
    rows = []
    for lang in order:
        for label in BUCKET_LABELS:
            members = [e for e in eligible if buckets[e.id] in _MEMBERS[label]]
            if denominator is Denominator.REFERENCE:
                base = [e for e in members if _has(e, fld, reference)]
            else:
                base = members
            if not base:
                continue
            covered = sum(1 for e in base if _has(e, fld, lang))
            rows.append(CoverageRow(lang, label, fld, covered, len(base)))
    return CoverageTable(rows)
