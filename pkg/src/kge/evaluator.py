"""Coverage and precision metrics against a gold benchmark.

Membership is decided by name equivalence (see ``matchers.phi_name``), so
``Roma`` predicted against gold ``roma`` counts as a hit.
"""

from __future__ import annotations

import csv
import enum
import json
from collections import defaultdict
from dataclasses import dataclass, field
from pathlib import Path

from .errors import ParseError, UndefinedEntityError, ValidationError
from .languages import check_tag
from .matchers import normalize_name


class Aggregation(str, enum.Enum):
    MICRO = "micro"
    MACRO = "macro"


@dataclass(frozen=True)
class BenchmarkEntry:
    entity_id: str
    lang: str
    valid_names: frozenset
    invalid_names: frozenset = frozenset()

    def __post_init__(self):
        if not self.entity_id:
            raise ValidationError("benchmark entry needs an entity id")
        check_tag(self.lang)
        if not self.valid_names:
            raise ValidationError(f"{self.entity_id}/{self.lang}: no valid names")
        overlap = _keys(self.valid_names) & _keys(self.invalid_names)
        if overlap:
            raise ValidationError(
                f"{self.entity_id}/{self.lang}: names both valid and invalid: {sorted(overlap)}"
            )


@dataclass(frozen=True)
class MetricTriple:
    ppv: float
    tpr: float
    f1: float
    # Raw hit counts, kept so that micro averages can be recomputed.
    pred_hits: int | None = None
    n_pred: int | None = None
    gold_hits: int | None = None
    n_gold: int | None = None

    @classmethod
    def from_counts(cls, pred_hits, n_pred, gold_hits, n_gold):
        ppv = pred_hits / n_pred if n_pred else 0.0
        tpr = gold_hits / n_gold if n_gold else 0.0
        return cls(ppv, tpr, harmonic(ppv, tpr), pred_hits, n_pred, gold_hits, n_gold)

    def rounded(self, digits=4):
        return {"ppv": round(self.ppv, digits), "tpr": round(self.tpr, digits),
                "f1": round(self.f1, digits)}


def harmonic(p, r):
    return 2 * p * r / (p + r) if p + r > 0 else 0.0


def _keys(names):
    return {k for k in map(normalize_name, names) if k}


def _counts(gold, predicted):
    gold_keys = _keys(gold)
    pred_keys = _keys(predicted)
    pred_hits = sum(1 for y in predicted if normalize_name(y) in gold_keys)
    gold_hits = sum(1 for y in gold if normalize_name(y) in pred_keys)
    return pred_hits, len(predicted), gold_hits, len(gold)


def coverage_scores(gold, predicted):
    gold, predicted = set(gold), set(predicted)
    if not gold:
        raise UndefinedEntityError("gold valid-name set is empty")
    return MetricTriple.from_counts(*_counts(gold, predicted))


def precision_scores(gold_invalid, flagged):
    gold_invalid, flagged = set(gold_invalid), set(flagged)
    if not gold_invalid:
        raise UndefinedEntityError("gold invalid-name set is empty")
    return MetricTriple.from_counts(*_counts(gold_invalid, flagged))


def relaxed_scores(gold, predicted):
    """At-least-one-hit scoring for a single entity, as hit counts."""
    gold, predicted = set(gold), set(predicted)
    if not gold:
        raise UndefinedEntityError("gold set is empty")
    hit = int(bool(_keys(gold) & _keys(predicted)))
    return MetricTriple.from_counts(hit, 1 if predicted else 0, hit, 1)


def aggregate(per_entity, mode=Aggregation.MACRO):
    triples = [t for _, t in per_entity]
    if not triples:
        raise ValueError("nothing to aggregate")
    mode = Aggregation(mode)
    if mode is Aggregation.MACRO:
        n = len(triples)
        return MetricTriple(
            sum(t.ppv for t in triples) / n,
            sum(t.tpr for t in triples) / n,
            sum(t.f1 for t in triples) / n,
        )
    if any(t.n_pred is None for t in triples):
        raise ValueError("micro aggregation needs per-entity counts")
    return MetricTriple.from_counts(
        sum(t.pred_hits for t in triples),
        sum(t.n_pred for t in triples),
        sum(t.gold_hits for t in triples),
        sum(t.n_gold for t in triples),
    )


def load_benchmark(path):
    path = Path(path)
    entries = []
    with path.open(encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                obj = json.loads(line)
                entries.append(BenchmarkEntry(
                    obj["id"],
                    obj["language"],
                    frozenset(obj.get("valid") or ()),
                    frozenset(obj.get("invalid") or ()),
                ))
            except ValidationError as exc:
                raise ValidationError(f"{path}:line {lineno}: {exc}") from None
            except (ValueError, KeyError, TypeError) as exc:
                raise ParseError(f"malformed benchmark row: {exc}", line=lineno, path=path) from None
    return entries


def load_results(path):
    """Read EnhancementResult JSONL into ``{(entity, lang): (accepted, flagged)}``."""
    path = Path(path)
    out = {}
    with path.open(encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                obj = json.loads(line)
                accepted = [a["value"] for a in obj.get("accepted", ())]
                out[(obj["entity"], obj["target"])] = (accepted, list(obj.get("flagged", ())))
            except (ValueError, KeyError, TypeError) as exc:
                raise ParseError(f"malformed result row: {exc}", line=lineno, path=path) from None
    return out


@dataclass
class LanguageReport:
    coverage: MetricTriple
    precision: MetricTriple | None
    relaxed_coverage: MetricTriple
    relaxed_precision: MetricTriple | None
    n_entities: int
    n_precision_entities: int
    excluded_precision: int


@dataclass
class EvaluationReport:
    per_language: dict
    aggregation_mode: Aggregation
    per_entity: list = field(default_factory=list)
    counters: dict = field(default_factory=dict)

    def average(self, metric):
        vals = [getattr(r, metric).f1 for r in self.per_language.values()
                if getattr(r, metric) is not None]
        return sum(vals) / len(vals) if vals else 0.0

    def to_json(self):
        def triple(t):
            return None if t is None else {"ppv": t.ppv, "tpr": t.tpr, "f1": t.f1}

        langs = {}
        for lang, rep in sorted(self.per_language.items()):
            langs[lang] = {
                "coverage": triple(rep.coverage),
                "precision": triple(rep.precision),
                "relaxed_coverage": triple(rep.relaxed_coverage),
                "relaxed_precision": triple(rep.relaxed_precision),
                "n_entities": rep.n_entities,
                "n_precision_entities": rep.n_precision_entities,
                "excluded_precision": rep.excluded_precision,
            }
        return {
            "aggregation_mode": self.aggregation_mode.value,
            "relaxed_aggregation": "hit-rate",
            "per_language": langs,
            "average": {
                "coverage_f1": self.average("coverage"),
                "precision_f1": self.average("precision"),
                "relaxed_coverage_f1": self.average("relaxed_coverage"),
                "relaxed_precision_f1": self.average("relaxed_precision"),
            },
            "counters": dict(self.counters),
            "per_entity": self.per_entity,
        }


def evaluate(entries, results, mode=Aggregation.MACRO):
    """Score ``results`` (as returned by load_results) against benchmark entries."""
    mode = Aggregation(mode)
    by_lang = defaultdict(lambda: {"cov": [], "prec": [], "rcov": [], "rprec": [], "excl": 0})
    per_entity = []
    missing = 0
    for entry in entries:
        key = (entry.entity_id, entry.lang)
        if key not in results:
            missing += 1
        accepted, flagged = results.get(key, ([], []))
        bucket = by_lang[entry.lang]
        cov = coverage_scores(entry.valid_names, accepted)
        rcov = relaxed_scores(entry.valid_names, accepted)
        bucket["cov"].append((entry.entity_id, cov))
        bucket["rcov"].append((entry.entity_id, rcov))
        row = {"entity": entry.entity_id, "lang": entry.lang,
               "coverage": cov.rounded(), "precision": None}
        if entry.invalid_names:
            prec = precision_scores(entry.invalid_names, flagged)
            bucket["prec"].append((entry.entity_id, prec))
            bucket["rprec"].append((entry.entity_id, relaxed_scores(entry.invalid_names, flagged)))
            row["precision"] = prec.rounded()
        else:
            bucket["excl"] += 1
        per_entity.append(row)
    bench_keys = {(e.entity_id, e.lang) for e in entries}
    unmatched = sum(1 for k in results if k not in bench_keys)
    per_language = {}
    for lang, b in by_lang.items():
        per_language[lang] = LanguageReport(
            coverage=aggregate(b["cov"], mode),
            precision=aggregate(b["prec"], mode) if b["prec"] else None,
            relaxed_coverage=aggregate(b["rcov"], Aggregation.MICRO),
            relaxed_precision=aggregate(b["rprec"], Aggregation.MICRO) if b["rprec"] else None,
            n_entities=len(b["cov"]),
            n_precision_entities=len(b["prec"]),
            excluded_precision=b["excl"],
        )
    counters = {"missing_results": missing, "unmatched_results": unmatched,
                "benchmark_entries": len(entries)}
    return EvaluationReport(per_language, mode, per_entity, counters)


def write_report_json(report, path):
    with Path(path).open("w", encoding="utf-8", newline="\n") as fh:
        json.dump(report.to_json(), fh, indent=2, sort_keys=True, ensure_ascii=False)
        fh.write("\n")


def write_report_tsv(report, path, relaxed=False, system="system"):
    """One row of F1 percentages with a C and a P column per language, then the average."""
    cov_key, prec_key = ("relaxed_coverage", "relaxed_precision") if relaxed else ("coverage", "precision")
    langs = sorted(report.per_language)
    header = ["system"]
    row = [system]

    def pct(t):
        return "--" if t is None else f"{100 * t.f1:.1f}"

    for lang in langs:
        rep = report.per_language[lang]
        header += [f"{lang.upper()}_C", f"{lang.upper()}_P"]
        row += [pct(getattr(rep, cov_key)), pct(getattr(rep, prec_key))]
    header += ["AVG_C", "AVG_P"]
    row += [f"{100 * report.average(cov_key):.1f}", f"{100 * report.average(prec_key):.1f}"]
    with Path(path).open("w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, delimiter="\t", lineterminator="\n")
        writer.writerow(header)
        writer.writerow(row)
