"""Agreement scoring across source systems.

Every candidate answer earns one point for each *other* source system
that produced a supporting answer.  Answers scoring at least
``lambda_coverage`` are proposed as new values; existing KG values not
supported by any answer scoring at least ``lambda_precision`` are
flagged as likely errors.
"""

from __future__ import annotations

from collections import Counter, defaultdict
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

from .errors import SourceError
from .languages import check_tag
from .matchers import MatcherConfig, MatchMode, normalize_name, supports
from .sources.base import Counters, SourceId


@dataclass(frozen=True)
class ScoredAnswer:
    value: str
    canonical: str
    score: int
    supporters: frozenset
    origin: SourceId

    def __post_init__(self):
        if self.origin in self.supporters:
            raise ValueError("an answer cannot support itself")
        if self.score != len(self.supporters):
            raise ValueError("score must equal the number of supporters")

    def to_json(self):
        return {
            "value": self.value,
            "score": self.score,
            "supporters": sorted(str(s) for s in self.supporters),
        }


@dataclass
class EnsembleConfig:
    lambda_coverage: int = 2
    lambda_precision: int = 1
    matcher: MatcherConfig = field(default_factory=MatcherConfig)

    def __post_init__(self):
        for name in ("lambda_coverage", "lambda_precision"):
            value = getattr(self, name)
            if isinstance(value, bool) or not isinstance(value, int) or value < 1:
                raise ValueError(f"{name} must be a positive integer")


@dataclass
class EnhancementResult:
    entity_id: str
    target_lang: str
    accepted: list = field(default_factory=list)
    flagged_incorrect: list = field(default_factory=list)
    alignment_failures: int = 0
    source_errors: int = 0
    skipped: bool = False
    counters: dict = field(default_factory=dict)

    def to_json(self):
        return {
            "entity": self.entity_id,
            "target": self.target_lang,
            "accepted": [a.to_json() for a in self.accepted],
            "flagged": list(self.flagged_incorrect),
            "skipped": self.skipped,
            "alignment_failures": self.alignment_failures,
            "source_errors": self.source_errors,
        }


def _surface(forms):
    """Most frequent form; ties go to the shortest, then lexicographically smallest."""
    return min(forms, key=lambda f: (-forms[f], len(f), f))


def _rank(scored):
    return sorted(scored, key=lambda a: (-a.score, a.canonical, a.value))


def _score_names(candidates):
    classes = {}
    for cand in candidates:
        key = normalize_name(cand.value)
        if not key:
            continue
        cls = classes.setdefault(key, {"emitters": defaultdict(set)})
        # One vote per (source, class); the form tally counts distinct sources per form.
        cls["emitters"][cand.value].add(cand.source)
    out = []
    for key, cls in classes.items():
        emitters = cls["emitters"]
        forms = Counter({form: len(srcs) for form, srcs in emitters.items()})
        value = _surface(forms)
        origin = min(emitters[value])
        sources = set().union(*emitters.values())
        supporters = frozenset(sources - {origin})
        out.append(ScoredAnswer(value, key, len(supporters), supporters, origin))
    return out


def _score_pairwise(candidates, matcher):
    kept = []
    for cand in candidates:
        if any(k.source == cand.source and supports(cand.value, k.value, matcher) for k in kept):
            continue
        kept.append(cand)
    backing = []
    for i, cand in enumerate(kept):
        backing.append(frozenset(
            other.source for j, other in enumerate(kept)
            if j != i and other.source != cand.source and supports(cand.value, other.value, matcher)
        ))
    clusters = []
    for i, cand in enumerate(kept):
        for cluster in clusters:
            if supports(cand.value, kept[cluster[0]].value, matcher):
                cluster.append(i)
                break
        else:
            clusters.append([i])
    out = []
    for cluster in clusters:
        forms = Counter()
        for i in cluster:
            forms[kept[i].value] += 1
        value = _surface(forms)
        best = min(cluster, key=lambda i: (-len(backing[i]), kept[i].value != value, kept[i].source))
        out.append(ScoredAnswer(value, normalize_name(value), len(backing[best]),
                                backing[best], kept[best].source))
    return out


def score_candidates(candidates, matcher=None):
    """Merge equivalent candidates and attach their agreement scores, ranked."""
    matcher = matcher or MatcherConfig()
    candidates = list(candidates)
    if matcher.mode is MatchMode.NAME:
        return _rank(_score_names(candidates))
    return _rank(_score_pairwise(candidates, matcher))


def select(scored, lam):
    if isinstance(lam, bool) or not isinstance(lam, int) or lam < 1:
        raise ValueError("lambda must be a positive integer")
    return [a for a in scored if a.score >= lam]


def flag_incorrect(existing, accepted, matcher=None):
    matcher = matcher or MatcherConfig()
    return [v for v in existing if not any(supports(v, a.value, matcher) for a in accepted)]


def existing_values(entity, target, mode):
    if MatchMode(mode) is MatchMode.DESCRIPTION:
        desc = entity.descriptions.get(target, "").strip()
        return [desc] if desc else []
    return list(entity.names.get(target, ()))


def has_source_context(entity, target):
    return any(
        lang != target and entity.primary_name(lang) and entity.context(lang)
        for lang in entity.names
    )


def enhance_entity(entity, target, sources, cfg=None):
    cfg = cfg or EnsembleConfig()
    check_tag(target)
    if not has_source_context(entity, target):
        return EnhancementResult(entity.id, target, skipped=True)
    counters = Counters()
    candidates = []
    for source in sources:
        try:
            proposal = source.propose(entity, target)
        except SourceError:
            counters.add("source_errors")
            continue
        counters.merge(proposal.counters)
        candidates.extend(c for c in proposal.candidates
                          if c.entity_id == entity.id and c.target_lang == target)
    matcher = cfg.matcher
    scored = score_candidates(candidates, matcher)
    accepted = select(scored, cfg.lambda_coverage)
    backed = select(scored, cfg.lambda_precision)
    flagged = flag_incorrect(existing_values(entity, target, matcher.mode), backed, matcher)
    if cfg.lambda_precision > cfg.lambda_coverage:
        flagged = flag_incorrect(flagged, accepted, matcher)
    return EnhancementResult(
        entity.id,
        target,
        accepted=accepted,
        flagged_incorrect=flagged,
        alignment_failures=counters.alignment_failures,
        source_errors=counters.source_errors,
        counters=counters.as_dict(),
    )


def enhance_all(entities, targets, sources, cfg=None, parallelism=1):
    """Results for every (target, entity) pair, ordered by target then entity."""
    jobs = [(ent, t) for t in targets for ent in entities]
    if parallelism <= 1:
        return [enhance_entity(ent, t, sources, cfg) for ent, t in jobs]
    with ThreadPoolExecutor(max_workers=parallelism) as pool:
        return list(pool.map(lambda job: enhance_entity(job[0], job[1], sources, cfg), jobs))
