"""Seeded synthetic benchmark with simulated noisy source systems.

Each simulated source answers correctly with a fixed probability and
otherwise returns one of a few per-entity corruptions of the true name,
so wrong answers occasionally agree with each other.  The generator is
fully deterministic given its seed.
"""

from __future__ import annotations

import random
import string
from dataclasses import dataclass, field

from .ensemble import EnsembleConfig, enhance_entity, flag_incorrect, score_candidates
from .evaluator import BenchmarkEntry, evaluate
from .matchers import normalize_name
from .sources.base import CandidateAnswer, Proposal, SourceId, SourceKind
from .store import EntityRecord, KgSnapshot

_SYLLABLES = ["ba", "ce", "di", "fo", "gu", "la", "me", "ni", "po", "ru", "sa", "te",
              "vi", "zo", "mar", "len", "tor", "qui", "san", "rel"]

DEFAULT_SOURCES = (
    SourceId(SourceKind.MT, "sim-mt", "de"),
    SourceId(SourceKind.MT, "sim-mt", "en"),
    SourceId(SourceKind.MT, "sim-mt", "es"),
    SourceId(SourceKind.MT, "sim-mt", "fr"),
    SourceId(SourceKind.MT, "sim-mt", "zh"),
    SourceId(SourceKind.WS, "sim-ws", "en"),
    SourceId(SourceKind.LLM, "sim-llm", "en"),
)


@dataclass
class Truth:
    valid: list
    invalid: list
    distractors: list


class SimulatedSource:
    """One source system answering from the world's hidden truth."""

    def __init__(self, source_id, truth, p_correct=0.6, seed=0, variant_rate=0.2):
        self.source_id = source_id
        self.truth = truth
        self.p_correct = p_correct
        self.seed = seed
        self.variant_rate = variant_rate

    def source_ids(self, target):
        return [self.source_id]

    def answer(self, entity_id):
        t = self.truth[entity_id]
        rng = random.Random(f"{self.seed}|{self.source_id}|{entity_id}")
        if rng.random() < self.p_correct:
            value = t.valid[0]
            if rng.random() < self.variant_rate:
                value = rng.choice([value.upper(), value.lower(), value + "."])
            return value
        return rng.choice(t.distractors)

    def propose(self, entity, target):
        value = self.answer(entity.id)
        return Proposal([CandidateAnswer(value, self.source_id, target, entity.id)])


def _word(rng):
    return "".join(rng.choice(_SYLLABLES) for _ in range(rng.randint(2, 3))).capitalize()


def _name(rng):
    return " ".join(_word(rng) for _ in range(rng.randint(1, 2)))


def _corrupt(rng, name):
    chars = list(name)
    idx = [i for i, c in enumerate(chars) if c.isalpha()]
    i = rng.choice(idx)
    op = rng.randrange(3)
    if op == 0:
        chars[i] = rng.choice([c for c in string.ascii_lowercase if c != chars[i].lower()])
    elif op == 1 and len(idx) > 3:
        del chars[i]
    else:
        chars.insert(i, rng.choice(string.ascii_lowercase))
    return "".join(chars)


def _distinct_corruptions(rng, name, taken, k):
    out = []
    while len(out) < k:
        c = _corrupt(rng, name)
        key = normalize_name(c)
        if key and key not in taken:
            taken.add(key)
            out.append(c)
    return out


@dataclass
class SyntheticWorld:
    snapshot: KgSnapshot
    benchmark: list
    truth: dict
    target: str
    seed: int
    sources: list = field(default_factory=list)


def make_world(n_entities=200, seed=0, target="it", p_correct=0.6, source_ids=DEFAULT_SOURCES,
               n_distractors=3, alt_rate=0.3, existing_rate=0.7, invalid_rate=0.5):
    rng = random.Random(seed)
    entities, benchmark, truth = [], [], {}
    for i in range(n_entities):
        eid = f"S{i:04d}"
        primary = _name(rng)
        valid = [primary]
        if rng.random() < alt_rate:
            alt = primary.split()[0] if " " in primary else primary + " " + _word(rng)
            if normalize_name(alt) != normalize_name(primary):
                valid.append(alt)
        taken = {normalize_name(v) for v in valid}
        distractors = _distinct_corruptions(rng, primary, taken, n_distractors)
        existing, invalid = [], []
        if rng.random() < existing_rate:
            existing.append(primary)
        if rng.random() < invalid_rate:
            invalid = _distinct_corruptions(rng, primary, taken, 1)
            existing.extend(invalid)
        truth[eid] = Truth(valid, invalid, distractors)
        names = {"en": [_name(rng)]}
        if existing:
            names[target] = existing
        entities.append(EntityRecord(
            eid,
            names=names,
            descriptions={"en": "synthetic entity"},
            instance_of={"en": ["thing"]},
            page_views={"en": rng.randint(100, 100000)},
        ))
        benchmark.append(BenchmarkEntry(eid, target, frozenset(valid), frozenset(invalid)))
    world = SyntheticWorld(KgSnapshot(entities), benchmark, truth, target, seed)
    world.sources = [SimulatedSource(sid, truth, p_correct, seed) for sid in source_ids]
    return world


def run_mnta(world, sources=None, cfg=None):
    """EnhancementResults for every entity, as a load_results-style dict."""
    sources = world.sources if sources is None else sources
    cfg = cfg or EnsembleConfig()
    results = {}
    for ent in world.snapshot:
        res = enhance_entity(ent, world.target, sources, cfg)
        results[(ent.id, world.target)] = (
            [a.value for a in res.accepted], list(res.flagged_incorrect))
    return results


def run_single(world, source):
    """Baseline where one source's own answers are the accepted set."""
    results = {}
    for ent in world.snapshot:
        cands = source.propose(ent, world.target).candidates
        accepted = [a.value for a in score_candidates(cands)]
        existing = list(ent.names.get(world.target, ()))
        backed = score_candidates(cands)
        results[(ent.id, world.target)] = (accepted, flag_incorrect(existing, backed))
    return results


def scores(world, results, mode="macro"):
    rep = evaluate(world.benchmark, results, mode).per_language[world.target]
    return rep
