"""One-shot prompting of an LLM for a target-language name."""

from __future__ import annotations

import random
import re
import threading
from typing import NamedTuple

from ..errors import FormatError, SourceError
from ..languages import language_name
from ..store import PopularityBucket
from .base import CandidateAnswer, Proposal, SourceId, SourceKind

MAX_ANSWER_CHARS = 120
PROMPT_LANG = "en"


class LLMTask(NamedTuple):
    name: str
    description: str
    target_lang: str
    entity_id: str | None = None


class LLMExample(NamedTuple):
    name: str
    description: str
    target_name: str
    entity_id: str | None = None


PROMPT_TEMPLATE = """\
Given an entity name in English and a short description of the entity in English, \
complete the following with the corresponding entity name in {language}.

Example:
English name: {example_name}
English description: {example_description}
{label} name: {example_target}

Task:
English name: {name}
English description: {description}
{label} name: """


def build_llm_prompt(task, example):
    task = LLMTask(*task)
    example = LLMExample(*example)
    for what, value in (("task name", task.name), ("task description", task.description),
                        ("example name", example.name),
                        ("example description", example.description),
                        ("example target name", example.target_name)):
        if not value or not value.strip():
            raise ValueError(f"{what} must be non-empty")
    if task.entity_id is not None and task.entity_id == example.entity_id:
        raise ValueError("example entity must differ from the task entity")
    if (task.name, task.description) == (example.name, example.description):
        raise ValueError("example entity must differ from the task entity")
    return PROMPT_TEMPLATE.format(
        language=language_name(task.target_lang),
        label=task.target_lang.upper(),
        example_name=example.name.strip(),
        example_description=example.description.strip(),
        example_target=example.target_name.strip(),
        name=task.name.strip(),
        description=task.description.strip(),
    )


_LABEL_LINE = re.compile(r"^([A-Z]{2,8}(?:-[A-Z0-9]{1,8})*) name: (.*)$", re.MULTILINE)

_REFUSALS = [
    re.compile(p, re.IGNORECASE)
    for p in (
        r"\bas an? (?:ai|(?:large )?language model)\b",
        r"^i(?:'m| am) (?:sorry|not sure|unable)\b",
        r"^i can(?:not|'t)\b",
        r"^sorry\b",
        r"^unfortunately\b",
    )
]

_PREAMBLES = [
    re.compile(p, re.IGNORECASE)
    for p in (
        r"^(?:sure|certainly|okay|ok)\b[,!.:]?\s*",
        r"^(?:answer|output|result)\s*[:\-]\s*",
        r"^(?:the\s+)?(?:\w+\s+)?(?:name|translation)\s+(?:of\s+.+?\s+)?(?:in\s+\w+\s+)?is\s*:?\s+",
    )
]

_EXPLANATION = re.compile(r"\s+because\b.*$", re.IGNORECASE)
_QUOTES = "\"'`“”‘’«»「」『』"
_TRAILING = ".,;:!?。、！？"
_KEYWORDS = ("name:", "description:")


def prompt_parts(prompt):
    """(target label, example answer) recovered from a rendered prompt."""
    labels = _LABEL_LINE.findall(prompt)
    if not labels:
        raise ValueError("prompt has no target-language label line")
    label, example_answer = labels[0]
    return label, example_answer.strip()


def _clean(line):
    text = line.strip()
    for pattern in _PREAMBLES:
        text = pattern.sub("", text, count=1)
    text = _EXPLANATION.sub("", text)
    prev = None
    while prev != text:
        prev = text
        text = text.strip().strip(_QUOTES).rstrip(_TRAILING)
    return text.strip()


def parse_llm_answer(raw, prompt, *, source=None, entity_id=""):
    """Reduce a completion to a single candidate name or raise FormatError."""
    label, example_answer = prompt_parts(prompt)
    target_lang = label.lower()
    lines = [ln for ln in raw.splitlines() if ln.strip()]
    if not lines:
        raise FormatError("empty completion")
    first = lines[0].strip()
    if any(p.search(first) for p in _REFUSALS):
        raise FormatError(f"completion is a refusal or preamble: {first[:40]!r}")
    value = _clean(first)
    if not value:
        raise FormatError("nothing left after stripping the completion")
    if len(value) > MAX_ANSWER_CHARS:
        raise FormatError("completion too long to be a name")
    lowered = value.lower()
    if any(k in lowered for k in _KEYWORDS):
        raise FormatError("completion echoes the prompt template")
    if value == example_answer:
        raise FormatError("completion copies the example answer")
    source = source or SourceId(SourceKind.LLM, "llm", PROMPT_LANG)
    return CandidateAnswer(value, source, target_lang, entity_id, raw=raw)


def entity_type(entity):
    labels = entity.instance_of.get(PROMPT_LANG) or ()
    return labels[0] if labels else None


class LLMSource:
    """Prompts an LLM with one same-type head entity as the worked example."""

    def __init__(self, client, snapshot, seed=0, floor=100):
        self.client = client
        self.engine = client.engine
        self.snapshot = snapshot
        self.seed = seed
        self.floor = floor
        self._pools = {}
        self._lock = threading.Lock()

    def source_ids(self, target):
        return [] if target == PROMPT_LANG else [SourceId(SourceKind.LLM, self.engine, PROMPT_LANG)]

    def _pool(self, etype, target):
        key = (etype, target)
        with self._lock:
            pool = self._pools.get(key)
            if pool is None:
                buckets = self.snapshot.bucket_table(PROMPT_LANG, self.floor)
                pool = sorted(
                    e.id for e in self.snapshot
                    if buckets.get(e.id) is PopularityBucket.HEAD
                    and entity_type(e) == etype
                    and e.primary_name(PROMPT_LANG)
                    and e.context(PROMPT_LANG)
                    and e.primary_name(target)
                )
                self._pools[key] = pool
        return pool

    def pick_example(self, entity, target):
        etype = entity_type(entity)
        if etype is None:
            return None
        pool = [i for i in self._pool(etype, target) if i != entity.id]
        if not pool:
            return None
        rng = random.Random(f"{self.seed}:{entity.id}:{target}")
        ex = self.snapshot.get(rng.choice(pool))
        return LLMExample(ex.primary_name(PROMPT_LANG), ex.context(PROMPT_LANG),
                          ex.primary_name(target), ex.id)

    def propose(self, entity, target):
        out = Proposal()
        if target == PROMPT_LANG:
            return out
        name, context = entity.primary_name(PROMPT_LANG), entity.context(PROMPT_LANG)
        if not name or not context:
            out.counters.add("no_context")
            return out
        example = self.pick_example(entity, target)
        if example is None:
            out.counters.add("no_example")
            return out
        try:
            prompt = build_llm_prompt(LLMTask(name, context, target, entity.id), example)
        except ValueError:
            out.counters.add("no_example")
            return out
        try:
            raw = self.client.complete(prompt)
        except SourceError:
            out.counters.add("source_errors")
            return out
        try:
            source = SourceId(SourceKind.LLM, self.engine, PROMPT_LANG)
            out.candidates.append(parse_llm_answer(raw, prompt, source=source, entity_id=entity.id))
        except FormatError:
            out.counters.add("format_errors")
        return out
