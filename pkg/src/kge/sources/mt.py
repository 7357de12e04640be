"""Machine translation of marked sentences, one vote per source language."""

from __future__ import annotations

from ..contextualizer import DEFAULT_MARKERS, Direction, extract_marked_span, naturalize_entity
from ..errors import AlignmentError, NoContextError, SourceError
from ..languages import MT_SOURCE_LANGUAGES
from .base import CandidateAnswer, Proposal, SourceId, SourceKind, SourceRequest


def mt_candidates(client, request, counters=None, markers=DEFAULT_MARKERS):
    """Translate ``request.marked`` and cut the marked span back out.

    Returns zero or one candidate.  Transport failures propagate as
    SourceError; lost or mangled markers yield ``[]`` and bump the
    alignment-failure counter.
    """
    marked = request.marked
    translated = client.translate(marked.text, request.source_lang, request.target_lang)
    try:
        value = extract_marked_span(translated, markers)
    except AlignmentError:
        if counters is not None:
            counters.add("alignment_failures")
        return []
    source = SourceId(SourceKind.MT, client.engine, request.source_lang)
    return [CandidateAnswer(value, source, request.target_lang, request.entity_id, raw=translated)]


class MTSource:
    def __init__(self, client, source_langs=MT_SOURCE_LANGUAGES, direction=Direction.NAME,
                 templates=None, markers=DEFAULT_MARKERS):
        self.client = client
        self.engine = client.engine
        self.source_langs = tuple(source_langs)
        self.direction = Direction(direction)
        self.templates = templates
        self.markers = markers

    def source_ids(self, target):
        return [SourceId(SourceKind.MT, self.engine, l) for l in self.source_langs if l != target]

    def propose(self, entity, target):
        out = Proposal()
        for lang in self.source_langs:
            if lang == target:
                continue
            try:
                marked = naturalize_entity(entity, lang, self.direction,
                                           templates=self.templates, markers=self.markers)
            except NoContextError:
                out.counters.add("no_context")
                continue
            except ValueError:
                # Marker collision in the stored name or description.
                out.counters.add("no_context")
                continue
            request = SourceRequest(entity.id, lang, target, marked=marked)
            try:
                out.candidates.extend(mt_candidates(self.client, request, out.counters, self.markers))
            except SourceError:
                out.counters.add("source_errors")
        return out
