"""Web search: count highlighted terms in result pages."""

from __future__ import annotations

from collections import Counter
from html.parser import HTMLParser

from ..errors import SourceError
from ..languages import language_name
from .base import CandidateAnswer, Proposal, SourceId, SourceKind

HIGHLIGHT_TAGS = frozenset({"b", "em"})
TOP_PAGES = 10
TOP_TERMS = 5
MIN_FREQ = 2
QUERY_LANG = "en"


class _HighlightParser(HTMLParser):
    def __init__(self):
        super().__init__(convert_charrefs=True)
        self.terms = []
        self._depth = 0
        self._buf = []

    def handle_starttag(self, tag, attrs):
        if tag in HIGHLIGHT_TAGS:
            self._depth += 1

    def handle_endtag(self, tag):
        if tag in HIGHLIGHT_TAGS and self._depth:
            self._depth -= 1
            if not self._depth:
                self._flush()

    def handle_data(self, data):
        if self._depth:
            self._buf.append(data)

    def _flush(self):
        term = " ".join("".join(self._buf).split())
        self._buf = []
        if term:
            self.terms.append(term)

    def close(self):
        super().close()
        if self._depth:
            self._depth = 0
            self._flush()


def _page_terms(page):
    if not isinstance(page, str):
        raise TypeError("page is not a string")
    parser = _HighlightParser()
    parser.feed(page)
    parser.close()
    return parser.terms


def ws_extract_highlights(pages, counters=None):
    """``(term, count)`` for every text inside <b>/<em>, in first-seen order."""
    counts = Counter()
    for page in pages:
        try:
            terms = _page_terms(page)
        except Exception:
            if counters is not None:
                counters.add("pages_skipped")
            continue
        counts.update(terms)
    # Counter preserves insertion order, i.e. first occurrence.
    return list(counts.items())


def build_ws_query(name, description, target_lang):
    lang = language_name(target_lang)
    if description:
        return f"{name} ({description}) in {lang}"
    return f"{name} in {lang}"


def select_terms(highlights, top=TOP_TERMS, min_freq=MIN_FREQ):
    kept = [(t, f) for t, f in highlights if f >= min_freq]
    # sorted() is stable, so equal counts stay in first-occurrence order.
    kept = sorted(kept, key=lambda tf: -tf[1])
    return kept[:top]


def ws_candidates(name, description, target_lang, search, *, entity_id="", counters=None):
    query = build_ws_query(name, description, target_lang)
    pages = search.search(query, target_lang)[:TOP_PAGES]
    highlights = ws_extract_highlights(pages, counters)
    source = SourceId(SourceKind.WS, search.engine, QUERY_LANG)
    return [
        CandidateAnswer(term, source, target_lang, entity_id, raw=f"{term}\t{freq}")
        for term, freq in select_terms(highlights)
    ]


class WSSource:
    def __init__(self, client):
        self.client = client
        self.engine = client.engine

    def source_ids(self, target):
        return [] if target == QUERY_LANG else [SourceId(SourceKind.WS, self.engine, QUERY_LANG)]

    def propose(self, entity, target):
        out = Proposal()
        if target == QUERY_LANG:
            return out
        name = entity.primary_name(QUERY_LANG)
        context = entity.context(QUERY_LANG)
        if not name:
            out.counters.add("no_context")
            return out
        try:
            out.candidates = ws_candidates(name, context, target, self.client,
                                           entity_id=entity.id, counters=out.counters)
        except SourceError:
            out.counters.add("source_errors")
        return out
