"""Marked sentences for translation and recovery of the marked span.

A name and its description are rendered as a short copula sentence in
the source language with the part to translate wrapped in markers, e.g.
``[Apple] is an American multinational technology company.``  After
translation the span between the markers is cut back out.
"""

from __future__ import annotations

import enum
import json
import re
from dataclasses import dataclass
from importlib import resources

from .errors import AlignmentError, MarkerCollisionError, NoContextError

DEFAULT_MARKERS = ("[", "]")
_ARTICLES = {"a", "an", "the"}


class Direction(str, enum.Enum):
    NAME = "name"
    DESCRIPTION = "description"


@dataclass(frozen=True)
class MarkedSentence:
    text: str
    lang: str
    entity_id: str = ""
    markers: tuple = DEFAULT_MARKERS

    def __post_init__(self):
        open_, close = self.markers
        if self.text.count(open_) != 1 or self.text.count(close) != 1:
            raise ValueError("marked sentence needs exactly one marker pair")
        start, end = self.text.index(open_), self.text.index(close)
        if start > end or not self.text[start + len(open_):end].strip():
            raise ValueError("marker span must be ordered and non-empty")

    @property
    def span(self):
        open_, close = self.markers
        start = self.text.index(open_) + len(open_)
        return self.text[start:self.text.index(close)]


def load_templates(path=None):
    if path is None:
        text = resources.files(__package__).joinpath("templates.json").read_text("utf-8")
    else:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    return json.loads(text)


_DEFAULT_TEMPLATES = None


def default_templates():
    global _DEFAULT_TEMPLATES
    if _DEFAULT_TEMPLATES is None:
        _DEFAULT_TEMPLATES = load_templates()
    return _DEFAULT_TEMPLATES


def english_article(phrase):
    """'a', 'an' or '' for the noun phrase that follows 'is'."""
    words = phrase.split()
    if not words:
        return ""
    if words[0].lower() in _ARTICLES:
        return ""
    alpha = [w for w in words if w[:1].isalpha()]
    # Proper-noun phrase: every word capitalized ("United States Navy").
    if len(alpha) > 1 and all(w[0].isupper() for w in alpha):
        return ""
    return "an" if words[0][0].lower() in "aeiou" else "a"


def _template(lang, key, templates):
    table = templates.get(lang) or templates["en"]
    tpl = table.get(key)
    if tpl is None:
        tpl = templates["en"][key]
    return tpl


def _render(tpl, markers, **values):
    article = values.pop("article", "")
    values["article"] = f"{article} " if article else ""
    if markers == DEFAULT_MARKERS:
        return tpl.format(**values)
    # Templates are written with [ ]; swap in the configured pair after formatting.
    open_, close = markers
    shielded = tpl.replace("[", "\x00").replace("]", "\x01")
    return shielded.format(**values).replace("\x00", open_).replace("\x01", close)


def _check(text, what, markers):
    for m in markers:
        if m in text:
            raise MarkerCollisionError(f"{what} contains marker {m!r}: {text!r}")


def naturalize(name, description, lang, direction=Direction.NAME, *,
               entity_id="", templates=None, markers=DEFAULT_MARKERS):
    name = name.strip() if isinstance(name, str) else ""
    description = description.strip() if isinstance(description, str) else ""
    if not name:
        raise ValueError("name must be non-empty")
    if not description:
        raise ValueError("description must be non-empty")
    _check(name, "name", markers)
    _check(description, "description", markers)
    templates = templates or default_templates()
    direction = Direction(direction)
    key = "name_direction" if direction is Direction.NAME else "description_direction"
    article = english_article(description) if lang == "en" else ""
    text = _render(_template(lang, key, templates), markers,
                   name=name, description=description, article=article)
    return MarkedSentence(text, lang, entity_id, markers)


def naturalize_fallback(name, instance_of_label, lang, *, entity_id="",
                        templates=None, markers=DEFAULT_MARKERS):
    name = name.strip() if isinstance(name, str) else ""
    label = instance_of_label.strip() if isinstance(instance_of_label, str) else ""
    if not name:
        raise ValueError("name must be non-empty")
    if not label:
        raise NoContextError(f"no instance-of label for {name!r}")
    _check(name, "name", markers)
    _check(label, "instance-of label", markers)
    templates = templates or default_templates()
    article = english_article(label) if lang == "en" else ""
    text = _render(_template(lang, "fallback", templates), markers,
                   name=name, **{"class": label}, article=article)
    return MarkedSentence(text, lang, entity_id, markers)


def naturalize_entity(entity, lang, direction=Direction.NAME, *, templates=None,
                      markers=DEFAULT_MARKERS):
    """Marked sentence for an entity's primary name in ``lang``.

    Uses the description when present, else the first instance-of label.
    Raises NoContextError when neither exists (or no name exists).
    """
    name = entity.primary_name(lang)
    if not name:
        raise NoContextError(f"{entity.id}: no name in {lang!r}")
    desc = entity.descriptions.get(lang, "").strip()
    if desc:
        return naturalize(name, desc, lang, direction, entity_id=entity.id,
                          templates=templates, markers=markers)
    if direction is Direction.DESCRIPTION:
        raise NoContextError(f"{entity.id}: no description in {lang!r}")
    labels = [x for x in entity.instance_of.get(lang, ()) if x.strip()]
    if not labels:
        raise NoContextError(f"{entity.id}: no description or instance-of label in {lang!r}")
    return naturalize_fallback(name, labels[0], lang, entity_id=entity.id,
                               templates=templates, markers=markers)


def extract_marked_span(translated, markers=DEFAULT_MARKERS):
    open_, close = markers
    if translated.count(open_) != 1 or translated.count(close) != 1:
        raise AlignmentError("expected exactly one marker pair")
    start = translated.index(open_)
    end = translated.index(close)
    if end < start:
        raise AlignmentError("closing marker precedes opening marker")
    span = translated[start + len(open_):end].strip()
    if not span:
        raise AlignmentError("empty marked span")
    return span
