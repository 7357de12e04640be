"""Language tags and the English names used in queries and prompts."""

import re

from .errors import ValidationError

# The ten benchmark languages.
BENCHMARK_LANGUAGES = ("ar", "de", "en", "es", "fr", "it", "ja", "ko", "ru", "zh")

# Default MT source languages (higher-resource languages only).
MT_SOURCE_LANGUAGES = ("de", "en", "es", "fr", "it", "ja", "zh")

LANGUAGE_NAMES = {
    "ar": "Arabic",
    "bg": "Bulgarian",
    "ca": "Catalan",
    "cs": "Czech",
    "da": "Danish",
    "de": "German",
    "el": "Greek",
    "en": "English",
    "es": "Spanish",
    "et": "Estonian",
    "fa": "Persian",
    "fi": "Finnish",
    "fr": "French",
    "he": "Hebrew",
    "hi": "Hindi",
    "hr": "Croatian",
    "hu": "Hungarian",
    "id": "Indonesian",
    "it": "Italian",
    "ja": "Japanese",
    "ko": "Korean",
    "lt": "Lithuanian",
    "lv": "Latvian",
    "nl": "Dutch",
    "no": "Norwegian",
    "pl": "Polish",
    "pt": "Portuguese",
    "ro": "Romanian",
    "ru": "Russian",
    "sk": "Slovak",
    "sl": "Slovenian",
    "sr": "Serbian",
    "sv": "Swedish",
    "th": "Thai",
    "tr": "Turkish",
    "uk": "Ukrainian",
    "vi": "Vietnamese",
    "zh": "Chinese",
}

_TAG_RE = re.compile(r"^[a-z]{2,8}(-[a-z0-9]{1,8})*$")


def check_tag(tag):
    """Return ``tag`` if it is a well-formed lowercase language tag, else raise."""
    if not isinstance(tag, str) or not _TAG_RE.match(tag):
        raise ValidationError(f"invalid language tag: {tag!r}")
    return tag


def is_known(tag):
    return tag in LANGUAGE_NAMES


def language_name(tag):
    """English name of a language, falling back to the upper-cased tag."""
    return LANGUAGE_NAMES.get(tag, tag.upper())
