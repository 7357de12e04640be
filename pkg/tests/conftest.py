import json
import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))


def write_jsonl(path, rows):
    with open(path, "w", encoding="utf-8") as fh:
        for row in rows:
            fh.write(json.dumps(row, ensure_ascii=False) + "\n")
    return path


@pytest.fixture
def jsonl(tmp_path):
    def make(name, rows):
        return write_jsonl(tmp_path / name, rows)
    return make


class StubMT:
    """Translator returning canned outputs keyed by (source, target)."""

    def __init__(self, outputs, engine="stub"):
        self.outputs = outputs
        self.engine = engine
        self.calls = []

    def translate(self, text, source, target):
        self.calls.append((text, source, target))
        out = self.outputs.get((source, target), self.outputs.get(source))
        if isinstance(out, Exception):
            raise out
        if callable(out):
            return out(text)
        return out


class StubSearch:
    def __init__(self, pages, engine="stub-ws"):
        self.pages = pages
        self.engine = engine
        self.queries = []

    def search(self, query, lang):
        self.queries.append((query, lang))
        if isinstance(self.pages, Exception):
            raise self.pages
        return self.pages


class StubLLM:
    def __init__(self, answer, engine="stub-llm"):
        self.answer = answer
        self.engine = engine
        self.prompts = []

    def complete(self, prompt):
        self.prompts.append(prompt)
        if isinstance(self.answer, Exception):
            raise self.answer
        return self.answer


# -- acceptance reporting ------------------------------------------------------

_CRITERIA = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(n, title): acceptance criterion number")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    marker = item.get_closest_marker("criterion")
    if marker is None or report.when not in ("setup", "call"):
        return
    n, title = marker.args
    if report.failed or (report.when == "call"):
        prev = _CRITERIA.get(n, (title, True))[1]
        _CRITERIA[n] = (title, prev and not report.failed)


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(_CRITERIA):
        title, ok = _CRITERIA[n]
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'} criterion {n:>2}: {title}")
