import json

import httpx
import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import StubLLM, StubMT, StubSearch
from kge.contextualizer import naturalize
from kge.errors import ConfigError, FormatError, ParseError, SourceError
from kge.sources import (
    HttpLLMClient,
    HttpMTClient,
    HttpWSClient,
    LLMExample,
    LLMSource,
    LLMTask,
    MTSource,
    RecordedSource,
    SourceId,
    SourceKind,
    SourceRequest,
    WSSource,
    build_llm_prompt,
    build_ws_query,
    candidate_to_json,
    mt_candidates,
    parse_llm_answer,
    recorded_source,
    ws_candidates,
    ws_extract_highlights,
)
from kge.sources.base import Counters
from kge.sources.ws import select_terms
from kge.store import EntityRecord, KgSnapshot

APPLE = "[Apple] is an American technology company."


def apple_request(src="en"):
    return SourceRequest("Q312", src, "it", marked=naturalize("Apple", "American technology company", src))


# -- identities ----------------------------------------------------------------

def test_source_id_round_trip_and_order():
    sid = SourceId(SourceKind.MT, "nllb", "en")
    assert str(sid) == "mt:nllb:en"
    assert SourceId.parse("mt:nllb:en") == sid
    assert SourceId("ws", "g", "en").kind is SourceKind.WS
    with pytest.raises(ValueError):
        SourceId("mt", "", "en")


def test_request_languages_must_differ():
    with pytest.raises(ValueError):
        SourceRequest("Q1", "it", "it")


# -- MT ------------------------------------------------------------------------

def test_mt_stub_round_trip():
    client = StubMT({"en": "[Apple] è un'azienda tecnologica americana."})
    out = mt_candidates(client, apple_request())
    assert len(out) == 1
    assert out[0].value == "Apple"
    assert out[0].source == SourceId(SourceKind.MT, "stub", "en")
    assert client.calls == [(APPLE, "en", "it")]


def test_mt_marker_loss_counts_alignment_failure():
    counters = Counters()
    client = StubMT({"en": "Apple è un'azienda."})
    assert mt_candidates(client, apple_request(), counters) == []
    assert counters.alignment_failures == 1


def test_mt_transport_error_propagates():
    client = StubMT({"en": SourceError("boom")})
    with pytest.raises(SourceError):
        mt_candidates(client, apple_request())


def test_mt_source_fans_out_over_source_languages():
    ent = EntityRecord("Q312", names={"en": ["Apple"], "de": ["Apple"], "it": ["Apple Inc."]},
                       descriptions={"en": "American technology company",
                                     "de": "US-amerikanischer Technologiekonzern"})
    client = StubMT({"en": "[Apple] è un'azienda.", "de": "[Apple] è un'azienda."})
    prop = MTSource(client).propose(ent, "it")
    sources = [c.source for c in prop.candidates]
    assert sources == [SourceId("mt", "stub", "de"), SourceId("mt", "stub", "en")]
    # es/fr/ja/zh have no name; it is the target
    assert prop.counters.no_context == 4
    assert {c[1] for c in client.calls} == {"de", "en"}


def test_mt_source_counts_errors_per_language():
    ent = EntityRecord("Q1", names={"en": ["A"], "fr": ["A"]},
                       descriptions={"en": "letter", "fr": "lettre"})
    client = StubMT({"en": SourceError("down"), "fr": "A è."})
    prop = MTSource(client, ["en", "fr"]).propose(ent, "it")
    assert prop.candidates == []
    assert prop.counters.source_errors == 1
    assert prop.counters.alignment_failures == 1


def test_mt_source_at_most_one_candidate_per_language():
    ent = EntityRecord("Q1", names={l: ["Rome"] for l in ("en", "de", "fr")},
                       descriptions={l: "city" for l in ("en", "de", "fr")})
    client = StubMT({l: "[Roma] [x]" if l == "de" else "[Roma] è." for l in ("en", "de", "fr")})
    prop = MTSource(client).propose(ent, "it")
    ids = [c.source for c in prop.candidates]
    assert len(ids) == len(set(ids)) == 2


# -- WS ------------------------------------------------------------------------

def test_ws_highlights_basic():
    page = "<p><b>Niki Lauda</b> was a driver. <em>Niki  Lauda</em> won.</p>"
    assert ws_extract_highlights([page]) == [("Niki Lauda", 2)]


def test_ws_highlights_none():
    assert ws_extract_highlights(["<p>nothing here</p>", ""]) == []


def test_ws_highlights_case_insensitive_tags_distinct_forms():
    assert ws_extract_highlights(["<B>Rome</B><b>rome</b>"]) == [("Rome", 1), ("rome", 1)]


def test_ws_highlights_nested_and_entities():
    pages = ["<em><b>Ro</b>ma</em> <b>A &amp; B</b>", "<b>Roma <i>Capitale</i></b><EM>A &amp; B</EM>"]
    assert ws_extract_highlights(pages) == [("Roma", 1), ("A & B", 2), ("Roma Capitale", 1)]


def test_ws_highlights_skips_bad_pages():
    counters = Counters()
    assert ws_extract_highlights([None, b"<b>x</b>", "<b>ok</b>"], counters) == [("ok", 1)]
    assert counters.pages_skipped == 2
    assert ws_extract_highlights([None], counters) == []


def test_ws_highlights_unclosed_tag_flushed():
    assert ws_extract_highlights(["<b>Roma"]) == [("Roma", 1)]


GOLDEN_PAGES = [
    "<html><body><h3><b>Rom</b> – Wikipedia</h3><p><em>Rom</em> ist die Hauptstadt. "
    "<b>Roma</b> auf Italienisch.</p></body></html>",
    "<div><b>Rom</b> <b>Romulus</b> <em>Roma</em> <b>Rom</b></div>",
    "<div><EM>Rom</EM> und <b>Roma</b></div>",
]


def test_ws_golden_highlights_and_selection():
    hl = ws_extract_highlights(GOLDEN_PAGES)
    assert hl == [("Rom", 5), ("Roma", 3), ("Romulus", 1)]
    assert select_terms(hl) == [("Rom", 5), ("Roma", 3)]


def test_ws_candidates_filters_and_caps():
    terms = [f"T{i}" for i in range(6)]
    page = "".join(f"<b>{t}</b><em>{t}</em>" for t in terms) + "<b>lonely</b>"
    search = StubSearch([page])
    out = ws_candidates("Rome", "capital of Italy", "de", search, entity_id="Q220")
    assert [c.value for c in out] == terms[:5]
    assert all(c.source == SourceId("ws", "stub-ws", "en") for c in out)
    assert search.queries == [("Rome (capital of Italy) in German", "de")]


def test_ws_candidates_all_singletons():
    assert ws_candidates("x", "y", "de", StubSearch(["<b>a</b><b>b</b>"])) == []


def test_ws_candidates_uses_top_ten_pages_only():
    pages = ["<b>noise</b>"] * 10 + ["<b>late</b>", "<b>late</b>"]
    out = ws_candidates("x", "y", "de", StubSearch(pages))
    assert [c.value for c in out] == ["noise"]


def test_ws_tie_break_by_first_occurrence():
    assert select_terms([("b", 2), ("a", 3), ("c", 2)]) == [("a", 3), ("b", 2), ("c", 2)]


@given(st.lists(st.tuples(st.text(min_size=1, max_size=5), st.integers(1, 9)), max_size=20,
                unique_by=lambda t: t[0]))
def test_ws_selection_contract(hl):
    out = select_terms(hl)
    assert len(out) <= 5
    assert all(f >= 2 for _, f in out)
    assert [f for _, f in out] == sorted((f for _, f in out), reverse=True)


def test_ws_query_without_description():
    assert build_ws_query("Rome", "", "it") == "Rome in Italian"


def test_ws_source_wraps_errors():
    ent = EntityRecord("Q1", names={"en": ["Rome"]}, instance_of={"en": ["city"]})
    prop = WSSource(StubSearch(SourceError("down"))).propose(ent, "it")
    assert prop.candidates == [] and prop.counters.source_errors == 1
    assert WSSource(StubSearch([])).propose(ent, "en").candidates == []


# -- LLM -----------------------------------------------------------------------

ROME = LLMTask("Rome", "capital city of Italy", "it")
PARIS = LLMExample("Paris", "capital city of France", "Parigi")

EXPECTED_PROMPT = (
    "Given an entity name in English and a short description of the entity in English, "
    "complete the following with the corresponding entity name in Italian.\n"
    "\n"
    "Example:\n"
    "English name: Paris\n"
    "English description: capital city of France\n"
    "IT name: Parigi\n"
    "\n"
    "Task:\n"
    "English name: Rome\n"
    "English description: capital city of Italy\n"
    "IT name: "
)


def test_prompt_matches_hand_instantiated_template():
    prompt = build_llm_prompt(ROME, PARIS)
    assert prompt == EXPECTED_PROMPT
    assert prompt.endswith("IT name: ")


def test_prompt_accepts_plain_tuples():
    assert build_llm_prompt(("Rome", "capital city of Italy", "it"),
                            ("Paris", "capital city of France", "Parigi")) == EXPECTED_PROMPT


def test_prompt_preconditions():
    with pytest.raises(ValueError):
        build_llm_prompt(ROME, LLMExample("", "x", "y"))
    with pytest.raises(ValueError):
        build_llm_prompt(ROME, LLMExample("Rome", "capital city of Italy", "Roma"))
    with pytest.raises(ValueError):
        build_llm_prompt(LLMTask("Rome", "c", "it", "Q220"), LLMExample("Roma", "d", "Roma", "Q220"))


@pytest.mark.parametrize("raw,value", [
    ("Roma", "Roma"),
    ('"Roma".\n', "Roma"),
    ("  \n Roma \nbecause it is Latin", "Roma"),
    ("The name of Rome in Italian is Roma.", "Roma"),
    ("The Italian name is «Roma»", "Roma"),
    ("Sure! Roma", "Roma"),
    ("Answer: Roma", "Roma"),
    ("Roma because that is the local name", "Roma"),
])
def test_parse_llm_answer(raw, value):
    cand = parse_llm_answer(raw, EXPECTED_PROMPT)
    assert cand.value == value
    assert cand.target_lang == "it"
    assert cand.raw == raw


@pytest.mark.parametrize("raw", [
    "As a language model, I cannot browse the web.",
    "I'm sorry, I don't know.",
    "",
    "\n\n",
    "Parigi",
    "IT name: Roma",
    "English description: capital",
    "x" * 121,
    "\"...\"",
])
def test_parse_llm_answer_rejects(raw):
    with pytest.raises(FormatError):
        parse_llm_answer(raw, EXPECTED_PROMPT)


@given(st.text(max_size=200))
def test_parse_llm_answer_never_multiline(raw):
    try:
        cand = parse_llm_answer(raw, EXPECTED_PROMPT)
    except FormatError:
        return
    assert "\n" not in cand.value and "\r" not in cand.value
    assert 0 < len(cand.value) <= 120


def _llm_snapshot():
    def ent(i, views, name_it=None, typ="city"):
        names = {"en": [f"City{i}"]}
        if name_it:
            names["it"] = [name_it]
        return EntityRecord(f"Q{i}", names=names, descriptions={"en": f"city number {i}"},
                            instance_of={"en": [typ]}, page_views={"en": views})
    ents = [ent(i, 10_000 - i, f"Citta{i}") for i in range(3)]
    ents += [ent(i, 200 + i) for i in range(3, 30)]
    ents.append(ent(99, 5000, "Persona", typ="human"))
    return KgSnapshot(ents)


def test_llm_source_selects_same_type_head_example_deterministically():
    snap = _llm_snapshot()
    client = StubLLM("Citta Nuova")
    src = LLMSource(client, snap, seed=7)
    target = snap.get("Q20")
    prop = src.propose(target, "it")
    assert [c.value for c in prop.candidates] == ["Citta Nuova"]
    assert prop.candidates[0].source == SourceId("llm", "stub-llm", "en")
    example = src.pick_example(target, "it")
    assert example.entity_id in {"Q0", "Q1", "Q2", "Q99"} and example.entity_id != "Q99"
    again = LLMSource(StubLLM("x"), snap, seed=7).pick_example(target, "it")
    assert again == example
    assert "English name: City20" in client.prompts[0]


def test_llm_source_no_example_for_unique_type():
    snap = _llm_snapshot()
    src = LLMSource(StubLLM("x"), snap)
    prop = src.propose(snap.get("Q99"), "it")
    assert prop.candidates == [] and prop.counters.no_example == 1


def test_llm_source_counts_format_and_source_errors():
    snap = _llm_snapshot()
    prop = LLMSource(StubLLM("As an AI language model..."), snap).propose(snap.get("Q20"), "it")
    assert prop.counters.format_errors == 1
    prop = LLMSource(StubLLM(SourceError("down")), snap).propose(snap.get("Q20"), "it")
    assert prop.counters.source_errors == 1


# -- recorded ------------------------------------------------------------------

ROW = {"entity": "Q220", "target": "it", "kind": "mt", "engine": "nllb",
       "source_lang": "en", "value": "Roma"}


def test_recorded_single_row(jsonl):
    src = recorded_source(jsonl("c.jsonl", [ROW]))
    got = src.lookup("Q220", "en", "it")
    assert [candidate_to_json(c) for c in got] == [ROW]
    assert src.lookup("Q220", "en", "it") == got
    assert src.lookup("Q1", "en", "it") == []


def test_recorded_golden_replay(jsonl):
    rows = [dict(ROW, source_lang=l, value=v) for l, v in (("en", "Roma"), ("de", "Roma"), ("fr", "Rome"))]
    rows.append(dict(ROW, entity="Q1", value="Parigi"))
    src = recorded_source(jsonl("c.jsonl", rows))
    ent = EntityRecord("Q220", names={"en": ["Rome"]})
    replay = [candidate_to_json(c) for c in src.propose(ent, "it").candidates]
    assert replay == rows[:3]
    assert src.propose(ent, "de").candidates == []


def test_recorded_bad_rows(jsonl):
    bad = dict(ROW)
    del bad["value"]
    with pytest.raises(ParseError):
        recorded_source(jsonl("c.jsonl", [ROW, bad]))
    with pytest.raises(ParseError):
        recorded_source(jsonl("d.jsonl", [dict(ROW, kind="oracle")]))


# -- HTTP wire schema ----------------------------------------------------------

def _transport(handler, log):
    def wrapped(request):
        log.append(request)
        return handler(request)
    return httpx.MockTransport(wrapped)


def test_http_mt_wire_schema():
    log = []

    def handler(request):
        body = json.loads(request.content)
        assert body == {"text": APPLE, "source": "en", "target": "it"}
        return httpx.Response(200, json={"text": "[Apple] è un'azienda."})

    client = HttpMTClient("http://mt.test", engine="nllb", api_key="k",
                          transport=_transport(handler, log))
    out = mt_candidates(client, apple_request())
    assert out[0].value == "Apple" and out[0].source == SourceId("mt", "nllb", "en")
    req = log[0]
    assert req.method == "POST" and req.url.path == "/translate"
    assert req.headers["authorization"] == "Bearer k"


def test_http_ws_wire_schema():
    log = []

    def handler(request):
        assert request.method == "GET" and request.url.path == "/search"
        assert request.url.params["q"] == "Rome (city) in Italian"
        assert request.url.params["lang"] == "it"
        return httpx.Response(200, json={"pages": ["<b>Roma</b><em>Roma</em>"]})

    client = HttpWSClient("http://ws.test", engine="g", transport=_transport(handler, log))
    assert [c.value for c in ws_candidates("Rome", "city", "it", client)] == ["Roma"]


def test_http_llm_wire_schema():
    log = []

    def handler(request):
        assert request.url.path == "/complete"
        assert json.loads(request.content) == {"prompt": "p"}
        return httpx.Response(200, json={"text": "Roma"})

    client = HttpLLMClient("http://llm.test", transport=_transport(handler, log))
    assert client.complete("p") == "Roma"


def test_http_retries_then_succeeds():
    log = []
    responses = iter([httpx.Response(503), httpx.Response(200, json={"text": "ok"})])
    client = HttpLLMClient("http://llm.test", backoff=0,
                           transport=_transport(lambda r: next(responses), log))
    assert client.complete("p") == "ok"
    assert len(log) == 2


def test_http_gives_up_after_three_attempts():
    log = []

    def handler(request):
        raise httpx.ConnectError("refused", request=request)

    client = HttpMTClient("http://mt.test", backoff=0, transport=_transport(handler, log))
    with pytest.raises(SourceError) as err:
        client.translate("x", "en", "it")
    assert err.value.retryable
    assert len(log) == 3


def test_http_client_errors_not_retried():
    log = []
    client = HttpMTClient("http://mt.test", backoff=0,
                          transport=_transport(lambda r: httpx.Response(400), log))
    with pytest.raises(SourceError) as err:
        client.translate("x", "en", "it")
    assert not err.value.retryable and len(log) == 1


def test_http_malformed_body():
    log = []
    client = HttpMTClient("http://mt.test", backoff=0,
                          transport=_transport(lambda r: httpx.Response(200, json={"nope": 1}), log))
    with pytest.raises(SourceError):
        client.translate("x", "en", "it")


def test_http_from_env():
    env = {"KGE_WS_ENDPOINT": "http://ws.test", "KGE_API_KEY_WS": "secret"}
    client = HttpWSClient.from_env("g", env=env)
    assert client.endpoint == "http://ws.test"
    with pytest.raises(ConfigError):
        HttpMTClient.from_env(env={})
    with pytest.raises(ConfigError):
        HttpMTClient("")
