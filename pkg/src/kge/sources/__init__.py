"""Candidate generators: machine translation, web search, LLM prompting, replay."""

from .base import CandidateAnswer, Counters, Proposal, SourceId, SourceKind, SourceRequest
from .http import HttpLLMClient, HttpMTClient, HttpWSClient
from .llm import LLMExample, LLMSource, LLMTask, build_llm_prompt, parse_llm_answer
from .mt import MTSource, mt_candidates
from .recorded import RecordedSource, candidate_to_json, recorded_source
from .ws import WSSource, build_ws_query, ws_candidates, ws_extract_highlights

__all__ = [
    "CandidateAnswer",
    "Counters",
    "HttpLLMClient",
    "HttpMTClient",
    "HttpWSClient",
    "LLMExample",
    "LLMSource",
    "LLMTask",
    "MTSource",
    "Proposal",
    "RecordedSource",
    "SourceId",
    "SourceKind",
    "SourceRequest",
    "WSSource",
    "build_llm_prompt",
    "build_ws_query",
    "candidate_to_json",
    "mt_candidates",
    "parse_llm_answer",
    "recorded_source",
    "ws_candidates",
    "ws_extract_highlights",
]
