"""JSON-over-HTTP clients for MT, WS and LLM services.

Wire schema::

    MT   POST /translate {"text", "source", "target"} -> {"text"}
    WS   GET  /search?q=...&lang=...                  -> {"pages": [html, ...]}
    LLM  POST /complete  {"prompt"}                   -> {"text"}

Endpoints come from ``KGE_<KIND>_ENDPOINT`` and keys from ``KGE_API_KEY_<KIND>``.
"""

from __future__ import annotations

import logging
import os
import threading

import httpx
from tenacity import (
    Retrying,
    before_sleep_log,
    retry_if_exception,
    stop_after_attempt,
    wait_exponential,
)

from ..errors import ConfigError, SourceError

log = logging.getLogger(__name__)

DEFAULT_PARALLELISM = 8
DEFAULT_ATTEMPTS = 3


def _is_retryable(exc):
    return isinstance(exc, SourceError) and exc.retryable


class JsonClient:
    kind = None

    def __init__(self, endpoint, *, engine="default", api_key=None, timeout=30.0,
                 parallelism=DEFAULT_PARALLELISM, attempts=DEFAULT_ATTEMPTS,
                 backoff=0.5, transport=None):
        if not endpoint:
            raise ConfigError(f"{self.kind} endpoint is not configured")
        if parallelism < 1:
            raise ConfigError("parallelism must be positive")
        headers = {"Authorization": f"Bearer {api_key}"} if api_key else {}
        self.engine = engine
        self.endpoint = endpoint
        self.attempts = attempts
        self.backoff = backoff
        self._client = httpx.Client(base_url=endpoint, timeout=timeout,
                                    headers=headers, transport=transport)
        self._slots = threading.BoundedSemaphore(parallelism)

    @classmethod
    def from_env(cls, engine="default", env=None, **kwargs):
        env = os.environ if env is None else env
        kind = cls.kind.upper()
        endpoint = env.get(f"KGE_{kind}_ENDPOINT")
        if not endpoint:
            raise ConfigError(f"KGE_{kind}_ENDPOINT is not set")
        return cls(endpoint, engine=engine, api_key=env.get(f"KGE_API_KEY_{kind}"), **kwargs)

    def close(self):
        self._client.close()

    def _send_once(self, method, path, **kwargs):
        try:
            with self._slots:
                resp = self._client.request(method, path, **kwargs)
        except httpx.TransportError as exc:
            raise SourceError(f"{self.kind} transport failure: {exc}") from exc
        if resp.status_code == 429 or resp.status_code >= 500:
            raise SourceError(f"{self.kind} service returned {resp.status_code}")
        if resp.status_code >= 400:
            raise SourceError(f"{self.kind} request rejected ({resp.status_code})", retryable=False)
        try:
            return resp.json()
        except ValueError as exc:
            raise SourceError(f"{self.kind} returned invalid JSON", retryable=False) from exc

    def request(self, method, path, **kwargs):
        retrying = Retrying(
            stop=stop_after_attempt(self.attempts),
            wait=wait_exponential(multiplier=self.backoff, max=8.0),
            retry=retry_if_exception(_is_retryable),
            before_sleep=before_sleep_log(log, logging.WARNING),
            reraise=True,
        )
        return retrying(self._send_once, method, path, **kwargs)

    @staticmethod
    def _field(body, key, kind):
        if not isinstance(body, dict) or key not in body:
            raise SourceError(f"{kind} response lacks {key!r}", retryable=False)
        return body[key]


class HttpMTClient(JsonClient):
    kind = "mt"

    def translate(self, text, source, target):
        body = self.request("POST", "/translate",
                            json={"text": text, "source": source, "target": target})
        out = self._field(body, "text", self.kind)
        if not isinstance(out, str):
            raise SourceError("mt response text is not a string", retryable=False)
        return out


class HttpWSClient(JsonClient):
    kind = "ws"

    def search(self, query, lang):
        body = self.request("GET", "/search", params={"q": query, "lang": lang})
        pages = self._field(body, "pages", self.kind)
        if not isinstance(pages, list):
            raise SourceError("ws response pages is not a list", retryable=False)
        return pages


class HttpLLMClient(JsonClient):
    kind = "llm"

    def complete(self, prompt):
        body = self.request("POST", "/complete", json={"prompt": prompt})
        out = self._field(body, "text", self.kind)
        if not isinstance(out, str):
            raise SourceError("llm response text is not a string", retryable=False)
        return out
