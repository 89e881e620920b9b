"""Chat-completion gateway: HTTP client with retry/backoff, bounded
concurrency, on-disk response caching, and tolerant JSON extraction.

Any object with a ``.chat(ChatRequest) -> ChatResponse`` method and a
``.model`` attribute works as a gateway; tests substitute fakes freely.
"""
from __future__ import annotations

import hashlib
import json
import logging
import os
import random
import re
import threading
import time
from dataclasses import dataclass
from pathlib import Path

import requests

from .model import canonical_line

log = logging.getLogger(__name__)

API_KEY_ENV = "MCQFORGE_API_KEY"

RESPONSE_FORMATS = ("text", "json_object")


class GatewayError(Exception):
    pass


class TransientExhausted(GatewayError):
    """Retries used up on 429/5xx/timeouts."""


class AuthError(GatewayError):
    """401/403; never retried."""


class MalformedResponse(GatewayError):
    """Endpoint replied but without usable message content."""


class CacheIoError(GatewayError):
    pass


class JsonExtractError(GatewayError):
    """No JSON object recoverable from model output."""


@dataclass(frozen=True)
class ChatRequest:
    """One zero-shot round trip: exactly one system + one user message."""

    model: str
    system: str
    user: str
    temperature: float = 0.0
    max_tokens: int = 512
    response_format: str = "text"

    def __post_init__(self):
        if not self.system or not self.user:
            raise ValueError("system and user messages must be non-empty")
        if not 0.0 <= self.temperature <= 2.0:
            raise ValueError(f"temperature out of range: {self.temperature}")
        if self.max_tokens <= 0:
            raise ValueError("max_tokens must be positive")
        if self.response_format not in RESPONSE_FORMATS:
            raise ValueError(f"response_format must be one of {RESPONSE_FORMATS}")

    def cache_key(self) -> str:
        payload = canonical_line(
            {
                "model": self.model,
                "system": self.system,
                "user": self.user,
                "temperature": self.temperature,
                "max_tokens": self.max_tokens,
                "response_format": self.response_format,
            }
        )
        return hashlib.sha256(payload.encode("utf-8")).hexdigest()


@dataclass(frozen=True)
class ChatResponse:
    content: str
    model: str
    attempts: int = 1
    from_cache: bool = False
    latency_ms: int = 0


class HttpChatGateway:
    """OpenAI-compatible chat-completions client.

    Transient failures (HTTP 429/5xx, timeouts, connection errors) are
    retried with exponential backoff: base 1s, factor 2, jitter, up to
    ``max_retries`` retries. 401/403 fail immediately.
    """

    def __init__(
        self,
        base_url: str,
        model: str,
        api_key: str | None = None,
        timeout: float = 60.0,
        max_retries: int = 4,
        backoff_base: float = 1.0,
        parallelism: int = 4,
        session: requests.Session | None = None,
    ):
        if parallelism < 1:
            raise ValueError("parallelism must be >= 1")
        self.base_url = base_url.rstrip("/")
        self.model = model
        self.api_key = api_key if api_key is not None else os.environ.get(API_KEY_ENV, "")
        self.timeout = timeout
        self.max_retries = max_retries
        self.backoff_base = backoff_base
        self.parallelism = parallelism
        self._session = session or requests.Session()
        self._semaphore = threading.Semaphore(parallelism)

    def chat(self, request: ChatRequest) -> ChatResponse:
        url = f"{self.base_url}/chat/completions"
        body = {
            "model": request.model,
            "messages": [
                {"role": "system", "content": request.system},
                {"role": "user", "content": request.user},
            ],
            "temperature": request.temperature,
            "max_tokens": request.max_tokens,
        }
        if request.response_format == "json_object":
            body["response_format"] = {"type": "json_object"}
        headers = {"Content-Type": "application/json"}
        if self.api_key:
            headers["Authorization"] = f"Bearer {self.api_key}"

        started = time.monotonic()
        attempts = 0
        last_error = "no attempt made"
        while attempts <= self.max_retries:
            attempts += 1
            try:
                with self._semaphore:
                    resp = self._session.post(url, json=body, headers=headers, timeout=self.timeout)
            except (requests.Timeout, requests.ConnectionError) as exc:
                last_error = f"{type(exc).__name__}: {exc}"
            else:
                if resp.status_code in (401, 403):
                    raise AuthError(f"HTTP {resp.status_code} from {url}")
                if resp.status_code == 200:
                    content = self._extract_content(resp)
                    latency_ms = int((time.monotonic() - started) * 1000)
                    return ChatResponse(
                        content=content,
                        model=request.model,
                        attempts=attempts,
                        latency_ms=latency_ms,
                    )
                if resp.status_code == 429 or resp.status_code >= 500:
                    last_error = f"HTTP {resp.status_code}"
                else:
                    raise MalformedResponse(f"HTTP {resp.status_code} from {url}: {resp.text[:200]}")
            if attempts <= self.max_retries:
                delay = self.backoff_base * (2 ** (attempts - 1)) * random.uniform(1.0, 1.25)
                log.debug("transient failure (%s), retrying in %.2fs", last_error, delay)
                time.sleep(delay)
        raise TransientExhausted(f"{attempts} attempts failed, last: {last_error}")

    @staticmethod
    def _extract_content(resp: requests.Response) -> str:
        try:
            data = resp.json()
            content = data["choices"][0]["message"]["content"]
        except (ValueError, KeyError, IndexError, TypeError) as exc:
            raise MalformedResponse(f"no message content in response: {exc}") from exc
        if not isinstance(content, str):
            raise MalformedResponse("message content is not a string")
        return content


class ResponseCache:
    """Content-addressed cache keyed on the request digest.

    Distinct keys are safe under concurrent read/write; same-key writes
    race benignly (identical content, atomic rename, last writer wins).
    """

    def __init__(self, directory: str | Path):
        self.directory = Path(directory)
        try:
            self.directory.mkdir(parents=True, exist_ok=True)
        except OSError as exc:
            raise CacheIoError(f"cannot create cache dir {directory}: {exc}") from exc

    def _path(self, key: str) -> Path:
        return self.directory / f"{key}.json"

    def get(self, request: ChatRequest) -> str | None:
        path = self._path(request.cache_key())
        try:
            data = json.loads(path.read_text(encoding="utf-8"))
            content = data["content"]
        except FileNotFoundError:
            return None
        except (OSError, ValueError, KeyError, TypeError):
            log.warning("corrupt cache entry %s, treating as miss", path.name)
            return None
        return content if isinstance(content, str) else None

    def put(self, request: ChatRequest, content: str) -> None:
        path = self._path(request.cache_key())
        tmp = path.with_suffix(f".tmp.{os.getpid()}.{threading.get_ident()}")
        try:
            tmp.write_text(
                canonical_line({"content": content, "model": request.model}),
                encoding="utf-8",
            )
            os.replace(tmp, path)
        except OSError as exc:
            raise CacheIoError(f"cannot write cache entry {path}: {exc}") from exc


def cached_chat(gateway, request: ChatRequest, cache: ResponseCache) -> ChatResponse:
    """Serve from cache when possible, else delegate and store."""
    started = time.monotonic()
    hit = cache.get(request)
    if hit is not None:
        return ChatResponse(
            content=hit,
            model=request.model,
            attempts=1,
            from_cache=True,
            latency_ms=int((time.monotonic() - started) * 1000),
        )
    response = gateway.chat(request)
    cache.put(request, response.content)
    return response


class CachingGateway:
    """Gateway wrapper adding the response cache in front of any inner
    gateway."""

    def __init__(self, inner, cache: ResponseCache):
        self.inner = inner
        self.cache = cache

    @property
    def model(self) -> str:
        return self.inner.model

    def chat(self, request: ChatRequest) -> ChatResponse:
        return cached_chat(self.inner, request, self.cache)


_FENCE_RE = re.compile(r"```(?:[A-Za-z0-9_-]+)?\s*(.*?)```", re.DOTALL)


def extract_json(content: str) -> dict:
    """Recover a JSON object from model output.

    Strategies, first success wins: direct parse; strip Markdown code
    fences; substring from first '{' to last '}'.
    """
    candidates = [content]
    for match in _FENCE_RE.finditer(content):
        candidates.append(match.group(1))
    start = content.find("{")
    end = content.rfind("}")
    if start != -1 and end > start:
        candidates.append(content[start : end + 1])
    for candidate in candidates:
        try:
            obj = json.loads(candidate)
        except json.JSONDecodeError:
            continue
        if isinstance(obj, dict):
            return obj
    raise JsonExtractError(f"no JSON object found in: {content[:200]!r}")
