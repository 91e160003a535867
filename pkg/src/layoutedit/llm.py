"""Chat-completion transport plus a deterministic stub for tests.

The HTTP client speaks the common chat JSON protocol (messages array in,
first choice's message content out) against any compatible base URL.
Network failures, timeouts, and 5xx/429 responses are retried with
exponential backoff (1 s, 2 s, 4 s, ...); other 4xx fail immediately.
The API key is sent only as a header and never logged or echoed.
"""

from __future__ import annotations

import logging
import threading
import time
from dataclasses import dataclass
from typing import Callable, Protocol

import httpx

from .errors import ConfigError, LlmProtocolError, LlmRejected, LlmUnavailable
from .prompting import PromptBundle

log = logging.getLogger(__name__)

API_KEY_ENV = "PNI_LLM_API_KEY"


@dataclass(frozen=True)
class LlmConfig:
    base_url: str
    model_name: str
    api_key: str = ""
    timeout: float = 60.0
    max_retries: int = 3
    temperature: float = 0.0

    def __post_init__(self) -> None:
        if self.timeout <= 0:
            raise ConfigError("llm timeout must be positive")
        if self.max_retries < 0:
            raise ConfigError("llm max_retries must be non-negative")
        if not 0.0 <= self.temperature <= 2.0:
            raise ConfigError("llm temperature must be in [0, 2]")


class LlmClient(Protocol):
    def complete(self, prompt: PromptBundle) -> str: ...


class HttpLlmClient:
    """Blocking client for a chat-completion endpoint."""

    def __init__(
        self,
        config: LlmConfig,
        *,
        sleep: Callable[[float], None] = time.sleep,
        transport: httpx.BaseTransport | None = None,
    ) -> None:
        self.config = config
        self._sleep = sleep
        headers = {}
        if config.api_key:
            headers["Authorization"] = f"Bearer {config.api_key}"
        self._http = httpx.Client(
            base_url=config.base_url.rstrip("/"),
            headers=headers,
            timeout=config.timeout,
            transport=transport,
        )

    def complete(self, prompt: PromptBundle) -> str:
        payload = {
            "model": self.config.model_name,
            "temperature": self.config.temperature,
            "messages": prompt.to_messages(),
        }
        attempts = self.config.max_retries + 1
        last_error = "no attempt made"
        for attempt in range(attempts):
            if attempt > 0:
                delay = float(2 ** (attempt - 1))
                log.debug("llm retry %d/%d after %.0fs", attempt, self.config.max_retries, delay)
                self._sleep(delay)
            try:
                response = self._http.post("/chat/completions", json=payload)
            except httpx.HTTPError as exc:
                last_error = f"transport failure: {type(exc).__name__}"
                log.warning("llm request failed (%s), attempt %d/%d", last_error, attempt + 1, attempts)
                continue
            if response.status_code >= 500 or response.status_code == 429:
                last_error = f"HTTP {response.status_code}"
                log.warning("llm answered %s, attempt %d/%d", last_error, attempt + 1, attempts)
                continue
            if response.status_code >= 400:
                raise LlmRejected(
                    f"llm request rejected: HTTP {response.status_code}: {response.text[:200]}"
                )
            return _extract_content(response)
        raise LlmUnavailable(f"llm unavailable after {attempts} attempts ({last_error})")

    def close(self) -> None:
        self._http.close()


def _extract_content(response: httpx.Response) -> str:
    try:
        body = response.json()
        content = body["choices"][0]["message"]["content"]
    except (ValueError, LookupError, TypeError) as exc:
        raise LlmProtocolError(f"llm protocol error: unexpected response body ({exc})") from exc
    if not isinstance(content, str):
        raise LlmProtocolError("llm protocol error: message content is not text")
    return content


@dataclass
class StubScript:
    """Canned completions, consumed in order."""

    completions: tuple[str, ...]
    exhausted: str = "repeat-last"  # or "error"

    def __post_init__(self) -> None:
        if not self.completions:
            raise ConfigError("stub script must contain at least one completion")
        if self.exhausted not in ("repeat-last", "error"):
            raise ConfigError("stub exhaustion policy must be 'repeat-last' or 'error'")


class StubLlmClient:
    """Deterministic LlmClient fed by a StubScript; thread-safe."""

    def __init__(self, script: StubScript) -> None:
        self.script = script
        self.calls: list[PromptBundle] = []
        self._cursor = 0
        self._lock = threading.Lock()

    def complete(self, prompt: PromptBundle) -> str:
        with self._lock:
            self.calls.append(prompt)
            if self._cursor >= len(self.script.completions):
                if self.script.exhausted == "error":
                    raise LlmUnavailable("llm unavailable: stub script exhausted")
                return self.script.completions[-1]
            completion = self.script.completions[self._cursor]
            self._cursor += 1
            return completion

    @property
    def consumed(self) -> int:
        return len(self.calls)
