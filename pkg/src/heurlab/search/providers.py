"""Reply sources for the evolutionary loop: a scripted mock and an HTTP client."""

from __future__ import annotations

import os
from dataclasses import dataclass
from typing import Callable, Protocol, Sequence

from ..common import ProviderError


class Provider(Protocol):
    def complete(self, prompt: str) -> str: ...


class MockProvider:
    """Replays a scripted response sequence, fully offline.

    Once the script is exhausted every call returns the empty string, which
    downstream counts as a malformed reply. Prompts are recorded so tests
    can assert on what was sent.
    """

    def __init__(self, responses: Sequence[str]):
        self._responses = list(responses)
        self._cursor = 0
        self.prompts: list[str] = []

    def complete(self, prompt: str) -> str:
        self.prompts.append(prompt)
        if self._cursor >= len(self._responses):
            return ""
        reply = self._responses[self._cursor]
        self._cursor += 1
        return reply


@dataclass(frozen=True)
class ProviderConfig:
    """Where and how to reach a chat-completion endpoint.

    The API key is read from the environment variable named by
    `api_key_env`, never stored in the config itself.
    """

    endpoint: str
    model: str
    temperature: float = 1.0
    timeout: float = 30.0
    max_retries: int = 2
    api_key_env: str = "HEURLAB_API_KEY"


Transport = Callable[[str, dict, dict, float], dict]


def _requests_transport(url: str, headers: dict, payload: dict, timeout: float) -> dict:
    import requests  # deferred so offline use never imports it

    response = requests.post(url, headers=headers, json=payload, timeout=timeout)
    response.raise_for_status()
    return response.json()


class HttpProvider:
    """Minimal chat-style client; the transport is injectable for tests."""

    def __init__(self, config: ProviderConfig, transport: Transport | None = None):
        self.config = config
        self._transport = transport if transport is not None else _requests_transport

    def complete(self, prompt: str) -> str:
        cfg = self.config
        headers = {"Content-Type": "application/json"}
        key = os.environ.get(cfg.api_key_env, "")
        if key:
            headers["Authorization"] = f"Bearer {key}"
        payload = {
            "model": cfg.model,
            "temperature": cfg.temperature,
            "messages": [{"role": "user", "content": prompt}],
        }
        failure: Exception | None = None
        for _ in range(cfg.max_retries + 1):
            try:
                body = self._transport(cfg.endpoint, headers, payload, cfg.timeout)
                return body["choices"][0]["message"]["content"]
            except Exception as exc:  # transport and payload-shape failures alike
                failure = exc
        raise ProviderError(
            f"provider unreachable after {cfg.max_retries + 1} attempts: {failure}"
        )
