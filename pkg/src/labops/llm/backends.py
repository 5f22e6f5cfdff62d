"""Chat-completion backends: live HTTP, deterministic replay, and recording.

The live backend speaks the OpenAI-compatible chat-completions JSON
protocol and retries once with exponential backoff on transient
failures. The replay backend answers from a JSONL file keyed by the
SHA-256 of the rendered prompt, which makes whole-pipeline runs pure
functions of (dataset, replay file, config).
"""

from __future__ import annotations

import hashlib
import json
import os
import time
from pathlib import Path
from typing import Optional, Protocol, Union

import requests

from .config import RoleModelConfig

API_KEY_ENV_VAR = "LABOPS_API_KEY"


class GatewayError(Exception):
    pass


class TransportError(GatewayError):
    def __init__(self, message: str, retry_after: Optional[str] = None):
        super().__init__(message)
        self.retry_after = retry_after


class GatewayTimeout(GatewayError):
    pass


class ReplayMiss(GatewayError):
    def __init__(self, prompt_hash: str):
        super().__init__(f"no recorded response for prompt hash {prompt_hash}")
        self.prompt_hash = prompt_hash


def prompt_hash(prompt: str) -> str:
    return hashlib.sha256(prompt.encode("utf-8")).hexdigest()


class Backend(Protocol):
    def complete(self, config: RoleModelConfig, prompt: str) -> str: ...


class LiveBackend:
    """HTTP client for an OpenAI-compatible /chat/completions endpoint.

    The API key comes from the LABOPS_API_KEY environment variable and is
    never echoed into error messages.
    """

    def __init__(self, api_key: Optional[str] = None, backoff_seconds: float = 0.5):
        self._api_key = api_key if api_key is not None else os.environ.get(API_KEY_ENV_VAR)
        self._backoff_seconds = backoff_seconds
        self._session = requests.Session()

    def complete(self, config: RoleModelConfig, prompt: str) -> str:
        url = config.endpoint.rstrip("/")
        if not url.endswith("/chat/completions"):
            url = url + "/chat/completions"
        payload = {
            "model": config.model_name,
            "messages": [{"role": "user", "content": prompt}],
            "temperature": config.temperature,
            "max_tokens": config.max_tokens,
        }
        headers = {"Content-Type": "application/json"}
        if self._api_key:
            headers["Authorization"] = f"Bearer {self._api_key}"

        last_error: Optional[GatewayError] = None
        for attempt in range(2):  # one transport retry
            if attempt:
                time.sleep(self._backoff_seconds * (2 ** (attempt - 1)))
            try:
                response = self._session.post(
                    url, json=payload, headers=headers, timeout=config.timeout_seconds
                )
            except requests.Timeout:
                last_error = GatewayTimeout(f"no response within {config.timeout_seconds}s")
                continue
            except requests.RequestException as exc:
                last_error = TransportError(f"transport failure: {type(exc).__name__}")
                continue
            if response.status_code == 200:
                return self._parse_body(response)
            retry_after = response.headers.get("Retry-After")
            message = f"HTTP {response.status_code} from completion endpoint"
            if retry_after:
                message += f" (retry-after: {retry_after})"
            last_error = TransportError(message, retry_after=retry_after)
            if response.status_code not in (429, 500, 502, 503, 504):
                break  # non-transient; do not retry
        assert last_error is not None
        raise last_error

    @staticmethod
    def _parse_body(response: requests.Response) -> str:
        try:
            body = response.json()
            content = body["choices"][0]["message"]["content"]
        except (ValueError, KeyError, IndexError, TypeError):
            raise TransportError("malformed completion response body") from None
        if not isinstance(content, str):
            raise TransportError("completion content is not text")
        return content


class ReplayBackend:
    """Answers from recorded {role, prompt_sha256, response} JSONL lines."""

    def __init__(self, path: Union[str, Path]):
        self.path = Path(path)
        self._responses: dict[str, str] = {}
        with self.path.open("r", encoding="utf-8") as fh:
            for line in fh:
                if not line.strip():
                    continue
                entry = json.loads(line)
                self._responses[entry["prompt_sha256"]] = entry["response"]

    def complete(self, config: RoleModelConfig, prompt: str) -> str:
        key = prompt_hash(prompt)
        if key not in self._responses:
            raise ReplayMiss(key)
        return self._responses[key]


class RecordingBackend:
    """Wraps another backend and appends each exchange to a replay file."""

    def __init__(self, inner: Backend, path: Union[str, Path]):
        self._inner = inner
        self.path = Path(path)
        self.path.parent.mkdir(parents=True, exist_ok=True)
        self._seen: set[str] = set()

    def complete(self, config: RoleModelConfig, prompt: str) -> str:
        response = self._inner.complete(config, prompt)
        key = prompt_hash(prompt)
        if key not in self._seen:
            self._seen.add(key)
            with self.path.open("a", encoding="utf-8") as fh:
                entry = {"role": config.role, "prompt_sha256": key, "response": response}
                fh.write(json.dumps(entry, ensure_ascii=False) + "\n")
        return response
