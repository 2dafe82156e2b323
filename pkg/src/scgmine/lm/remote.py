"""Adapter for a remote completion-style API.

Wire format::

    POST {"prompt": str, "max_tokens": int, "logprobs": int, "n": int}
    ->   {"choices": [{"text": str, "logprobs": {"tokens": [...],
                       "token_logprobs": [...], "top_logprobs": [{tok: lp}, ...]}}]}

The credential is read from an environment variable, never from config files.
"""

from __future__ import annotations

import json
import math
import os
import threading
import time
import urllib.error
import urllib.request
from dataclasses import dataclass

from scgmine.errors import AuthenticationError, MalformedResponseError, NetworkError
from scgmine.lm.tokens import NEWLINE, STOP, detokenize

DEFAULT_CREDENTIAL_ENV = "SCGMINE_API_KEY"


@dataclass(frozen=True)
class RemoteConfig:
    endpoint: str
    model: str | None = None
    credential_env: str = DEFAULT_CREDENTIAL_ENV
    timeout: float = 30.0
    max_in_flight: int = 4
    stop_text: str = "END"

    def credential(self) -> str:
        key = os.environ.get(self.credential_env)
        if not key:
            raise AuthenticationError(f"environment variable {self.credential_env} is not set")
        return key


def _post(config: RemoteConfig, payload: dict) -> dict:
    key = config.credential()
    body = json.dumps(payload).encode("utf-8")
    req = urllib.request.Request(
        config.endpoint,
        data=body,
        headers={"Content-Type": "application/json", "Authorization": f"Bearer {key}"},
        method="POST",
    )
    started = time.monotonic()
    try:
        with urllib.request.urlopen(req, timeout=config.timeout) as resp:
            raw = resp.read()
    except urllib.error.HTTPError as err:
        if err.code in (401, 403):
            raise AuthenticationError(f"remote rejected credential (HTTP {err.code})") from err
        raise NetworkError(f"HTTP {err.code} from {config.endpoint}", time.monotonic() - started) from err
    except (urllib.error.URLError, TimeoutError, OSError) as err:
        elapsed = time.monotonic() - started
        raise NetworkError(f"request to {config.endpoint} failed after {elapsed:.2f}s: {err}", elapsed) from err
    try:
        return json.loads(raw)
    except ValueError as err:
        raise MalformedResponseError("response is not JSON") from err


def _choices(doc):
    choices = doc.get("choices") if isinstance(doc, dict) else None
    if not isinstance(choices, list):
        raise MalformedResponseError("response lacks a 'choices' list")
    return choices


def remote_complete(config: RemoteConfig, prompt: str, params: dict | None = None) -> list[tuple[str, list[float]]]:
    """Return ``(completion text, per-token log-probabilities)`` per choice."""
    params = params or {}
    payload = {
        "prompt": prompt,
        "max_tokens": int(params.get("max_tokens", 64)),
        "logprobs": int(params.get("logprobs", 1)),
        "n": int(params.get("n", 1)),
    }
    if config.model:
        payload["model"] = config.model
    out = []
    for choice in _choices(_post(config, payload)):
        try:
            text = choice["text"]
            logprobs = [float(x) for x in (choice.get("logprobs") or {}).get("token_logprobs") or []]
        except (KeyError, TypeError, ValueError) as err:
            raise MalformedResponseError(f"malformed choice: {choice!r}") from err
        if not isinstance(text, str):
            raise MalformedResponseError("choice text is not a string")
        out.append((text, logprobs))
    return out


class RemoteBackend:
    """Next-token distributions from the remote API's top log-probabilities.

    The returned alternatives are renormalized over what the service reports,
    so probabilities are conditional on the service's top-k list.
    """

    def __init__(self, config: RemoteConfig, top_k: int = 5):
        self.config = config
        self.top_k = top_k
        self._gate = threading.Semaphore(config.max_in_flight)

    def _map_token(self, text: str) -> str:
        if text.strip() == self.config.stop_text:
            return STOP
        if "\n" in text and not text.strip():
            return NEWLINE
        return text.strip() or NEWLINE

    def next_distribution(self, context) -> list[tuple[str, float]]:
        prompt = detokenize(context)
        if context and context[-1] != NEWLINE:
            prompt += " "
        payload = {"prompt": prompt, "max_tokens": 1, "logprobs": self.top_k, "n": 1}
        if self.config.model:
            payload["model"] = self.config.model
        with self._gate:
            doc = _post(self.config, payload)
        choices = _choices(doc)
        try:
            top = choices[0]["logprobs"]["top_logprobs"][0]
        except (IndexError, KeyError, TypeError) as err:
            raise MalformedResponseError("response lacks top_logprobs") from err
        merged: dict[str, float] = {}
        for text, lp in top.items():
            tok = self._map_token(text)
            merged[tok] = merged.get(tok, 0.0) + math.exp(float(lp))
        z = sum(merged.values())
        if z <= 0:
            raise MalformedResponseError("empty top_logprobs")
        return sorted(((t, p / z) for t, p in merged.items()), key=lambda tp: (-tp[1], tp[0]))
