"""Unified client for the text rewriter and the multimodal plan generator.

Speaks the OpenAI-compatible chat-completions wire shape. Every exchange is
identified by a digest of (model, prompt text, image digest, temperature) so
record/replay cassettes stay valid exactly as long as the semantic request is
unchanged; edits to prompts invalidate stale recordings loudly.
"""

from __future__ import annotations

import base64
import datetime
import hashlib
import json
import threading
import time
from pathlib import Path

from .errors import CassetteMiss, ConfigError, GatewayTimeout, HttpError, PayloadTooLarge
from .prompting import PromptBundle

API_KEY_ENV = "ROBOMP_API_KEY"
MAX_PAYLOAD_BYTES = 20 * 1024 * 1024

MODES = ("live", "replay", "record")


def request_hash(model: str, text: str, image: bytes | None, temperature: float) -> str:
    """Stable digest of the semantic request (canonical JSON, sha256)."""
    image_digest = hashlib.sha256(image).hexdigest() if image else ""
    canonical = json.dumps(
        {"model": model, "text": text, "image_sha256": image_digest, "temperature": temperature},
        sort_keys=True,
        separators=(",", ":"),
        ensure_ascii=True,
    )
    return hashlib.sha256(canonical.encode("utf-8")).hexdigest()


def build_messages(text: str, image: bytes | None) -> list[dict]:
    content: list[dict] = [{"type": "text", "text": text}]
    if image is not None:
        b64 = base64.b64encode(image).decode("ascii")
        content.append({"type": "image_url", "image_url": {"url": f"data:image/png;base64,{b64}"}})
    return [{"role": "user", "content": content}]


class Gateway:
    """Generator gateway in one of three modes.

    replay: answers come from the cassette only; never touches the network.
    record: answers come from the endpoint and are appended to the cassette;
            repeated identical requests are served from the cassette.
    live:   plain HTTP client with bounded exponential-backoff retries.
    """

    def __init__(
        self,
        mode: str = "replay",
        endpoint: str = "",
        model: str = "gpt-4o",
        cassette: str | Path | None = None,
        temperature: float = 0.0,
        timeout: float = 60.0,
        max_retries: int = 3,
        backoff_base: float = 0.5,
        api_key: str | None = None,
    ):
        if mode not in MODES:
            raise ConfigError(f"gateway mode must be one of {MODES}, got {mode!r}")
        if mode in ("replay", "record") and cassette is None:
            raise ConfigError(f"gateway mode {mode!r} requires a cassette path")
        if mode in ("live", "record") and not endpoint:
            raise ConfigError(f"gateway mode {mode!r} requires an endpoint")
        self.mode = mode
        self.endpoint = endpoint.rstrip("/")
        self.model = model
        self.cassette = Path(cassette) if cassette is not None else None
        self.temperature = temperature
        self.timeout = timeout
        self.max_retries = max_retries
        self.backoff_base = backoff_base
        self.api_key = api_key
        self._lock = threading.Lock()
        self._exchanges: dict[str, str] = {}
        if self.cassette is not None and self.cassette.exists():
            self._exchanges = load_cassette(self.cassette)

    # -- public calls --

    def complete_text(self, prompt: str) -> str:
        return self._complete(prompt, image=None)

    def complete_multimodal(self, bundle: PromptBundle) -> str:
        return self._complete(bundle.text, image=bundle.image)

    # -- internals --

    def _complete(self, text: str, image: bytes | None) -> str:
        h = request_hash(self.model, text, image, self.temperature)
        if self.mode == "replay":
            with self._lock:
                if h not in self._exchanges:
                    raise CassetteMiss(h)
                return self._exchanges[h]
        if self.mode == "record":
            with self._lock:
                if h in self._exchanges:
                    return self._exchanges[h]
        response = self._http_call(text, image)
        if self.mode == "record":
            with self._lock:
                if h not in self._exchanges:
                    self._exchanges[h] = response
                    append_exchange(self.cassette, h, self._payload(text, image), response)
        return response

    def _payload(self, text: str, image: bytes | None) -> dict:
        return {
            "model": self.model,
            "temperature": self.temperature,
            "messages": build_messages(text, image),
        }

    def _http_call(self, text: str, image: bytes | None) -> str:
        import requests

        payload = self._payload(text, image)
        body = json.dumps(payload).encode("utf-8")
        if len(body) > MAX_PAYLOAD_BYTES:
            raise PayloadTooLarge(f"request body is {len(body)} bytes (limit {MAX_PAYLOAD_BYTES})")
        headers = {"Content-Type": "application/json"}
        key = self.api_key
        if key is None:
            import os

            key = os.environ.get(API_KEY_ENV, "")
        if key:
            headers["Authorization"] = f"Bearer {key}"

        url = f"{self.endpoint}/chat/completions"
        last_exc: Exception | None = None
        for attempt in range(self.max_retries + 1):
            try:
                resp = requests.post(url, data=body, headers=headers, timeout=self.timeout)
            except requests.Timeout as exc:
                last_exc = GatewayTimeout(f"request timed out after {self.timeout}s")
                last_exc.__cause__ = exc
            except requests.RequestException as exc:
                last_exc = HttpError(0, f"connection failed: {exc}")
            else:
                if resp.status_code == 200:
                    try:
                        data = resp.json()
                        return data["choices"][0]["message"]["content"]
                    except (KeyError, IndexError, ValueError) as exc:
                        raise HttpError(200, f"malformed response body: {exc}") from exc
                if resp.status_code in (429,) or resp.status_code >= 500:
                    last_exc = HttpError(resp.status_code, resp.text[:200])
                else:
                    raise HttpError(resp.status_code, resp.text[:200])
            if attempt < self.max_retries:
                time.sleep(self.backoff_base * (2**attempt))
        raise last_exc


def load_cassette(path: str | Path) -> dict[str, str]:
    """Load a cassette into a hash -> response map, rejecting collisions."""
    exchanges: dict[str, str] = {}
    path = Path(path)
    for line_no, line in enumerate(path.read_text(encoding="utf-8").splitlines(), start=1):
        if not line.strip():
            continue
        try:
            rec = json.loads(line)
            h, response = rec["request_hash"], rec["response_text"]
        except (json.JSONDecodeError, KeyError) as exc:
            raise ConfigError(f"{path}:{line_no}: bad cassette record: {exc}") from exc
        if h in exchanges and exchanges[h] != response:
            raise ConfigError(f"{path}:{line_no}: conflicting responses for request {h}")
        exchanges[h] = response
    return exchanges


def append_exchange(path: str | Path, h: str, request: dict, response_text: str) -> None:
    record = {
        "request_hash": h,
        "request": request,
        "response_text": response_text,
        "timestamp": datetime.datetime.now(datetime.timezone.utc).isoformat(),
    }
    with open(path, "a", encoding="utf-8") as fh:
        fh.write(json.dumps(record, ensure_ascii=True, sort_keys=True) + "\n")
