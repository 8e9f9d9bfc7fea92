"""Single choke point for model calls: rendering, structured-output
validation with bounded repair retries, a content-addressed response cache,
and providers (live HTTP chat-completions, deterministic mock)."""

from __future__ import annotations

import hashlib
import json
import logging
import os
import tempfile
import threading
from dataclasses import dataclass, field
from pathlib import Path

import jsonschema

from .errors import (
    MissingVariable,
    MockMiss,
    ProviderHttp,
    ProviderTimeout,
    SchemaViolation,
    UnknownVariable,
)
from .templates import PLACEHOLDER_RE, TEMPLATES

log = logging.getLogger(__name__)

RETRY_BUDGET = 2

_REPAIR_INSTRUCTION = (
    "\n\nYour previous reply could not be used: {error}\n"
    "Reply again with only a single valid JSON object matching the requested shape."
)


def render_prompt(template_id: str, variables: dict[str, str]) -> str:
    """Deterministic placeholder substitution; extra variables are rejected."""
    template = TEMPLATES[template_id]
    needed = template.placeholders
    for name in needed:
        if name not in variables:
            raise MissingVariable(name)
    for name in variables:
        if name not in needed:
            raise UnknownVariable(name)

    def sub(match):
        return str(variables[match.group(1)])

    return PLACEHOLDER_RE.sub(sub, template.body)


@dataclass(frozen=True)
class ModelCall:
    template_id: str
    rendered_prompt: str
    model_id: str
    params: dict
    variables: dict = field(default_factory=dict, compare=False)

    @property
    def cache_key(self) -> str:
        payload = json.dumps(
            {
                "prompt": self.rendered_prompt,
                "model": self.model_id,
                "params": self.params,
            },
            sort_keys=True,
        )
        return hashlib.sha256(payload.encode("utf-8")).hexdigest()


@dataclass(frozen=True)
class StructuredResult:
    value: object
    retry_count: int
    from_cache: bool


class MockProvider:
    """Deterministic provider driven by a scenario file.

    A scenario maps (template_id, substring matchers over the call's
    variables) to a sequence of canned response texts. Sequences are consumed
    in call order; an exhausted entry stops matching unless it sets
    ``repeat``. Calls nothing matches raise :class:`MockMiss`.
    """

    def __init__(self, scenario: dict):
        self.name = scenario.get("name", "")
        self._entries = []
        for entry in scenario.get("entries", ()):
            responses = [
                r if isinstance(r, str) else json.dumps(r)
                for r in entry.get("responses", ())
            ]
            self._entries.append(
                {
                    "template_id": entry["template_id"],
                    "match": entry.get("match", {}),
                    "responses": responses,
                    "repeat": bool(entry.get("repeat", False)),
                    "cursor": 0,
                }
            )

    @classmethod
    def from_file(cls, path) -> "MockProvider":
        with open(path, encoding="utf-8") as fh:
            return cls(json.load(fh))

    @staticmethod
    def _matches(entry, call: ModelCall) -> bool:
        if entry["template_id"] != call.template_id:
            return False
        for name, needle in entry["match"].items():
            value = str(call.variables.get(name, ""))
            if needle not in value:
                return False
        return True

    def complete(self, call: ModelCall) -> str:
        for entry in self._entries:
            if not self._matches(entry, call):
                continue
            if entry["cursor"] >= len(entry["responses"]):
                if entry["repeat"] and entry["responses"]:
                    return entry["responses"][-1]
                continue
            text = entry["responses"][entry["cursor"]]
            entry["cursor"] += 1
            return text
        raise MockMiss(call.template_id, call.variables)


class LiveProvider:
    """Chat-completions style HTTP provider."""

    def __init__(self, base_url, api_key="", timeout=60.0):
        self.base_url = base_url.rstrip("/")
        self.api_key = api_key
        self.timeout = timeout

    def complete(self, call: ModelCall) -> str:
        import httpx

        headers = {"Content-Type": "application/json"}
        if self.api_key:
            headers["Authorization"] = f"Bearer {self.api_key}"
        body = {
            "model": call.model_id,
            "messages": [{"role": "user", "content": call.rendered_prompt}],
            "temperature": call.params.get("temperature", 0.0),
            "max_tokens": call.params.get("max_output_tokens", 2048),
        }
        try:
            resp = httpx.post(
                f"{self.base_url}/chat/completions",
                json=body,
                headers=headers,
                timeout=self.timeout,
            )
        except httpx.TimeoutException as exc:
            raise ProviderTimeout(str(exc)) from exc
        if resp.status_code != 200:
            raise ProviderHttp(resp.status_code, resp.text[:500])
        return resp.json()["choices"][0]["message"]["content"]


def provider_from_env():
    base_url = os.environ.get("SLR_LLM_BASE_URL", "")
    if not base_url:
        raise ProviderHttp(0, "SLR_LLM_BASE_URL not configured")
    return LiveProvider(base_url, api_key=os.environ.get("SLR_LLM_API_KEY", ""))


class Gateway:
    """Renders prompts, calls the provider, validates structured output and
    caches responses content-addressed on (prompt, model, params)."""

    def __init__(self, provider, cache_dir=None, model_id="default",
                 retries=RETRY_BUDGET, max_output_tokens=2048):
        self.provider = provider
        self.cache_dir = Path(cache_dir) if cache_dir else None
        self.model_id = model_id
        self.retries = retries
        self.max_output_tokens = max_output_tokens
        self._lock = threading.Lock()

    def build_call(self, template_id: str, variables: dict,
                   temperature: float | None = None) -> ModelCall:
        template = TEMPLATES[template_id]
        rendered = render_prompt(template_id, variables)
        params = {
            "temperature": template.temperature if temperature is None else temperature,
            "max_output_tokens": self.max_output_tokens,
        }
        if not 0.0 <= params["temperature"] <= 2.0:
            raise ValueError(f"temperature out of range: {params['temperature']}")
        return ModelCall(template_id, rendered, self.model_id, params, dict(variables))

    # -- cache ------------------------------------------------------------

    def _cache_path(self, key: str) -> Path | None:
        if self.cache_dir is None:
            return None
        return self.cache_dir / key[:2] / f"{key}.json"

    def _cache_read(self, key: str):
        path = self._cache_path(key)
        if path is None or not path.exists():
            return None
        try:
            with open(path, encoding="utf-8") as fh:
                return json.load(fh)
        except (OSError, json.JSONDecodeError):
            return None

    def _cache_write(self, key: str, payload: dict):
        path = self._cache_path(key)
        if path is None:
            return
        path.parent.mkdir(parents=True, exist_ok=True)
        fd, tmp = tempfile.mkstemp(dir=path.parent, suffix=".tmp")
        try:
            with os.fdopen(fd, "w", encoding="utf-8") as fh:
                json.dump(payload, fh)
            os.replace(tmp, path)
        except BaseException:
            if os.path.exists(tmp):
                os.unlink(tmp)
            raise

    # -- structured completion -------------------------------------------

    def complete_structured(self, call: ModelCall,
                            schema: dict | None = None) -> StructuredResult:
        """Return the provider's reply parsed as JSON and schema-validated.

        Validation failures trigger up to ``retries`` re-asks with a repair
        instruction appended; a cache hit bypasses the provider entirely.
        """
        if schema is None:
            schema = TEMPLATES[call.template_id].output_schema

        cached = self._cache_read(call.cache_key)
        if cached is not None:
            value = cached["value"]
            try:
                jsonschema.validate(value, schema)
            except jsonschema.ValidationError:
                pass  # schema changed since the entry was written; refetch
            else:
                return StructuredResult(value, cached.get("retry_count", 0), True)

        error = None
        raw = None
        for attempt in range(self.retries + 1):
            prompt = call.rendered_prompt
            if error is not None:
                prompt += _REPAIR_INSTRUCTION.format(error=error)
            attempt_call = ModelCall(
                call.template_id, prompt, call.model_id, call.params, call.variables
            )
            raw = self.provider.complete(attempt_call)
            try:
                value = json.loads(_strip_fences(raw))
            except json.JSONDecodeError as exc:
                error = f"not valid JSON ({exc.msg})"
                continue
            try:
                jsonschema.validate(value, schema)
            except jsonschema.ValidationError as exc:
                error = f"JSON did not match the required shape ({exc.message})"
                continue
            with self._lock:
                self._cache_write(
                    call.cache_key, {"value": value, "retry_count": attempt}
                )
            return StructuredResult(value, attempt, False)
        raise SchemaViolation(
            f"model output failed validation after {self.retries} retries: {error}",
            raw_text=raw,
        )

    def call(self, template_id: str, variables: dict,
             schema: dict | None = None) -> StructuredResult:
        return self.complete_structured(self.build_call(template_id, variables), schema)


def _strip_fences(text: str) -> str:
    """Tolerate replies wrapped in Markdown code fences."""
    stripped = text.strip()
    if stripped.startswith("```"):
        stripped = stripped.split("\n", 1)[-1]
        if stripped.endswith("```"):
            stripped = stripped[:-3]
    return stripped
