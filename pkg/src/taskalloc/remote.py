"""Remote language-model backend speaking a minimal chat-completion shape.

Request: JSON {"model", "temperature", "messages": [{"role", "content"}]}.
Response: JSON {"text", "input_tokens", "output_tokens"}. Any endpoint
honoring that exchange works. Credentials are read from the environment
variable named in the config, never from flags or files.
"""

from __future__ import annotations

import json
import os
import urllib.error
import urllib.request
from dataclasses import dataclass

from .errors import EmptyResponseError, ReasonerConfigError, TransportError
from .prompts import PromptBundle
from .workflow import ReasonerReply, ReasoningContext

DEFAULT_TEMPERATURE = 0.1


@dataclass(frozen=True)
class RemoteModelConfig:
    endpoint: str
    model: str
    temperature: float = DEFAULT_TEMPERATURE
    credential_env: str | None = None
    timeout_seconds: float = 60.0

    def credential(self) -> str | None:
        if self.credential_env is None:
            return None
        value = os.environ.get(self.credential_env)
        if not value:
            raise ReasonerConfigError(
                f"credential environment variable {self.credential_env!r} is not set"
            )
        return value


def llm_reason(prompt: PromptBundle, config: RemoteModelConfig) -> ReasonerReply:
    """One blocking completion call; returns text plus token counts.

    Transport failures and empty completions raise retryable errors;
    authentication rejections raise ReasonerConfigError.
    """
    payload = {
        "model": config.model,
        "temperature": config.temperature,
        "messages": [
            {"role": "system", "content": prompt.system_text},
            {"role": "user", "content": prompt.user_text},
        ],
    }
    headers = {"Content-Type": "application/json"}
    credential = config.credential()
    if credential:
        headers["Authorization"] = f"Bearer {credential}"
    request = urllib.request.Request(
        config.endpoint,
        data=json.dumps(payload).encode("utf-8"),
        headers=headers,
        method="POST",
    )
    try:
        with urllib.request.urlopen(request, timeout=config.timeout_seconds) as response:
            body = response.read().decode("utf-8")
    except urllib.error.HTTPError as exc:
        if exc.code in (401, 403):
            raise ReasonerConfigError(f"endpoint rejected credentials (HTTP {exc.code})") from exc
        raise TransportError(f"endpoint returned HTTP {exc.code}") from exc
    except (urllib.error.URLError, TimeoutError, OSError) as exc:
        raise TransportError(f"cannot reach {config.endpoint}: {exc}") from exc

    try:
        parsed = json.loads(body)
        text = parsed["text"]
        input_tokens = int(parsed.get("input_tokens", 0))
        output_tokens = int(parsed.get("output_tokens", 0))
    except (json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
        raise TransportError(f"malformed completion payload: {exc}") from exc
    if not isinstance(text, str) or not text.strip():
        raise EmptyResponseError("endpoint returned an empty completion")
    return ReasonerReply(text=text, input_tokens=input_tokens, output_tokens=output_tokens)


class RemoteReasoner:
    """Backend adapter for the workflow; one in-flight request at a time."""

    name = "remote"

    def __init__(self, config: RemoteModelConfig):
        self.config = config

    def generate(self, context: ReasoningContext) -> ReasonerReply:
        return llm_reason(context.prompt, self.config)
