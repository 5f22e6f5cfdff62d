"""LLM gateway: prompt templates, completion backends, payload extraction."""

from .backends import (
    API_KEY_ENV_VAR,
    Backend,
    GatewayError,
    GatewayTimeout,
    LiveBackend,
    RecordingBackend,
    ReplayBackend,
    ReplayMiss,
    TransportError,
    prompt_hash,
)
from .config import ROLES, RoleModelConfig, default_role_configs, with_endpoint
from .gateway import Gateway
from .extract import (
    ExtractionError,
    NoJsonFound,
    NoSelectFound,
    WrongShape,
    extract_json_array,
    extract_json_object,
    extract_sql,
)
from .prompts import ROLE_PLACEHOLDERS, MissingPlaceholder, PromptContext, render_prompt

__all__ = [
    "API_KEY_ENV_VAR",
    "Backend",
    "ExtractionError",
    "Gateway",
    "GatewayError",
    "GatewayTimeout",
    "LiveBackend",
    "MissingPlaceholder",
    "NoJsonFound",
    "NoSelectFound",
    "PromptContext",
    "ROLES",
    "ROLE_PLACEHOLDERS",
    "RecordingBackend",
    "ReplayBackend",
    "ReplayMiss",
    "RoleModelConfig",
    "TransportError",
    "WrongShape",
    "default_role_configs",
    "extract_json_array",
    "extract_json_object",
    "extract_sql",
    "prompt_hash",
    "render_prompt",
    "with_endpoint",
]
