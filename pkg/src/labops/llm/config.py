"""Per-role model configuration for the chat-completion backend."""

from __future__ import annotations

from dataclasses import dataclass, replace

ROLES = ("question_creation", "query_builder", "code_check", "reflect", "report", "chart")

# Default model assignment per role; plain configuration strings.
_DEFAULT_MODELS = {
    "question_creation": "llama-3.1-70b-instruct",
    "chart": "llama-3.1-70b-instruct",
    "query_builder": "deepseek-r1",
    "code_check": "deepseek-r1",
    "reflect": "deepseek-r1",
    "report": "llama-3.1-405b-instruct",
}


@dataclass(frozen=True)
class RoleModelConfig:
    role: str
    model_name: str
    temperature: float = 0.7
    max_tokens: int = 4000
    endpoint: str = "http://localhost:8000/v1"
    timeout_seconds: float = 60.0

    def __post_init__(self) -> None:
        if self.role not in ROLES:
            raise ValueError(f"unknown role {self.role!r}")


def default_role_configs(endpoint: str = "http://localhost:8000/v1") -> dict[str, RoleModelConfig]:
    return {
        role: RoleModelConfig(role=role, model_name=_DEFAULT_MODELS[role], endpoint=endpoint)
        for role in ROLES
    }


def with_endpoint(configs: dict[str, RoleModelConfig], endpoint: str) -> dict[str, RoleModelConfig]:
    return {role: replace(cfg, endpoint=endpoint) for role, cfg in configs.items()}
