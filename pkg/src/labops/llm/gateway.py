"""Binds a completion backend to the per-role model configs."""

from __future__ import annotations

from .backends import Backend
from .config import RoleModelConfig, default_role_configs


class Gateway:
    def __init__(self, backend: Backend, role_configs: dict[str, RoleModelConfig] | None = None):
        self.backend = backend
        self.role_configs = role_configs or default_role_configs()

    def complete_role(self, role: str, prompt: str) -> str:
        return self.backend.complete(self.role_configs[role], prompt)
