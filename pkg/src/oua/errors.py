"""Exception types shared across the package."""

from __future__ import annotations


class OuaError(Exception):
    """Base class for package errors."""


class ConfigError(OuaError):
    """Invalid configuration. Message lists every offending key."""

    def __init__(self, problems):
        if isinstance(problems, str):
            problems = [problems]
        self.problems = list(problems)
        super().__init__("; ".join(self.problems))


class DataError(OuaError):
    """Weather-data ingestion or quality failure."""


class IntegrationError(OuaError):
    """Non-finite state or coefficient during numerical integration."""

    def __init__(self, message: str, step: int | None = None, component: str | None = None):
        self.step = step
        self.component = component
        parts = [message]
        if step is not None:
            parts.append(f"step={step}")
        if component is not None:
            parts.append(f"component={component}")
        super().__init__(" ".join(parts))
