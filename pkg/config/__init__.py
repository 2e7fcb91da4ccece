"""Configuration package: environment settings and run-configuration files."""

from .settings import settings, Settings

__all__ = ["settings", "Settings"]

