"""HTTP service exposing the library over JSON endpoints."""

from .app import CONFIG_ENV, Runtime, ServiceConfig, create_app

__all__ = ["CONFIG_ENV", "Runtime", "ServiceConfig", "create_app"]
