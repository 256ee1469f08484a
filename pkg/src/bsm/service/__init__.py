"""HTTP service exposing the engine to multiple clients."""

from bsm.service.app import app, create_app

__all__ = ["app", "create_app"]
