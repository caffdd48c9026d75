"""Process composition: config, auth, runtime wiring, HTTP front door."""

from .auth import TokenStore
from .config import RuntimeConfig
from .runtime import Runtime

__all__ = ["Runtime", "RuntimeConfig", "TokenStore"]
