from .app import create_app
from .ops import LmRegistry

__all__ = ["create_app", "LmRegistry"]
