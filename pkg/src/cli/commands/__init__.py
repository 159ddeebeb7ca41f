"""Comandos CLI de Config Count."""

from .ff import ff_app
from .harness import harness_app
from .lattice import lattice_app

__all__ = [
    "ff_app",
    "harness_app",
    "lattice_app",
]
