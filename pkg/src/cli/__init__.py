"""Módulo CLI de Config Count."""

from src.cli.main import app

__all__ = ["app"]
