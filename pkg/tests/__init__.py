"""Tests de Config Count."""
