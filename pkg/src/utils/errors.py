"""Jerarquía de excepciones de Config Count."""

from __future__ import annotations

from typing import List, Tuple


class ConfigCountError(Exception):
    """Error base de la aplicación."""


class InvalidParameterError(ConfigCountError, ValueError):
    """Parámetro fuera del dominio de una operación."""


class CapExceededError(ConfigCountError):
    """Se superó un límite de escala de escritorio (q, λ², ventana, q_ε)."""


class NoCopiesError(ConfigCountError):
    """No existen copias isométricas del símplice a la escala pedida."""


class NumericalInvariantError(ConfigCountError, ArithmeticError):
    """Un invariante numérico interno no se cumplió."""


class ScenarioError(ConfigCountError):
    """Archivo de escenario inválido."""

    def __init__(self, message: str, diagnostics: List[Tuple[str, str]] | None = None):
        super().__init__(message)
        self.diagnostics: List[Tuple[str, str]] = diagnostics or []

    def __str__(self) -> str:
        if not self.diagnostics:
            return super().__str__()
        lines = [super().__str__()]
        lines.extend(f"  {field}: {msg}" for field, msg in self.diagnostics)
        return "\n".join(lines)


# Códigos de salida de la CLI
EXIT_OK = 0
EXIT_FAILURE = 1
EXIT_CONFIG = 2


def exit_code_for(error: Exception) -> int:
    """Código de salida de la CLI para una excepción."""
    if isinstance(error, (InvalidParameterError, CapExceededError, ScenarioError)):
        return EXIT_CONFIG
    return EXIT_FAILURE
