"""Utilidades compartidas por los comandos CLI."""

from __future__ import annotations

from pathlib import Path
from typing import Any, Dict, List, NoReturn, Optional

import typer
from rich.console import Console
from rich.panel import Panel
from rich.table import Table

from src.config.settings import get_settings
from src.services.experiment_service import RunOutcome
from src.utils.errors import ScenarioError, exit_code_for
from src.utils.logging import get_logger

console = Console()
logger = get_logger(__name__)


def fail(command: str, error: Exception) -> NoReturn:
    """Mostrar el error, registrarlo y salir con el código que le corresponde."""
    console.print(f"[red]❌ Error en {command}: {error}[/red]")
    if isinstance(error, ScenarioError):
        for field, msg in error.diagnostics:
            console.print(f"   [yellow]{field}[/yellow]: {msg}")
    logger.error(f"Error en comando {command}: {error}")
    raise typer.Exit(exit_code_for(error))


def default_output(name: str, output: Optional[Path]) -> Path:
    return output if output is not None else get_settings().output_dir / name


def parse_int_list(text: str) -> List[int]:
    """'1,2,3' → [1, 2, 3]."""
    try:
        return [int(part) for part in text.split(",") if part.strip()]
    except ValueError as e:
        raise typer.BadParameter(f"lista de enteros inválida: {text}") from e


def parse_range(text: str) -> tuple[int, int]:
    """'a:b' → (a, b); un solo número da un rango de un valor."""
    parts = text.split(":")
    try:
        if len(parts) == 1:
            value = int(parts[0])
            return value, value
        if len(parts) == 2:
            return int(parts[0]), int(parts[1])
    except ValueError:
        pass
    raise typer.BadParameter(f"rango inválido '{text}', se esperaba 'a:b'")


def parse_window(text: str) -> Dict[str, Any]:
    """'n,lado' o 'n,lado,c1,…,cn' → WindowConfig como diccionario."""
    values = parse_int_list(text)
    if len(values) < 2:
        raise typer.BadParameter(f"ventana inválida '{text}', se esperaba 'n,lado'")
    window: Dict[str, Any] = {"n": values[0], "side": values[1]}
    if len(values) > 2:
        window["corner"] = values[2:]
    return window


def show_outcome(outcome: RunOutcome, title: str) -> None:
    """Resumen de una corrida: artefacto, manifiesto y valores clave."""
    lines = [f"[bold]{title}[/bold]", ""]
    for key, value in outcome.summary.items():
        if isinstance(value, float):
            value = f"{value:.6g}"
        lines.append(f"[blue]{key}:[/blue] {value}")
    lines.append("")
    lines.append(f"📄 [dim]Artefacto:[/dim] {outcome.artifact}")
    lines.append(f"🧾 [dim]Manifiesto:[/dim] {outcome.manifest}")
    lines.append(f"⏱️ [dim]Tiempo:[/dim] {outcome.wall_time_s:.2f} s")
    console.print(Panel("\n".join(lines), border_style="green"))


def frame_table(title: str, frame, limit: int = 20) -> Table:
    """Primeras filas de un DataFrame como tabla rich."""
    table = Table(title=title)
    for column in frame.columns:
        table.add_column(str(column), justify="right")
    for row in frame.head(limit).itertuples(index=False):
        table.add_row(*(f"{v:.6g}" if isinstance(v, float) else str(v) for v in row))
    return table
