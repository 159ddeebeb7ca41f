"""Comandos CLI del arnés: escenarios, suite de aceptación y registro de corridas."""

from __future__ import annotations

from pathlib import Path
from typing import List, Optional

import typer
from rich.console import Console
from rich.table import Table

from src.cli.commands.common import fail
from src.services.acceptance_service import AcceptanceService
from src.services.experiment_service import ExperimentService
from src.services.run_registry_service import RunRegistryService
from src.services.scenario import load_scenario
from src.utils.errors import EXIT_FAILURE, ConfigCountError
from src.utils.logging import get_logger

harness_app = typer.Typer(
    name="harness",
    help="🧪 Escenarios, aceptación y registro de corridas",
    no_args_is_help=True,
)

console = Console()
logger = get_logger(__name__)


@harness_app.command("run")
def run(
    files: List[Path] = typer.Argument(..., help="Archivos de escenario JSON"),
    threads: Optional[int] = typer.Option(None, "--threads", help="Escenarios en paralelo"),
) -> None:
    """▶️ Ejecutar uno o más archivos de escenario."""
    try:
        scenarios = [load_scenario(path) for path in files]
        with console.status(f"[bold green]Ejecutando {len(scenarios)} escenario(s)..."):
            outcomes = ExperimentService(threads=threads).run_many(scenarios)

        table = Table(title="▶️ Corridas")
        table.add_column("Escenario", style="white")
        table.add_column("Tipo", style="cyan")
        table.add_column("Artefacto", style="dim")
        table.add_column("Tiempo (s)", justify="right", style="yellow")
        for path, outcome in zip(files, outcomes):
            table.add_row(str(path), outcome.kind, str(outcome.artifact), f"{outcome.wall_time_s:.2f}")
        console.print(table)

    except ConfigCountError as e:
        fail("run", e)


@harness_app.command("acceptance")
def acceptance(
    selector: str = typer.Argument("all", help="ff, lattice o all"),
    seed: int = typer.Option(20240601, "--seed", help="Semilla de la suite"),
) -> None:
    """✅ Ejecutar la suite de aceptación; sale con 0 solo si todo pasa."""
    service = AcceptanceService(seed=seed)
    try:
        service.criteria_for(selector)
    except ValueError as e:
        console.print(f"[red]❌ {e}[/red]")
        raise typer.Exit(2)

    with console.status(f"[bold green]Ejecutando criterios '{selector}'..."):
        report = service.run(selector)

    table = Table(title=f"✅ Suite de aceptación ({selector})")
    table.add_column("#", justify="center", style="dim")
    table.add_column("Criterio", style="white")
    table.add_column("Medido", style="cyan")
    table.add_column("Umbral", style="blue")
    table.add_column("Resultado", justify="center")
    table.add_column("Tiempo (s)", justify="right", style="yellow")
    for result in report.results:
        verdict = "[green]PASA[/green]" if result.passed else "[red]FALLA[/red]"
        table.add_row(
            str(result.number), result.name, result.measured,
            result.threshold, verdict, f"{result.runtime_s:.2f}",
        )
    console.print(table)

    if not report.passed:
        console.print(f"[red]❌ {len(report.failures)} criterio(s) fallaron[/red]")
        raise typer.Exit(EXIT_FAILURE)
    console.print("[green]🎉 Todos los criterios pasaron[/green]")


@harness_app.command("runs")
def runs(
    kind: Optional[str] = typer.Option(None, "--kind", help="Filtrar por tipo de escenario"),
    limit: int = typer.Option(20, "--limit", help="Cantidad máxima de corridas"),
) -> None:
    """📚 Listar las corridas registradas."""
    try:
        records = RunRegistryService().list_runs(kind=kind, limit=limit)
    except Exception as e:
        fail("runs", e)

    if not records:
        console.print("[yellow]No hay corridas registradas[/yellow]")
        return

    table = Table(title="📚 Corridas registradas")
    table.add_column("Fecha", style="dim")
    table.add_column("Tipo", style="cyan")
    table.add_column("Semilla", justify="right")
    table.add_column("Estado")
    table.add_column("Tiempo (s)", justify="right", style="yellow")
    table.add_column("Hash", style="dim")
    for record in records:
        color = "green" if record.status == "ok" else "red"
        wall = f"{record.wall_time_s:.2f}" if record.wall_time_s is not None else "-"
        table.add_row(
            record.created_at.strftime("%Y-%m-%d %H:%M:%S") if record.created_at else "-",
            record.kind,
            record.seed,
            f"[{color}]{record.status}[/{color}]",
            wall,
            record.scenario_hash[:12],
        )
    console.print(table)
