"""CLI principal de Config Count."""

from __future__ import annotations

import logging

import typer
from rich.console import Console

from src.cli.commands import ff_app, harness_app, lattice_app
from src.cli.commands.ff import ff_count, ff_decay, ff_regularize
from src.cli.commands.harness import acceptance, run, runs
from src.cli.commands.lattice import increment, lattice_count, lattice_scan, uniformity
from src.utils.logging import ROOT_LOGGER, get_logger

app = typer.Typer(
    name="config-count",
    help="🔺 Config Count - Conteo de configuraciones y regularidad de hipergrafos",
    no_args_is_help=True,
    rich_markup_mode="rich",
    context_settings={"help_option_names": ["-h", "--help"]},
)

app.add_typer(ff_app, name="ff", help="🔢 Modelo de cuerpo finito")
app.add_typer(lattice_app, name="lattice", help="🧊 Modelo de retículo")
app.add_typer(harness_app, name="harness", help="🧪 Escenarios y aceptación")

# Atajos de nivel superior
app.command("ff-count")(ff_count)
app.command("ff-regularize")(ff_regularize)
app.command("ff-decay")(ff_decay)
app.command("lattice-count")(lattice_count)
app.command("lattice-scan")(lattice_scan)
app.command("uniformity")(uniformity)
app.command("increment")(increment)
app.command("run")(run)
app.command("acceptance")(acceptance)
app.command("runs")(runs)

console = Console()
logger = get_logger(__name__)


@app.command()
def status() -> None:
    """🚦 Verificar configuración y registro de corridas."""
    from src.config.settings import get_settings
    from src.database.connection import registry_tables

    try:
        console.print("\n[bold blue]🚦 Estado del Sistema[/bold blue]")
        console.print("=" * 30)

        settings = get_settings()
        console.print(f"[blue]⚙️ Configuración:[/blue] {settings.app_name} v{settings.app_version}")
        console.print(f"[blue]🎲 RNG:[/blue] {settings.rng_algorithm}")
        console.print(f"[blue]🧵 Hilos:[/blue] {settings.threads}")
        console.print(f"[blue]📁 Resultados:[/blue] {settings.output_dir}")
        console.print(
            f"[blue]📏 Topes:[/blue] q ≤ {settings.ff_max_q}, λ² ≤ {settings.lattice_max_lambda2}, "
            f"ventana ≤ {settings.lattice_max_volume:,} puntos"
        )

        if settings.record_runs:
            console.print(f"[blue]💾 Registro:[/blue] {settings.database_url}")
            console.print(f"[blue]📋 Tablas:[/blue] {', '.join(registry_tables()) or 'ninguna'}")
        else:
            console.print("[yellow]💾 Registro de corridas deshabilitado[/yellow]")

        console.print("\n[green]🎉 Sistema funcionando correctamente[/green]\n")

    except Exception as e:
        console.print(f"[red]❌ Error en el sistema: {e}[/red]")
        logger.error(f"Error en comando status: {e}")
        raise typer.Exit(1)


@app.command()
def version() -> None:
    """📦 Mostrar información de versión."""
    import numpy as np

    from src import __author__, __version__

    console.print("\n[bold blue]📦 Config Count[/bold blue]")
    console.print(f"[blue]Versión:[/blue] {__version__}")
    console.print(f"[blue]NumPy:[/blue] {np.__version__}")
    console.print(f"[blue]Autor:[/blue] {__author__}")
    console.print()


@app.callback()
def main(
    verbose: bool = typer.Option(False, "--verbose", "-v", help="Habilitar salida detallada"),
    debug: bool = typer.Option(False, "--debug", "-d", help="Habilitar modo debug"),
) -> None:
    """
    🔺 Config Count - Conteo de configuraciones geométricas.

    Formas de conteo en (F_q²)^d, normas de caja y regularidad débil de
    hipergrafos; conteo de símplices en ℤⁿ, uniformidad e incremento de densidad.
    """
    if verbose:
        logging.getLogger(ROOT_LOGGER).setLevel(logging.INFO)

    if debug:
        logging.getLogger(ROOT_LOGGER).setLevel(logging.DEBUG)
        console.print("[yellow]Modo debug habilitado[/yellow]")


if __name__ == "__main__":
    app()
