"""Comandos CLI del modelo de cuerpo finito."""

from __future__ import annotations

import json
from pathlib import Path
from typing import Optional

import pandas as pd
import typer
from rich.console import Console
from rich.table import Table

from src.cli.commands.common import default_output, fail, frame_table, parse_int_list, show_outcome
from src.services.experiment_service import ExperimentService
from src.services.scenario import scenario_from_dict
from src.utils.errors import ConfigCountError
from src.utils.logging import get_logger

ff_app = typer.Typer(
    name="ff",
    help="🔢 Conteo de configuraciones en (F_q²)^d",
    no_args_is_help=True,
)

console = Console()
logger = get_logger(__name__)


@ff_app.command("count")
def ff_count(
    q: int = typer.Option(..., "--q", help="Primo impar q"),
    d: int = typer.Option(2, "--d", help="Número de bloques (1 o 2)"),
    t: Optional[str] = typer.Option(None, "--t", help="Escalas t separadas por coma; sin valor recorre todas"),
    density: float = typer.Option(0.5, "--density", help="Densidad del conjunto S"),
    seed: int = typer.Option(0, "--seed", help="Semilla"),
    trials: int = typer.Option(1, "--trials", help="Conjuntos independientes a evaluar"),
    method: str = typer.Option("einsum", "--method", help="einsum o direct"),
    allow_large: bool = typer.Option(False, "--allow-large", help="Permitir q por encima del tope"),
    output: Optional[Path] = typer.Option(None, "-o", "--output", help="Archivo CSV de salida"),
) -> None:
    """📐 Comparar N(1_S) con M(1_S) y la cota δ^{|K|}."""
    try:
        scenario = scenario_from_dict({
            "kind": "ff_count",
            "q": q,
            "d": d,
            "t": parse_int_list(t) if t else None,
            "density": density,
            "seed": seed,
            "trials": trials,
            "method": method,
            "output": str(default_output(f"ff_count_q{q}_d{d}.csv", output)),
        })
        with console.status(f"[bold green]Contando configuraciones en q={q}, d={d}..."):
            outcome = ExperimentService(allow_large=allow_large).run(scenario)

        frame = pd.read_csv(outcome.artifact, comment="#")
        console.print(frame_table("📐 Conteo de configuraciones", frame))
        show_outcome(outcome, "✅ ff-count completado")

    except ConfigCountError as e:
        fail("ff-count", e)


@ff_app.command("regularize")
def ff_regularize(
    q: int = typer.Option(..., "--q", help="Primo impar q"),
    d: int = typer.Option(2, "--d", help="Número de bloques"),
    k: int = typer.Option(2, "--k", help="Uniformidad de las aristas"),
    eps: float = typer.Option(0.25, "--eps", help="Tolerancia ε"),
    seed: int = typer.Option(0, "--seed", help="Semilla"),
    family: str = typer.Option("signs", "--family", help="signs o uniform"),
    allow_large: bool = typer.Option(False, "--allow-large", help="Permitir q por encima del tope"),
    output: Optional[Path] = typer.Option(None, "-o", "--output", help="Archivo JSON de salida"),
) -> None:
    """🧩 Regularidad débil por incremento de energía."""
    try:
        scenario = scenario_from_dict({
            "kind": "ff_regularize",
            "q": q,
            "d": d,
            "k": k,
            "eps": eps,
            "seed": seed,
            "family": family,
            "output": str(default_output(f"ff_regularize_q{q}_d{d}_k{k}.json", output)),
        })
        with console.status("[bold green]Refinando particiones..."):
            outcome = ExperimentService(allow_large=allow_large).run(scenario)

        document = json.loads(Path(outcome.artifact).read_text(encoding="utf-8"))
        table = Table(title="🧩 Normas de caja finales")
        table.add_column("Arista", style="white")
        table.add_column("‖f − E(f|B)‖□", justify="right", style="yellow")
        for edge, norm in document["final_box_norms"].items():
            table.add_row(edge, f"{norm:.6g}")
        console.print(table)
        show_outcome(outcome, "✅ ff-regularize completado")

    except ConfigCountError as e:
        fail("ff-regularize", e)


@ff_app.command("decay")
def ff_decay(
    q_min: int = typer.Option(3, "--q-min", help="Primo mínimo"),
    q_max: int = typer.Option(101, "--q-max", help="Primo máximo"),
    output: Optional[Path] = typer.Option(None, "-o", "--output", help="Archivo CSV de salida"),
) -> None:
    """📉 Decaimiento de Fourier de la medida de esfera."""
    try:
        scenario = scenario_from_dict({
            "kind": "ff_decay",
            "q_min": q_min,
            "q_max": q_max,
            "output": str(default_output(f"ff_decay_{q_min}_{q_max}.csv", output)),
        })
        with console.status("[bold green]Calculando transformadas de esferas..."):
            outcome = ExperimentService().run(scenario)
        show_outcome(outcome, "✅ ff-decay completado")

    except ConfigCountError as e:
        fail("ff-decay", e)
