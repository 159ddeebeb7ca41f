"""Comandos CLI del modelo de retículo ℤⁿ."""

from __future__ import annotations

import json
from pathlib import Path
from typing import Any, Dict, Optional

import pandas as pd
import typer
from rich.console import Console

from src.cli.commands.common import (
    default_output,
    fail,
    frame_table,
    parse_int_list,
    parse_range,
    parse_window,
    show_outcome,
)
from src.core.lattice import SimplexSpec
from src.services.experiment_service import ExperimentService
from src.services.scenario import scenario_from_dict
from src.utils.errors import ConfigCountError, InvalidParameterError
from src.utils.logging import get_logger

lattice_app = typer.Typer(
    name="lattice",
    help="🧊 Conteo de símplices y uniformidad en ℤⁿ",
    no_args_is_help=True,
)

console = Console()
logger = get_logger(__name__)


def _simplex(spec: Optional[Path], n: Optional[int], k: int) -> Dict[str, Any]:
    """--spec tiene prioridad; si no, el símplice ortonormal de k vértices en ℤⁿ."""
    if spec is not None:
        try:
            return SimplexSpec.load(spec).to_dict()
        except OSError as e:
            raise InvalidParameterError(f"No se pudo leer el símplice {spec}: {e}") from e
    if n is None:
        raise InvalidParameterError("Indique --spec o --n")
    simplex = SimplexSpec.segment(n) if k == 2 else SimplexSpec.orthonormal(n, k)
    return simplex.to_dict()


def _generator(
    kind: str,
    density: Optional[float],
    set_modulus: Optional[int],
    residue: Optional[str],
    concentration: float,
    densities: Optional[str],
    scale: Optional[int],
) -> Dict[str, Any]:
    config: Dict[str, Any] = {"kind": kind, "concentration": concentration}
    if density is not None:
        config["density"] = density
    if set_modulus is not None:
        config["modulus"] = set_modulus
    if residue is not None:
        config["residue"] = parse_int_list(residue)
    if densities is not None:
        config["densities"] = [float(v) for v in densities.split(",")]
    if scale is not None:
        config["scale"] = scale
    return config


@lattice_app.command("count")
def lattice_count(
    spec: Optional[Path] = typer.Option(None, "--spec", help="Archivo JSON del símplice {n, points}"),
    n: Optional[int] = typer.Option(None, "--n", help="Dimensión para el símplice ortonormal"),
    k: int = typer.Option(2, "--k", help="Vértices del símplice ortonormal"),
    lambda2: int = typer.Option(..., "--lambda2", help="Escala λ²"),
    q: int = typer.Option(1, "--q", help="Módulo de la red qℤⁿ"),
    bound: Optional[int] = typer.Option(None, "--bound", help="Caja de enumeración B"),
    seed: int = typer.Option(0, "--seed", help="Semilla"),
    output: Optional[Path] = typer.Option(None, "-o", "--output", help="Archivo JSON de salida"),
) -> None:
    """🔺 Enumerar copias isométricas de λΔ en (qℤ)ⁿ."""
    try:
        scenario = scenario_from_dict({
            "kind": "lattice_count",
            "simplex": _simplex(spec, n, k),
            "lambda2": lambda2,
            "q": q,
            "bound": bound,
            "seed": seed,
            "output": str(default_output(f"lattice_count_l{lambda2}_q{q}.json", output)),
        })
        with console.status(f"[bold green]Enumerando copias con λ²={lambda2}..."):
            outcome = ExperimentService().run(scenario)
        show_outcome(outcome, "✅ lattice-count completado")

    except ConfigCountError as e:
        fail("lattice-count", e)


@lattice_app.command("scan")
def lattice_scan(
    spec: Optional[Path] = typer.Option(None, "--spec", help="Archivo JSON del símplice {n, points}"),
    n: Optional[int] = typer.Option(None, "--n", help="Dimensión para el símplice ortonormal"),
    k: int = typer.Option(2, "--k", help="Vértices del símplice ortonormal"),
    lambda2_range: str = typer.Option(..., "--lambda2-range", help="Rango 'a:b' de λ²"),
    q: int = typer.Option(1, "--q", help="Módulo de la red qℤⁿ"),
    seed: int = typer.Option(0, "--seed", help="Semilla"),
    output: Optional[Path] = typer.Option(None, "-o", "--output", help="Archivo CSV de salida"),
) -> None:
    """📈 Conteos normalizados en un rango de λ²."""
    try:
        low, high = parse_range(lambda2_range)
        scenario = scenario_from_dict({
            "kind": "lattice_scan",
            "simplex": _simplex(spec, n, k),
            "lambda2_min": low,
            "lambda2_max": high,
            "q": q,
            "seed": seed,
            "output": str(default_output(f"lattice_scan_{low}_{high}_q{q}.csv", output)),
        })
        with console.status(f"[bold green]Recorriendo λ² ∈ [{low}, {high}]..."):
            outcome = ExperimentService().run(scenario)

        frame = pd.read_csv(outcome.artifact, comment="#")
        console.print(frame_table("📈 Conteos normalizados", frame))
        show_outcome(outcome, "✅ lattice-scan completado")

    except ConfigCountError as e:
        fail("lattice-scan", e)


def _set_command(
    kind: str,
    window: str,
    generator: str,
    density: Optional[float],
    set_modulus: Optional[int],
    residue: Optional[str],
    concentration: float,
    densities: Optional[str],
    scale: Optional[int],
    eps: float,
    modulus: Optional[int],
    seed: int,
    output: Optional[Path],
) -> Dict[str, Any]:
    scenario = scenario_from_dict({
        "kind": kind,
        "window": parse_window(window),
        "generator": _generator(generator, density, set_modulus, residue, concentration, densities, scale),
        "eps": eps,
        "modulus": modulus,
        "seed": seed,
        "output": str(default_output(f"{kind}_{generator}_s{seed}.json", output)),
    })
    with console.status(f"[bold green]Ejecutando {kind}..."):
        outcome = ExperimentService().run(scenario)
    show_outcome(outcome, f"✅ {kind} completado")
    return json.loads(Path(outcome.artifact).read_text(encoding="utf-8"))


@lattice_app.command("uniformity")
def uniformity(
    window: str = typer.Option(..., "--window", help="Ventana 'n,lado' (opcionalmente ',esquina…')"),
    generator: str = typer.Option("random_density", "--generator", help="random_density, congruence_class, planted_product o two_scale"),
    density: Optional[float] = typer.Option(None, "--density", help="Densidad (random_density)"),
    set_modulus: Optional[int] = typer.Option(None, "--set-modulus", help="Módulo de la clase (congruence_class)"),
    residue: Optional[str] = typer.Option(None, "--residue", help="Residuo de la clase, separado por comas"),
    concentration: float = typer.Option(1.0, "--concentration", help="Fracción de S dentro de la clase"),
    densities: Optional[str] = typer.Option(None, "--densities", help="Densidades δ₁,δ₂ (planted_product)"),
    scale: Optional[int] = typer.Option(None, "--scale", help="Escala L (two_scale)"),
    eps: float = typer.Option(..., "--eps", help="Tolerancia ε"),
    modulus: Optional[int] = typer.Option(None, "--modulus", help="Módulo de prueba (por defecto el sustituto de q_ε)"),
    seed: int = typer.Option(0, "--seed", help="Semilla"),
    output: Optional[Path] = typer.Option(None, "-o", "--output", help="Archivo JSON de salida"),
) -> None:
    """⚖️ Probar si S es ε-uniforme respecto de las clases módulo q."""
    try:
        document = _set_command(
            "uniformity", window, generator, density, set_modulus, residue,
            concentration, densities, scale, eps, modulus, seed, output,
        )
        verdict = "[green]uniforme[/green]" if document["is_uniform"] else "[red]no uniforme[/red]"
        console.print(f"⚖️ S es {verdict} (cociente {document['ratio']:.4f})")

    except ConfigCountError as e:
        fail("uniformity", e)


@lattice_app.command("increment")
def increment(
    window: str = typer.Option(..., "--window", help="Ventana 'n,lado' (opcionalmente ',esquina…')"),
    generator: str = typer.Option("random_density", "--generator", help="random_density, congruence_class, planted_product o two_scale"),
    density: Optional[float] = typer.Option(None, "--density", help="Densidad (random_density)"),
    set_modulus: Optional[int] = typer.Option(None, "--set-modulus", help="Módulo de la clase (congruence_class)"),
    residue: Optional[str] = typer.Option(None, "--residue", help="Residuo de la clase, separado por comas"),
    concentration: float = typer.Option(1.0, "--concentration", help="Fracción de S dentro de la clase"),
    densities: Optional[str] = typer.Option(None, "--densities", help="Densidades δ₁,δ₂ (planted_product)"),
    scale: Optional[int] = typer.Option(None, "--scale", help="Escala L (two_scale)"),
    eps: float = typer.Option(..., "--eps", help="Tolerancia ε"),
    modulus: Optional[int] = typer.Option(None, "--modulus", help="Módulo de prueba (por defecto el sustituto de q_ε)"),
    seed: int = typer.Option(0, "--seed", help="Semilla"),
    output: Optional[Path] = typer.Option(None, "-o", "--output", help="Archivo JSON de salida"),
) -> None:
    """🪜 Iterar el incremento de densidad hasta la uniformidad."""
    try:
        document = _set_command(
            "increment", window, generator, density, set_modulus, residue,
            concentration, densities, scale, eps, modulus, seed, output,
        )
        console.print(
            f"🪜 Estado: [bold]{document['status']}[/bold] tras {document['steps']} pasos "
            f"(densidad {document['initial_density']:.4f} → {document['final_density']:.4f})"
        )

    except ConfigCountError as e:
        fail("increment", e)
