"""Ejecución de escenarios: cálculo, artefactos atómicos y manifiestos."""

from __future__ import annotations

import json
import os
import platform
import time
from dataclasses import dataclass
from itertools import product
from pathlib import Path
from typing import Any, Callable, Dict, List, Optional, Tuple, Union

import numpy as np
import pandas as pd

from src import __version__
from src.config.settings import get_settings
from src.core.ff_core import primes_up_to, sphere_decay
from src.core.forms import ConfigurationSpace, counting_gap, random_family
from src.core.hypergraph import BundleSpec
from src.core.kernels import ordered_map
from src.core.lattice import (
    LatticeSet,
    count_asymptotic_scan,
    density_increment,
    normalization_exponent,
    sigma_normalized,
    uniformity_test,
)
from src.core.regularity import weak_regularize
from src.database.models import RunStatus
from src.services.generators import GeneratorKind, SetGenerator
from src.services.run_registry_service import RunRegistryService
from src.services.scenario import (
    FFCountScenario,
    FFDecayScenario,
    FFRegularizeScenario,
    GeneratorConfig,
    IncrementScenario,
    LatticeCountScenario,
    LatticeScanScenario,
    Scenario,
    UniformityScenario,
    WindowConfig,
    scenario_hash,
)
from src.utils.errors import CapExceededError, ConfigCountError
from src.utils.logging import get_logger

logger = get_logger(__name__)

SCHEMA_VERSION = 1
Payload = Union[pd.DataFrame, Dict[str, Any]]


def schema_header(kind: str) -> str:
    return f"# schema: config-count/{kind} v{SCHEMA_VERSION}\n"


def write_atomic(path: Path, text: str) -> Path:
    """Escribir en un temporal y renombrar: el artefacto nunca queda a medias."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    temporary = path.with_name(path.name + ".tmp")
    with open(temporary, "w", encoding="utf-8", newline="") as handle:
        handle.write(text)
    os.replace(temporary, path)
    return path


def render_payload(kind: str, payload: Payload) -> str:
    """CSV con cabecera de esquema, o JSON canónico; sin tiempos para que sea determinista."""
    if isinstance(payload, pd.DataFrame):
        return schema_header(kind) + payload.to_csv(index=False, lineterminator="\n")
    document = {"schema": f"config-count/{kind} v{SCHEMA_VERSION}", **payload}
    return json.dumps(document, sort_keys=True, indent=2) + "\n"


def manifest_path_for(artifact: Path) -> Path:
    return artifact.with_name(artifact.stem + ".manifest.json")


@dataclass
class RunOutcome:
    kind: str
    artifact: Path
    manifest: Path
    summary: Dict[str, Any]
    wall_time_s: float


def _window_set(generator: SetGenerator, window: WindowConfig, config: GeneratorConfig) -> LatticeSet:
    cube = window.to_window()
    cube.check_cap()
    if config.kind is GeneratorKind.RANDOM_DENSITY:
        return generator.random_density(cube, config.density or 0.0)
    if config.kind is GeneratorKind.CONGRUENCE_CLASS:
        residue = tuple(config.residue) if config.residue is not None else None
        return generator.congruence_class(cube, config.modulus or 1, residue, config.concentration)
    if config.kind is GeneratorKind.PLANTED_PRODUCT:
        return generator.planted_product(cube, config.densities or [])
    return generator.two_scale(cube, config.scale or 1)


class ExperimentService:
    """Ejecutar escenarios y registrar sus manifiestos."""

    def __init__(
        self,
        registry: Optional[RunRegistryService] = None,
        threads: Optional[int] = None,
        allow_large: bool = False,
    ):
        self.settings = get_settings()
        self.threads = threads
        self.allow_large = allow_large
        self._registry = registry
        self._handlers: Dict[str, Callable[[Any], Tuple[Payload, Dict[str, Any]]]] = {
            "ff_count": self._ff_count,
            "ff_regularize": self._ff_regularize,
            "ff_decay": self._ff_decay,
            "lattice_count": self._lattice_count,
            "lattice_scan": self._lattice_scan,
            "uniformity": self._uniformity,
            "increment": self._increment,
        }

    @property
    def registry(self) -> Optional[RunRegistryService]:
        if self._registry is None and self.settings.record_runs:
            self._registry = RunRegistryService()
        return self._registry

    def run(self, scenario: Scenario) -> RunOutcome:
        """Ejecutar un escenario, escribir artefacto y manifiesto, y registrar la corrida."""
        logger.info(f"Ejecutando escenario {scenario.kind} (semilla {scenario.seed})")
        started = time.perf_counter()
        status = RunStatus.OK

        try:
            payload, summary = self._handlers[scenario.kind](scenario)
            artifact = write_atomic(scenario.output, render_payload(scenario.kind, payload))
        except CapExceededError:
            status = RunStatus.CAP_EXCEEDED
            self._record(scenario, status, time.perf_counter() - started, None)
            raise
        except ConfigCountError as e:
            logger.error(f"Error al ejecutar escenario {scenario.kind}: {e}")
            self._record(scenario, RunStatus.FAILED, time.perf_counter() - started, None)
            raise

        wall_time = time.perf_counter() - started
        manifest = self._record(scenario, status, wall_time, artifact, summary)
        logger.info(f"Artefacto escrito en {artifact} ({wall_time:.2f} s)")
        return RunOutcome(
            kind=scenario.kind,
            artifact=artifact,
            manifest=Path(manifest["manifest"]),
            summary=summary,
            wall_time_s=wall_time,
        )

    def run_many(self, scenarios: List[Scenario]) -> List[RunOutcome]:
        """Escenarios independientes, en paralelo según CONFIG_COUNT_THREADS."""
        return ordered_map(self.run, scenarios, self.threads)

    def build_manifest(
        self,
        scenario: Scenario,
        status: RunStatus,
        wall_time: float,
        artifact: Optional[Path],
        summary: Optional[Dict[str, Any]] = None,
    ) -> Dict[str, Any]:
        manifest_file = manifest_path_for(Path(scenario.output))
        return {
            "kind": scenario.kind,
            "seed": scenario.seed,
            "scenario_hash": scenario_hash(scenario),
            "rng_algorithm": self.settings.rng_algorithm,
            "package_version": __version__,
            "numpy_version": np.__version__,
            "pandas_version": pd.__version__,
            "python_version": platform.python_version(),
            "status": status.value,
            "wall_time_s": round(wall_time, 6),
            "artifact": str(artifact) if artifact is not None else None,
            "manifest": str(manifest_file),
            "summary": summary or {},
        }

    def _record(
        self,
        scenario: Scenario,
        status: RunStatus,
        wall_time: float,
        artifact: Optional[Path],
        summary: Optional[Dict[str, Any]] = None,
    ) -> Dict[str, Any]:
        manifest = self.build_manifest(scenario, status, wall_time, artifact, summary)
        write_atomic(Path(manifest["manifest"]), json.dumps(manifest, sort_keys=True, indent=2) + "\n")

        registry = self.registry
        if registry is not None:
            try:
                registry.record_run(manifest)
            except Exception as e:
                # El artefacto ya está escrito; el registro es secundario
                logger.warning(f"No se pudo registrar la corrida: {e}")
        return manifest

    # Manejadores por tipo

    def _check_ff_cap(self, q: int) -> None:
        if q > self.settings.ff_max_q and not self.allow_large:
            raise CapExceededError(f"q={q} supera el tope {self.settings.ff_max_q} para sumas directas")

    def _ff_count(self, scenario: FFCountScenario) -> Tuple[Payload, Dict[str, Any]]:
        self._check_ff_cap(scenario.q)
        generator = SetGenerator(scenario.seed, self.settings.rng_algorithm)
        sweep = [tuple(scenario.t)] if scenario.t else list(product(range(1, scenario.q), repeat=scenario.d))
        rows = []
        for trial in range(scenario.trials):
            subset = generator.ff_random_subset(scenario.q, scenario.d, scenario.density)
            for t in sweep:
                space = ConfigurationSpace(q=scenario.q, d=scenario.d, t=t)
                result = counting_gap(space, subset, scenario.method, self.threads)
                rows.append({
                    "q": scenario.q,
                    "d": scenario.d,
                    "t": "/".join(str(v) for v in space.t),
                    "density": float(subset.mean()),
                    "N": result.N,
                    "M": result.M,
                    "gap": result.gap,
                    "lower_bound": result.lower_bound,
                    "box_min": result.box_min,
                    "trial": trial,
                })

        table = pd.DataFrame(rows)
        return table, {"rows": len(table), "max_gap": float(table["gap"].max())}

    def _ff_regularize(self, scenario: FFRegularizeScenario) -> Tuple[Payload, Dict[str, Any]]:
        self._check_ff_cap(scenario.q)
        generator = SetGenerator(scenario.seed, self.settings.rng_algorithm)
        spec = BundleSpec.rectangles(scenario.d, scenario.k)
        family = random_family(spec, scenario.q, generator.rng, scenario.family)

        result = weak_regularize(family, scenario.eps)
        document = {"q": scenario.q, "d": scenario.d, "k": scenario.k, **result.to_dict(scenario.d)}
        return document, {"iterations": result.iterations}

    def _ff_decay(self, scenario: FFDecayScenario) -> Tuple[Payload, Dict[str, Any]]:
        rows = []
        for q in primes_up_to(scenario.q_max, start=scenario.q_min):
            for t in range(1, q):
                decay = sphere_decay(q, t)
                rows.append({
                    "q": q,
                    "t": t,
                    "mean_dev": decay.mean_deviation,
                    "max_decay_const": decay.max_decay_const,
                })

        table = pd.DataFrame(rows, columns=["q", "t", "mean_dev", "max_decay_const"])
        summary = {
            "rows": len(table),
            "max_mean_dev": float(table["mean_dev"].max()) if len(table) else 0.0,
            "max_decay_const": float(table["max_decay_const"].max()) if len(table) else 0.0,
        }
        return table, summary

    def _lattice_count(self, scenario: LatticeCountScenario) -> Tuple[Payload, Dict[str, Any]]:
        spec = scenario.simplex.to_spec()
        measure = sigma_normalized(spec, scenario.lambda2, scenario.q, scenario.bound, threads=self.threads)
        document = {
            "n": spec.n,
            "k": spec.k,
            "lambda2": scenario.lambda2,
            "q": scenario.q,
            "raw_count": measure.raw_count,
            "normalized": measure.normalized,
            "exponent": normalization_exponent(spec),
            "weight": str(measure.weights[0]),
            "copies": [[list(m) for m in copy] for copy in measure.copies],
        }
        return document, {"raw_count": measure.raw_count}

    def _lattice_scan(self, scenario: LatticeScanScenario) -> Tuple[Payload, Dict[str, Any]]:
        spec = scenario.simplex.to_spec()
        values = list(range(scenario.lambda2_min, scenario.lambda2_max + 1))
        scan = count_asymptotic_scan(spec, values, scenario.q, threads=self.threads)
        present = scan.table[scan.table["raw_count"] > 0]["normalized"]
        summary = {
            "rho_hat": scan.rho_hat,
            "decay_exponent": scan.decay_exponent,
            "ratio": float(present.max() / present.min()) if len(present) else None,
        }
        return scan.table, summary

    def _uniformity(self, scenario: UniformityScenario) -> Tuple[Payload, Dict[str, Any]]:
        generator = SetGenerator(scenario.seed, self.settings.rng_algorithm)
        subset = _window_set(generator, scenario.window, scenario.generator)
        modulus = scenario.modulus or self.settings.surrogate_modulus

        report = uniformity_test(subset, scenario.eps, modulus)
        document = {
            "window": subset.window.to_dict(),
            "eps": scenario.eps,
            "modulus": modulus,
            "max_relative_density": report.max_relative_density,
            "overall_density": report.overall_density,
            "ratio": report.ratio,
            "is_uniform": report.is_uniform,
            "worst_residue": list(report.worst_residue),
        }
        return document, {"is_uniform": report.is_uniform}

    def _increment(self, scenario: IncrementScenario) -> Tuple[Payload, Dict[str, Any]]:
        generator = SetGenerator(scenario.seed, self.settings.rng_algorithm)
        subset = _window_set(generator, scenario.window, scenario.generator)
        modulus = scenario.modulus or self.settings.surrogate_modulus

        result = density_increment(subset, scenario.eps, modulus)
        document = {
            "window": subset.window.to_dict(),
            "eps": scenario.eps,
            "modulus": modulus,
            "status": result.status,
            "steps": result.steps,
            "initial_density": subset.density,
            "final_density": result.final_set.density,
            "final_window": result.final_set.window.to_dict(),
            "history": [
                {
                    "step": step.step,
                    "residue": list(step.residue),
                    "shift": list(step.shift),
                    "density_before": step.density_before,
                    "density_after": step.density_after,
                    "window_side": step.window_side,
                }
                for step in result.history
            ],
        }
        return document, {"status": result.status, "steps": result.steps}
