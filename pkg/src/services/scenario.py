"""
Esquema declarativo de escenarios.

Un escenario es un documento JSON con `kind`, `seed`, `output` y los
parámetros propios de su tipo. Ejemplo:

    {"kind": "ff_count", "q": 5, "d": 2, "density": 0.5, "seed": 1,
     "output": "results/ff_count_q5.csv"}
"""

from __future__ import annotations

import hashlib
import json
from pathlib import Path
from typing import Annotated, List, Literal, Optional, Union

from pydantic import BaseModel, ConfigDict, Field, TypeAdapter, ValidationError, model_validator

from src.core.lattice import GridCube, SimplexSpec
from src.services.generators import GeneratorKind
from src.utils.errors import ScenarioError

SEED_MAX = 2**64 - 1


class _Model(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)


class SimplexConfig(_Model):
    """Formato de archivo de símplice: {n, points: [[…]]}."""

    n: int = Field(ge=1)
    points: List[List[int]] = Field(min_length=2)

    @model_validator(mode="after")
    def _check_simplex(self) -> SimplexConfig:
        self.to_spec()
        return self

    def to_spec(self) -> SimplexSpec:
        return SimplexSpec(n=self.n, points=tuple(tuple(p) for p in self.points))


class WindowConfig(_Model):
    n: int = Field(ge=1)
    side: int = Field(ge=1)
    corner: Optional[List[int]] = None

    def to_window(self) -> GridCube:
        corner = tuple(self.corner) if self.corner is not None else (0,) * self.n
        return GridCube(n=self.n, corner=corner, side=self.side)


class GeneratorConfig(_Model):
    kind: GeneratorKind
    density: Optional[float] = Field(default=None, ge=0, le=1)
    modulus: Optional[int] = Field(default=None, ge=1)
    residue: Optional[List[int]] = None
    concentration: float = Field(default=1.0, gt=0, le=1)
    densities: Optional[List[float]] = None
    scale: Optional[int] = Field(default=None, ge=1)

    @model_validator(mode="after")
    def _check_kind_fields(self) -> GeneratorConfig:
        required = {
            GeneratorKind.RANDOM_DENSITY: "density",
            GeneratorKind.CONGRUENCE_CLASS: "modulus",
            GeneratorKind.PLANTED_PRODUCT: "densities",
            GeneratorKind.TWO_SCALE: "scale",
        }[self.kind]
        if getattr(self, required) is None:
            raise ValueError(f"el generador {self.kind.value} requiere '{required}'")
        return self


class _ScenarioBase(_Model):
    seed: int = Field(default=0, ge=0, le=SEED_MAX)
    output: Path


class FFCountScenario(_ScenarioBase):
    kind: Literal["ff_count"]
    q: int = Field(ge=3)
    d: int = Field(default=2, ge=1, le=2)
    density: float = Field(default=0.5, gt=0, le=1)
    t: Optional[List[int]] = None
    method: Literal["einsum", "direct"] = "einsum"
    trials: int = Field(default=1, ge=1)

    @model_validator(mode="after")
    def _check_t(self) -> FFCountScenario:
        if self.t is not None and len(self.t) != self.d:
            raise ValueError(f"t debe tener {self.d} entradas")
        return self


class FFRegularizeScenario(_ScenarioBase):
    kind: Literal["ff_regularize"]
    q: int = Field(ge=3)
    d: int = Field(default=2, ge=1)
    k: int = Field(default=2, ge=1)
    eps: float = Field(default=0.25, gt=0)
    family: Literal["signs", "uniform"] = "signs"

    @model_validator(mode="after")
    def _check_k(self) -> FFRegularizeScenario:
        if self.k > self.d:
            raise ValueError("se requiere k <= d")
        return self


class FFDecayScenario(_ScenarioBase):
    kind: Literal["ff_decay"]
    q_min: int = Field(default=3, ge=3)
    q_max: int = Field(default=101, ge=3)


class LatticeCountScenario(_ScenarioBase):
    kind: Literal["lattice_count"]
    simplex: SimplexConfig
    lambda2: int = Field(ge=1)
    q: int = Field(default=1, ge=1)
    bound: Optional[int] = Field(default=None, ge=0)


class LatticeScanScenario(_ScenarioBase):
    kind: Literal["lattice_scan"]
    simplex: SimplexConfig
    lambda2_min: int = Field(ge=1)
    lambda2_max: int = Field(ge=1)
    q: int = Field(default=1, ge=1)

    @model_validator(mode="after")
    def _check_range(self) -> LatticeScanScenario:
        if self.lambda2_max < self.lambda2_min:
            raise ValueError("lambda2_max debe ser >= lambda2_min")
        return self


class UniformityScenario(_ScenarioBase):
    kind: Literal["uniformity"]
    window: WindowConfig
    generator: GeneratorConfig
    eps: float = Field(gt=0, le=1)
    modulus: Optional[int] = Field(default=None, ge=1)


class IncrementScenario(_ScenarioBase):
    kind: Literal["increment"]
    window: WindowConfig
    generator: GeneratorConfig
    eps: float = Field(gt=0, le=1)
    modulus: Optional[int] = Field(default=None, ge=1)


Scenario = Annotated[
    Union[
        FFCountScenario,
        FFRegularizeScenario,
        FFDecayScenario,
        LatticeCountScenario,
        LatticeScanScenario,
        UniformityScenario,
        IncrementScenario,
    ],
    Field(discriminator="kind"),
]

_ADAPTER: TypeAdapter[Scenario] = TypeAdapter(Scenario)


def _diagnostics(error: ValidationError) -> List[tuple[str, str]]:
    return [(".".join(str(part) for part in item["loc"]) or "<documento>", item["msg"]) for item in error.errors()]


def parse_scenario(text: str) -> Scenario:
    """Validar un documento JSON; los errores se devuelven por campo."""
    try:
        return _ADAPTER.validate_json(text)
    except ValidationError as e:
        raise ScenarioError("Escenario inválido", diagnostics=_diagnostics(e)) from e


def scenario_from_dict(data: dict) -> Scenario:
    """Validar un escenario ya cargado (por ejemplo, construido desde la CLI)."""
    try:
        return _ADAPTER.validate_python(data)
    except ValidationError as e:
        raise ScenarioError("Escenario inválido", diagnostics=_diagnostics(e)) from e


def load_scenario(path: Path) -> Scenario:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as e:
        raise ScenarioError(f"No se pudo leer el escenario {path}", diagnostics=[("<archivo>", str(e))]) from e
    return parse_scenario(text)


def canonical_json(scenario: Scenario) -> str:
    return json.dumps(scenario.model_dump(mode="json"), sort_keys=True, separators=(",", ":"))


def scenario_hash(scenario: Scenario) -> str:
    """sha256 del JSON canónico del escenario."""
    return hashlib.sha256(canonical_json(scenario).encode("utf-8")).hexdigest()
