"""
Haces de hipergrafos 𝓗_{d,k}^{n̄}: aristas, proyecciones, bordes y eliminación de entradas.

Los bloques y las etiquetas se numeran desde 1. Las aristas se guardan
ordenadas por bloque; la igualdad es estructural.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from itertools import combinations, product
from typing import Dict, List, Tuple

from src.utils.errors import InvalidParameterError

_EDGE_PATTERN = re.compile(r"^\s*(\d+)\.(\d+)\s*:\s*\[(.*)\]\s*$")


@dataclass(frozen=True)
class BundleSpec:
    """Parámetros (d, k, n̄) de un haz de hipergrafos."""

    d: int
    k: int
    n: Tuple[int, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "n", tuple(int(v) for v in self.n))
        if self.d < 1:
            raise InvalidParameterError(f"d debe ser >= 1, recibido {self.d}")
        if not 1 <= self.k <= self.d:
            raise InvalidParameterError(f"Se requiere 1 <= k <= d, recibido k={self.k}, d={self.d}")
        if len(self.n) != self.d:
            raise InvalidParameterError(f"n̄ debe tener {self.d} entradas, tiene {len(self.n)}")
        if any(v < 1 for v in self.n):
            raise InvalidParameterError(f"Todas las multiplicidades deben ser >= 1: {self.n}")

    @classmethod
    def rectangles(cls, d: int, k: int | None = None) -> BundleSpec:
        """Caso rectángulo n̄ = (2,…,2)."""
        return cls(d=d, k=d if k is None else k, n=(2,) * d)

    @classmethod
    def parse(cls, text: str) -> BundleSpec:
        """Leer "d.k" (n̄ = 2̲) o "d.k/n1,n2,…"."""
        head, _, tail = text.partition("/")
        try:
            d_text, k_text = head.split(".")
            d, k = int(d_text), int(k_text)
            n = tuple(int(v) for v in tail.split(",")) if tail else (2,) * d
        except ValueError as e:
            raise InvalidParameterError(f"Especificación de haz inválida: {text!r}") from e
        return cls(d=d, k=k, n=n)

    @property
    def is_rectangular(self) -> bool:
        return all(v == 2 for v in self.n)

    def expected_size(self) -> int:
        """Σ_{|e′|=k} Π_{i∈e′} nᵢ."""
        return sum(math.prod(self.n[i - 1] for i in blocks) for blocks in
                   combinations(range(1, self.d + 1), self.k))

    def __str__(self) -> str:
        return f"{self.d}.{self.k}/{','.join(str(v) for v in self.n)}"


@dataclass(frozen=True, order=True)
class BaseEdge:
    """Arista e′ ⊆ {1..d} del hipergrafo completo 𝓗_{d,k}."""

    blocks: Tuple[int, ...]

    def __post_init__(self) -> None:
        blocks = tuple(sorted(int(b) for b in self.blocks))
        if len(set(blocks)) != len(blocks):
            raise InvalidParameterError(f"Bloques repetidos en {self.blocks}")
        object.__setattr__(self, "blocks", blocks)

    @property
    def arity(self) -> int:
        return len(self.blocks)

    def without(self, block: int) -> BaseEdge:
        if block not in self.blocks:
            raise InvalidParameterError(f"El bloque {block} no está en {self}")
        return BaseEdge(tuple(b for b in self.blocks if b != block))

    def __str__(self) -> str:
        return "{" + ",".join(str(b) for b in self.blocks) + "}"


@dataclass(frozen=True, order=True)
class Edge:
    """Arista e = {(i, lᵢ)} con bloques distintos, ordenada por bloque."""

    entries: Tuple[Tuple[int, int], ...]

    def __post_init__(self) -> None:
        entries = tuple(sorted((int(b), int(l)) for b, l in self.entries))
        blocks = [b for b, _ in entries]
        if len(set(blocks)) != len(blocks):
            raise InvalidParameterError(f"La arista repite bloques: {entries}")
        if any(b < 1 or l < 1 for b, l in entries):
            raise InvalidParameterError(f"Bloques y etiquetas empiezan en 1: {entries}")
        object.__setattr__(self, "entries", entries)

    @property
    def arity(self) -> int:
        return len(self.entries)

    def projection(self) -> BaseEdge:
        """π(e)."""
        return BaseEdge(tuple(b for b, _ in self.entries))

    def label(self, block: int) -> int:
        for b, l in self.entries:
            if b == block:
                return l
        raise InvalidParameterError(f"El bloque {block} no aparece en {self.entries}")

    def to_text(self, d: int) -> str:
        """Forma textual "d.k:[i:l,…]"."""
        body = ",".join(f"{b}:{l}" for b, l in self.entries)
        return f"{d}.{self.arity}:[{body}]"

    def __str__(self) -> str:
        return "[" + ",".join(f"{b}:{l}" for b, l in self.entries) + "]"


def parse_edge(text: str) -> Tuple[int, Edge]:
    """Leer "d.k:[i:l,…]" devolviendo (d, arista)."""
    match = _EDGE_PATTERN.match(text)
    if not match:
        raise InvalidParameterError(f"Arista inválida: {text!r}")

    d, k = int(match.group(1)), int(match.group(2))
    body = match.group(3).strip()
    try:
        entries = [tuple(int(v) for v in item.split(":")) for item in body.split(",")] if body else []
    except ValueError as e:
        raise InvalidParameterError(f"Arista inválida: {text!r}") from e

    edge = Edge(tuple((b, l) for b, l in entries))
    if edge.arity != k or any(b > d for b, _ in edge.entries):
        raise InvalidParameterError(f"La arista {text!r} no es compatible con d={d}, k={k}")
    return d, edge


def base_edges(d: int, k: int) -> List[BaseEdge]:
    """𝓗_{d,k} en orden lexicográfico (k=0 da la arista vacía)."""
    return [BaseEdge(blocks) for blocks in combinations(range(1, d + 1), k)]


def fiber(spec: BundleSpec, base_edge: BaseEdge) -> List[Edge]:
    """Aristas de 𝓗_{d,k}^{n̄} que proyectan sobre e′."""
    labels = [range(1, spec.n[b - 1] + 1) for b in base_edge.blocks]
    return [Edge(tuple(zip(base_edge.blocks, choice))) for choice in product(*labels)]


def enumerate_bundle(spec: BundleSpec) -> List[Edge]:
    """Todas las aristas con |e| = |π(e)| = k, en orden lexicográfico."""
    edges = [edge for base in base_edges(spec.d, spec.k) for edge in fiber(spec, base)]
    return sorted(edges)


def bundle_by_base(spec: BundleSpec) -> Dict[BaseEdge, List[Edge]]:
    """Agrupar las aristas del haz por su proyección."""
    return {base: fiber(spec, base) for base in base_edges(spec.d, spec.k)}


def boundary(base_edge: BaseEdge) -> List[BaseEdge]:
    """∂e′: los k subconjuntos de tamaño k−1, en orden lexicográfico."""
    if base_edge.arity < 1:
        raise InvalidParameterError("El borde requiere una arista no vacía")
    return [BaseEdge(blocks) for blocks in combinations(base_edge.blocks, base_edge.arity - 1)]


def remove_entry(edge: Edge, block: int) -> Edge:
    """p(e): eliminar la entrada del bloque j."""
    if block not in edge.projection().blocks:
        raise InvalidParameterError(f"El bloque {block} no aparece en {edge}")
    return Edge(tuple(entry for entry in edge.entries if entry[0] != block))
