"""
σ-álgebras como particiones, esperanza condicional, energía y el algoritmo
de incremento de energía de la regularidad débil de hipergrafos.

Una partición vive sobre V_{𝔣′} con 𝔣′ ∈ 𝓗_{d,k−1}; la esperanza condicional de
f_e se toma respecto del join de las particiones de ∂π(e), cuyos átomos son
A = ⋂_{𝔣′∈∂e′} A_{𝔣′}.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Tuple

import numpy as np

from src.core.ff_core import FieldFunction
from src.core.forms import BLOCK_DIM, EdgeFunctionFamily, box_norm, point_tensor
from src.core.hypergraph import BaseEdge, BundleSpec, Edge, base_edges, boundary
from src.utils.errors import InvalidParameterError, NumericalInvariantError
from src.utils.logging import LoggerMixin, get_logger

logger = get_logger(__name__)

_LETTERS = "abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ"
_MAX_ASCENT_ROUNDS = 10


def _ground_shape(q: int, base_edge: BaseEdge) -> Tuple[int, ...]:
    return (q,) * (BLOCK_DIM * base_edge.arity)


@dataclass(frozen=True, eq=False)
class Partition:
    """Partición de V_{𝔣′} en átomos etiquetados 0..A−1, con sus conjuntos generadores."""

    q: int
    base_edge: BaseEdge
    labels: np.ndarray
    generators: Tuple[np.ndarray, ...] = ()

    def __post_init__(self) -> None:
        shape = _ground_shape(self.q, self.base_edge)
        if self.labels.shape != shape:
            raise InvalidParameterError(f"Etiquetas con forma {self.labels.shape}, se esperaba {shape}")
        present = np.unique(self.labels)
        if present.size and (present[0] != 0 or present[-1] != present.size - 1):
            raise InvalidParameterError("Las etiquetas de átomos deben ser contiguas")
        if present.size > 2 ** len(self.generators):
            raise InvalidParameterError("Más átomos que 2^(número de generadores)")

    @classmethod
    def trivial(cls, q: int, base_edge: BaseEdge) -> Partition:
        return cls(q=q, base_edge=base_edge, labels=np.zeros(_ground_shape(q, base_edge), dtype=np.int64))

    @classmethod
    def from_generators(cls, q: int, base_edge: BaseEdge, generators: List[np.ndarray]) -> Partition:
        partition = cls.trivial(q, base_edge)
        for mask in generators:
            partition = partition.refine(mask)
        return partition

    @classmethod
    def discrete(cls, q: int, base_edge: BaseEdge) -> Partition:
        """Partición en puntos, generada por los planos de bits del índice del punto."""
        shape = _ground_shape(q, base_edge)
        index = np.arange(int(np.prod(shape, dtype=np.int64))).reshape(shape)
        bits = max(1, int(index.size - 1).bit_length())
        return cls.from_generators(q, base_edge, [((index >> b) & 1).astype(bool) for b in range(bits)])

    @property
    def atom_count(self) -> int:
        return int(self.labels.max()) + 1 if self.labels.size else 1

    @property
    def generator_count(self) -> int:
        return len(self.generators)

    def refine(self, mask: np.ndarray) -> Partition:
        """Añadir un conjunto generador; los átomos se parten por pertenencia al conjunto."""
        mask = np.asarray(mask, dtype=bool)
        if mask.shape != self.labels.shape:
            raise InvalidParameterError(f"Máscara con forma {mask.shape}, se esperaba {self.labels.shape}")

        combined = self.labels * 2 + mask.astype(np.int64)
        _, relabeled = np.unique(combined.reshape(-1), return_inverse=True)
        return Partition(
            q=self.q,
            base_edge=self.base_edge,
            labels=relabeled.reshape(self.labels.shape).astype(np.int64),
            generators=self.generators + (mask.copy(),),
        )

    def is_refined_by(self, other: Partition) -> bool:
        """True si cada átomo de `other` está contenido en un átomo de esta partición."""
        pairs = np.unique(np.stack([other.labels.reshape(-1), self.labels.reshape(-1)]), axis=1)
        return np.unique(pairs[0]).size == pairs.shape[1]


def _pullback(partition: Partition, target: BaseEdge) -> np.ndarray:
    """Extender las etiquetas de V_{𝔣′} a V_{e′} (constantes en los bloques ausentes)."""
    q = partition.q
    shape: List[int] = []
    for block in target.blocks:
        size = q if block in partition.base_edge.blocks else 1
        shape.extend([size] * BLOCK_DIM)
    return np.broadcast_to(partition.labels.reshape(shape), _ground_shape(q, target))


@dataclass(frozen=True, eq=False)
class PartitionSystem:
    """Una partición por cada arista de borde 𝔣′ ∈ 𝓗_{d,k−1}."""

    spec: BundleSpec
    q: int
    parts: Dict[BaseEdge, Partition]

    def __post_init__(self) -> None:
        expected = base_edges(self.spec.d, self.spec.k - 1)
        if set(self.parts) != set(expected):
            raise InvalidParameterError("El sistema debe tener una partición por cada 𝔣′ ∈ 𝓗_{d,k−1}")

    @classmethod
    def trivial(cls, spec: BundleSpec, q: int) -> PartitionSystem:
        return cls(
            spec=spec,
            q=q,
            parts={edge: Partition.trivial(q, edge) for edge in base_edges(spec.d, spec.k - 1)},
        )

    def with_part(self, partition: Partition) -> PartitionSystem:
        parts = dict(self.parts)
        parts[partition.base_edge] = partition
        return PartitionSystem(spec=self.spec, q=self.q, parts=parts)

    def join_labels(self, base_edge: BaseEdge) -> np.ndarray:
        """Etiquetas contiguas de los átomos del join ⋁_{𝔣′∈∂e′} 𝓑_{𝔣′} sobre V_{e′}."""
        joint = np.zeros(_ground_shape(self.q, base_edge), dtype=np.int64)
        for face in boundary(base_edge):
            partition = self.parts[face]
            joint = joint * partition.atom_count + _pullback(partition, base_edge)
            # Recomprimir para que el código mixto no desborde
            _, inverse = np.unique(joint.reshape(-1), return_inverse=True)
            joint = inverse.reshape(joint.shape).astype(np.int64)
        return joint

    def complexities(self) -> Dict[str, int]:
        return {str(edge): part.generator_count for edge, part in self.parts.items()}

    def refined(self, witness: Witness) -> PartitionSystem:
        """Añadir cada B_j del testigo a la partición de e′∖{j}; se omiten conjuntos triviales."""
        system = self
        for block, mask in witness.sets.items():
            face = witness.base_edge.without(block)
            if mask.all() or not mask.any():
                continue
            system = system.with_part(system.parts[face].refine(mask))
        return system


def _check_function(f: FieldFunction, base_edge: BaseEdge) -> None:
    if f.m != BLOCK_DIM * base_edge.arity or not f.is_real:
        raise InvalidParameterError(
            f"f debe ser real sobre V_{base_edge} (m={BLOCK_DIM * base_edge.arity}), tiene m={f.m}"
        )


def cond_exp(f: FieldFunction, system: PartitionSystem, base_edge: BaseEdge) -> FieldFunction:
    """𝔼(f | ⋁_{𝔣′∈∂e′} 𝓑_{𝔣′}): constante en cada átomo e igual a la media de f allí."""
    _check_function(f, base_edge)
    ids = system.join_labels(base_edge).reshape(-1)
    sums = np.bincount(ids, weights=f.values.reshape(-1))
    counts = np.bincount(ids)
    means = sums / counts
    return FieldFunction(q=f.q, m=f.m, values=means[ids].reshape(f.values.shape))


def energy(f: FieldFunction, system: PartitionSystem, base_edge: BaseEdge) -> float:
    """𝓔(f, 𝓑) = ‖𝔼(f|𝓑)‖₂²."""
    return cond_exp(f, system, base_edge).mean_square()


def total_energy(fam: EdgeFunctionFamily, system: PartitionSystem) -> float:
    return sum(energy(fam[edge], system, edge.projection()) for edge in fam.edges)


# Búsqueda de testigos

@dataclass(frozen=True, eq=False)
class Witness:
    """Conjuntos B_j ⊆ V_{e′∖{j}} (j ∈ e′) con su correlación ⟨g, Π 1_{B_j}⟩."""

    base_edge: BaseEdge
    sets: Dict[int, np.ndarray]
    correlation: float
    threshold: float

    @property
    def reaches_threshold(self) -> bool:
        return abs(self.correlation) >= self.threshold


def witness_threshold(k: int, eps: float) -> float:
    """2^{-k} ε^{2^k}."""
    return 2.0 ** (-k) * eps ** (2**k)


def _co_slice_table(table: np.ndarray) -> np.ndarray:
    """inner(x̲′) = 𝔼_{x̲⁰} Π_ω g(x̲^ω) con x̲¹ = x̲′ fijo."""
    k = table.ndim
    subscripts = []
    for omega in range(2**k):
        subscripts.append("".join(_LETTERS[2 * axis + ((omega >> axis) & 1)] for axis in range(k)))
    output = "".join(_LETTERS[2 * axis + 1] for axis in range(k))
    inner = np.einsum(",".join(subscripts) + "->" + output, *([table] * 2**k), optimize=True)
    return inner / float(np.prod(table.shape))


def _partial_products(table: np.ndarray, co_slice: Tuple[int, ...]) -> List[np.ndarray]:
    """h_j(x̲⁰ sin j) = Π_{ω≠0, j(ω)=j} g(x̲^ω), con j(ω) el menor eje donde ω vale 1."""
    k = table.ndim
    size = table.shape[0]
    partials = [np.ones((size,) * (k - 1)) for _ in range(k)]

    for omega in range(1, 2**k):
        owner = (omega & -omega).bit_length() - 1
        index = tuple(co_slice[axis] if (omega >> axis) & 1 else slice(None) for axis in range(k))
        values = table[index]
        shape = [size if not (omega >> axis) & 1 else 1 for axis in range(k) if axis != owner]
        partials[owner] = partials[owner] * values.reshape(shape)

    return partials


def _level_sets(h: np.ndarray) -> np.ndarray:
    """Conjuntos de supernivel {h ≥ v} y subnivel {h ≤ v} para cada valor alcanzado (sin repetir)."""
    flat = h.reshape(-1)
    candidates: Dict[bytes, np.ndarray] = {}
    for value in np.unique(flat):
        for mask in (flat >= value, flat <= value):
            candidates.setdefault(np.packbits(mask).tobytes(), mask)
    return np.array(list(candidates.values()), dtype=np.float64)


def _correlation(table: np.ndarray, sets: List[np.ndarray]) -> float:
    """𝔼_x g(x) Π_j 1_{B_j}(x sin j)."""
    k = table.ndim
    size = table.shape[0]
    product = table
    for axis, mask in enumerate(sets):
        shape = [size if other != axis else 1 for other in range(k)]
        product = product * mask.reshape(shape)
    return float(product.mean())


def _best_response(table: np.ndarray, sets: List[np.ndarray], axis: int, sign: float) -> np.ndarray:
    """Mejor B_j dados los demás: {sign·W_j > 0} con W_j = Σ_{x_j} g·Π_{i≠j} 1_{B_i}."""
    k = table.ndim
    size = table.shape[0]
    product = table
    for other, mask in enumerate(sets):
        if other == axis:
            continue
        shape = [size if i != other else 1 for i in range(k)]
        product = product * mask.reshape(shape)
    weights = product.sum(axis=axis)
    return (sign * weights > 0).astype(np.float64)


def _polish(table: np.ndarray, sets: List[np.ndarray], correlation: float) -> Tuple[List[np.ndarray], float]:
    for _ in range(_MAX_ASCENT_ROUNDS):
        improved = False
        for axis in range(table.ndim):
            sign = 1.0 if correlation >= 0 else -1.0
            candidate = list(sets)
            candidate[axis] = _best_response(table, sets, axis, sign)
            value = _correlation(table, candidate)
            if abs(value) > abs(correlation) + 1e-15:
                sets, correlation, improved = candidate, value, True
        if not improved:
            break
    return sets, correlation


def _scan_pairs(table: np.ndarray, first: np.ndarray, second: np.ndarray) -> Tuple[int, int, float]:
    """Barrido exhaustivo k=2: corr[c2, c1] = B₂ᵀ G B₁ / N²."""
    correlations = second @ table @ first.T / float(table.size)
    flat = int(np.argmax(np.abs(correlations)))
    row, col = np.unravel_index(flat, correlations.shape)
    return int(col), int(row), float(correlations[row, col])


def _scan_ascent(table: np.ndarray, candidates: List[np.ndarray]) -> Tuple[List[np.ndarray], float]:
    """k ≥ 3: ascenso por coordenadas sobre las listas de conjuntos de nivel."""
    size = table.shape[0]
    sets = [np.ones((size,) * (table.ndim - 1)) for _ in range(table.ndim)]
    correlation = _correlation(table, sets)

    for _ in range(_MAX_ASCENT_ROUNDS):
        improved = False
        for axis, options in enumerate(candidates):
            for option in options:
                trial = list(sets)
                trial[axis] = option.reshape(sets[axis].shape)
                value = _correlation(table, trial)
                if abs(value) > abs(correlation) + 1e-15:
                    sets, correlation, improved = trial, value, True
        if not improved:
            break
    return sets, correlation


def best_witness(g: FieldFunction, base_edge: BaseEdge, eps: float) -> Optional[Witness]:
    """
    Mejor testigo encontrado, alcance o no el umbral.

    1. Se fija la co-fibra x̲′ que maximiza |𝔼_{x̲⁰} Π_ω g(x̲^ω)| (desempate lexicográfico).
    2. Para cada j se barren los conjuntos de nivel de h_{j,x̲′}.
    3. Se mejora el resultado con respuestas óptimas por coordenada.
    """
    _check_function(g, base_edge)
    k = base_edge.arity
    threshold = witness_threshold(k, eps)
    table = point_tensor(g)
    if not np.any(table):
        return None

    size = table.shape[0]
    inner = _co_slice_table(table)
    co_slice = tuple(int(i) for i in np.unravel_index(int(np.argmax(np.abs(inner))), inner.shape))
    partials = _partial_products(table, co_slice)
    candidates = [_level_sets(h) for h in partials]

    if k == 1:
        sets = [np.ones(())]
        correlation = _correlation(table, sets)
    elif k == 2:
        first, second, correlation = _scan_pairs(table, candidates[0], candidates[1])
        sets = [candidates[0][first], candidates[1][second]]
        sets, correlation = _polish(table, sets, correlation)
    else:
        sets, correlation = _scan_ascent(table, candidates)
        sets, correlation = _polish(table, sets, correlation)

    logger.debug(f"Testigo en {base_edge}: co-fibra={co_slice} correlación={correlation:.6f}")

    coordinate_shape = (g.q,) * (BLOCK_DIM * (k - 1))
    masks = {
        block: np.asarray(sets[axis], dtype=bool).reshape(coordinate_shape)
        for axis, block in enumerate(base_edge.blocks)
    }
    return Witness(base_edge=base_edge, sets=masks, correlation=correlation, threshold=threshold)


def witness_search(g: FieldFunction, base_edge: BaseEdge, eps: float) -> Optional[Witness]:
    """Testigo con |⟨g, Π 1_{B_j}⟩| ≥ 2^{-k} ε^{2^k}, o None si ningún candidato llega."""
    if g.sup_norm() > 2.0 + 1e-12:
        raise InvalidParameterError("witness_search requiere ‖g‖_∞ ≤ 2")
    witness = best_witness(g, base_edge, eps)
    if witness is None or not witness.reaches_threshold:
        return None
    return witness


# Algoritmo de regularidad débil

@dataclass(frozen=True)
class RegularityStep:
    iteration: int
    edge: str
    correlation: float
    energy_before: float
    energy_after: float

    @property
    def gain(self) -> float:
        return self.energy_after - self.energy_before


@dataclass
class RegularityResult:
    """Sistema final, número de iteraciones y traza de energía."""

    system: PartitionSystem
    iterations: int
    eps: float
    cap: int
    final_box_norms: Dict[Edge, float]
    energy_trace: List[float] = field(default_factory=list)
    steps: List[RegularityStep] = field(default_factory=list)

    def to_dict(self, d: int) -> Dict[str, Any]:
        return {
            "iterations": self.iterations,
            "eps": self.eps,
            "iteration_cap": self.cap,
            "final_box_norms": {edge.to_text(d): norm for edge, norm in self.final_box_norms.items()},
            "complexities": self.system.complexities(),
            "energy_trace": self.energy_trace,
            "steps": [
                {
                    "iteration": step.iteration,
                    "edge": step.edge,
                    "correlation": step.correlation,
                    "gain": step.gain,
                }
                for step in self.steps
            ],
        }


def iteration_cap(edge_count: int, k: int, eps: float) -> int:
    """⌈|𝓗| · 2^{2k} · ε^{-2^{k+1}}⌉ + 1."""
    return math.ceil(edge_count * 2.0 ** (2 * k) * eps ** (-(2 ** (k + 1)))) + 1


class WeakRegularizer(LoggerMixin):
    """Incremento de energía: refinar con testigos hasta que todo residuo tenga norma caja ≤ ε."""

    def __init__(self, fam: EdgeFunctionFamily, eps: float):
        if eps <= 0:
            raise InvalidParameterError(f"ε debe ser positivo, recibido {eps}")
        if eps > 1:
            self.logger.warning(f"ε={eps} > 1; se usa ε=1")
            eps = 1.0
        self.fam = fam
        self.eps = float(eps)
        self.k = fam.spec.k
        self.cap = iteration_cap(len(fam.edges), self.k, self.eps)

    def residual_norms(self, system: PartitionSystem) -> Dict[Edge, float]:
        norms = {}
        for edge in self.fam.edges:
            base = edge.projection()
            f = self.fam[edge]
            norms[edge] = box_norm(f - cond_exp(f, system, base), base)
        return norms

    def run(self) -> RegularityResult:
        system = PartitionSystem.trivial(self.fam.spec, self.fam.q)
        current = total_energy(self.fam, system)
        trace = [current]
        steps: List[RegularityStep] = []
        min_gain = witness_threshold(self.k, self.eps) ** 2

        iterations = 0
        while True:
            norms = self.residual_norms(system)
            worst = max(self.fam.edges, key=lambda edge: norms[edge])
            if norms[worst] <= self.eps:
                break
            if iterations >= self.cap:
                raise NumericalInvariantError(f"Se superó el tope de {self.cap} iteraciones")

            base = worst.projection()
            f = self.fam[worst]
            # Con residuo > ε siempre existe un testigo que alcanza el umbral
            witness = witness_search(f - cond_exp(f, system, base), base, self.eps)
            if witness is None:
                raise NumericalInvariantError(
                    f"Sin testigo sobre el umbral {witness_threshold(self.k, self.eps):.3e} "
                    f"para {worst} con residuo {norms[worst]:.4f}"
                )

            system = system.refined(witness)
            updated = total_energy(self.fam, system)
            iterations += 1

            if updated - current < min_gain - 1e-12:
                raise NumericalInvariantError(
                    f"Incremento de energía {updated - current:.3e} menor que {min_gain:.3e}"
                )

            steps.append(RegularityStep(
                iteration=iterations,
                edge=str(worst),
                correlation=witness.correlation,
                energy_before=current,
                energy_after=updated,
            ))
            self.logger.debug(
                f"Iteración {iterations}: arista {worst} residuo={norms[worst]:.4f} "
                f"energía {current:.6f} → {updated:.6f}"
            )
            current = updated
            trace.append(current)

        self.logger.info(f"Regularidad débil: {iterations} iteraciones, ε={self.eps}")
        return RegularityResult(
            system=system,
            iterations=iterations,
            eps=self.eps,
            cap=self.cap,
            final_box_norms=norms,
            energy_trace=trace,
            steps=steps,
        )


def weak_regularize(fam: EdgeFunctionFamily, eps: float) -> RegularityResult:
    """Sistema de particiones con ‖f_e − 𝔼(f_e|⋁𝓑_{𝔣′})‖_□ ≤ ε para toda arista."""
    return WeakRegularizer(fam, eps).run()
