"""
Formas multilineales de conteo 𝒩_t̲ y ℳ sobre F_q^{2d}, normas caja de Gowers
y las desigualdades de Gowers–Cauchy–Schwarz y von Neumann generalizada.

Cada bloque Vⱼ ≅ F_q². Un punto x̲ ∈ V^{n̄} asigna un punto x_{jl} ∈ F_q² a cada
par (bloque j, etiqueta l); internamente cada x_{jl} es un único índice de
tamaño q² (coordenadas aplanadas en orden row-major).
"""

from __future__ import annotations

import math
import string
from dataclasses import dataclass
from typing import Dict, List, NamedTuple, Optional, Sequence, Tuple

import numpy as np

from src.core.ff_core import FieldFunction, PrimeField, SphereFunction, dft, make_sphere
from src.core.hypergraph import BaseEdge, BundleSpec, Edge, enumerate_bundle
from src.core.kernels import block_sum
from src.utils.errors import InvalidParameterError, NumericalInvariantError
from src.utils.logging import get_logger

logger = get_logger(__name__)

BLOCK_DIM = 2
_BOUND_TOLERANCE = 1e-12
_LETTERS = string.ascii_letters


@dataclass(frozen=True)
class ConfigurationSpace:
    """Espacio V = V₁×…×V_d con longitudes cuadradas prescritas t̲ ∈ (F_q^*)^d."""

    q: int
    d: int
    t: Tuple[int, ...]

    def __post_init__(self) -> None:
        field = PrimeField(self.q)
        if len(self.t) != self.d:
            raise InvalidParameterError(f"t̲ debe tener {self.d} entradas, tiene {len(self.t)}")
        object.__setattr__(self, "t", tuple(field.require_nonzero(t) for t in self.t))

    @property
    def block_dims(self) -> Tuple[int, ...]:
        return (BLOCK_DIM,) * self.d

    def spheres(self) -> List[SphereFunction]:
        return [make_sphere(self.q, t) for t in self.t]


@dataclass(frozen=True, eq=False)
class EdgeFunctionFamily:
    """Familia f_e: V_{π(e)} → [-1, 1] indexada por las aristas del haz."""

    spec: BundleSpec
    q: int
    functions: Dict[Edge, FieldFunction]

    def __post_init__(self) -> None:
        edges = enumerate_bundle(self.spec)
        if set(self.functions) != set(edges):
            raise InvalidParameterError("La familia no cubre exactamente las aristas del haz")

        for edge in edges:
            f = self.functions[edge]
            if f.q != self.q or f.m != BLOCK_DIM * edge.arity:
                raise InvalidParameterError(
                    f"f_{edge} tiene (q={f.q}, m={f.m}); se esperaba "
                    f"(q={self.q}, m={BLOCK_DIM * edge.arity})"
                )
            if not f.is_real:
                raise InvalidParameterError(f"f_{edge} debe ser real")
            if f.sup_norm() > 1.0 + _BOUND_TOLERANCE:
                raise InvalidParameterError(f"f_{edge} no está acotada por 1")

        object.__setattr__(self, "functions", {edge: self.functions[edge] for edge in edges})

    @property
    def edges(self) -> List[Edge]:
        return list(self.functions)

    def __getitem__(self, edge: Edge) -> FieldFunction:
        return self.functions[edge]


# Constructores de familias

def uniform_family(spec: BundleSpec, f: FieldFunction) -> EdgeFunctionFamily:
    """La misma función f sobre V_{π(e)} para todas las aristas."""
    return EdgeFunctionFamily(spec=spec, q=f.q, functions={e: f for e in enumerate_bundle(spec)})


def constant_family(spec: BundleSpec, q: int, value: float = 1.0) -> EdgeFunctionFamily:
    return uniform_family(spec, FieldFunction.constant(q, BLOCK_DIM * spec.k, value))


def indicator_family(spec: BundleSpec, q: int, mask: np.ndarray) -> EdgeFunctionFamily:
    """f_e = 1_S para todas las aristas, con S ⊆ F_q^{2k} dado como máscara."""
    return uniform_family(spec, FieldFunction.indicator(q, mask))


def random_family(
    spec: BundleSpec, q: int, rng: np.random.Generator, kind: str = "signs"
) -> EdgeFunctionFamily:
    """Familia aleatoria de signos ±1 o de valores uniformes en [-1, 1]."""
    m = BLOCK_DIM * spec.k
    functions: Dict[Edge, FieldFunction] = {}
    for edge in enumerate_bundle(spec):
        if kind == "signs":
            functions[edge] = FieldFunction.random_signs(q, m, rng)
        elif kind == "uniform":
            functions[edge] = FieldFunction.random_uniform(q, m, rng)
        else:
            raise InvalidParameterError(f"Tipo de familia desconocido: {kind}")
    return EdgeFunctionFamily(spec=spec, q=q, functions=functions)


# Red tensorial de las formas

def point_tensor(f: FieldFunction) -> np.ndarray:
    """Reordenar una tabla sobre (F_q²)^k como tensor (q²,)*k indexado por puntos."""
    if f.m % BLOCK_DIM:
        raise InvalidParameterError(f"La dimensión {f.m} no es múltiplo de {BLOCK_DIM}")
    return f.values.reshape((f.q**BLOCK_DIM,) * (f.m // BLOCK_DIM))


def _variables(spec: BundleSpec) -> List[Tuple[int, int]]:
    return [(block, label) for block in range(1, spec.d + 1) for label in range(1, spec.n[block - 1] + 1)]


def _network(
    fam: EdgeFunctionFamily, space: Optional[ConfigurationSpace]
) -> Tuple[List[str], List[np.ndarray], int]:
    variables = _variables(fam.spec)
    if len(variables) > len(_LETTERS):
        raise InvalidParameterError("Demasiadas variables para la contracción")
    letter = {var: _LETTERS[i] for i, var in enumerate(variables)}

    subscripts: List[str] = []
    operands: List[np.ndarray] = []
    for edge in fam.edges:
        subscripts.append("".join(letter[entry] for entry in edge.entries))
        operands.append(point_tensor(fam[edge]))

    if space is not None:
        for block, sphere in enumerate(space.spheres(), start=1):
            # σ_{tⱼ}(x_{j2} − x_{j1})
            subscripts.append(letter[(block, 1)] + letter[(block, 2)])
            operands.append(sphere.matrix())

    return subscripts, operands, len(variables)


def _contract(subscripts: List[str], operands: List[np.ndarray], n_vars: int, size: int) -> float:
    expression = ",".join(subscripts) + "->"
    total = np.einsum(expression, *operands, optimize=True)
    return float(total) / float(size) ** n_vars


def _direct_sum(
    subscripts: List[str],
    operands: List[np.ndarray],
    n_vars: int,
    size: int,
    threads: Optional[int] = None,
) -> float:
    """Suma directa sobre la malla completa, por bloques de la primera variable."""
    letters = _LETTERS[:n_vars]
    first = letters[0]

    def chunk(value: int) -> float:
        product = np.ones((size,) * (n_vars - 1))
        for sub, operand in zip(subscripts, operands):
            if sub.startswith(first):
                operand = operand[value]
                sub = sub[1:]
            shape = [size if letter in sub else 1 for letter in letters[1:]]
            product = product * operand.reshape(shape)
        return float(product.sum())

    return block_sum(chunk, range(size), threads) / float(size) ** n_vars


def _check_space(space: ConfigurationSpace, fam: EdgeFunctionFamily) -> None:
    if space.q != fam.q or space.d != fam.spec.d:
        raise InvalidParameterError(
            f"Dimensiones incompatibles: espacio (q={space.q}, d={space.d}), "
            f"familia (q={fam.q}, d={fam.spec.d})"
        )
    if not fam.spec.is_rectangular:
        raise InvalidParameterError("𝒩_t̲ requiere n̄ = (2,…,2)")


def eval_N(
    space: ConfigurationSpace,
    fam: EdgeFunctionFamily,
    method: str = "einsum",
    threads: Optional[int] = None,
) -> float:
    """𝒩_t̲(f_e) = 𝔼_{x̲∈V²} Π_e f_e(x̲_e) Π_j σ_{tⱼ}(x_{j2} − x_{j1})."""
    _check_space(space, fam)

    if method == "fft":
        if fam.spec.d != 1:
            raise InvalidParameterError("El camino FFT solo aplica a d=1")
        first, second = fam.edges
        return fourier_count_d1(space.q, space.t[0], fam[first], fam[second])

    subscripts, operands, n_vars = _network(fam, space)
    size = space.q**BLOCK_DIM
    if method == "einsum":
        return _contract(subscripts, operands, n_vars, size)
    if method == "direct":
        return _direct_sum(subscripts, operands, n_vars, size, threads)
    raise InvalidParameterError(f"Método desconocido: {method}")


def eval_M(fam: EdgeFunctionFamily, method: str = "einsum", threads: Optional[int] = None) -> float:
    """ℳ(f_e) = 𝔼_{x̲∈V^{n̄}} Π_e f_e(x̲_e)."""
    subscripts, operands, n_vars = _network(fam, None)
    size = fam.q**BLOCK_DIM
    if method == "einsum":
        return _contract(subscripts, operands, n_vars, size)
    if method == "direct":
        return _direct_sum(subscripts, operands, n_vars, size, threads)
    raise InvalidParameterError(f"Método desconocido: {method}")


def fourier_count_d1(q: int, t: int, f1: FieldFunction, f2: FieldFunction) -> float:
    """
    Σ_ξ f̂₁(ξ) conj(f̂₂(ξ)) σ̂_t(ξ).

    Con la convención de `dft` esto es exactamente 𝔼 f₁(x₁) f₂(x₂) σ_t(x₂ − x₁).
    """
    for f in (f1, f2):
        if f.q != q or f.m != BLOCK_DIM:
            raise InvalidParameterError("fourier_count_d1 requiere funciones sobre F_q²")

    sphere_hat = dft(make_sphere(q, t).table).values
    total = np.sum(dft(f1).values * np.conj(dft(f2).values) * sphere_hat)
    return float(total.real)


# Normas caja

def box_average(table: np.ndarray) -> float:
    """𝔼_{x̲⁰,x̲¹} Π_{ω∈{0,1}^k} F(x̲^ω) para un tensor real F de k ejes."""
    k = table.ndim
    if k == 0:
        return float(table)

    subscripts = []
    for omega in range(2**k):
        subscripts.append("".join(_LETTERS[2 * axis + ((omega >> axis) & 1)] for axis in range(k)))

    expression = ",".join(subscripts) + "->"
    total = np.einsum(expression, *([table] * 2**k), optimize=True)
    return float(total) / float(np.prod(table.shape)) ** 2


def box_norm(f: FieldFunction, base_edge: BaseEdge) -> float:
    """‖f‖_□ sobre V_{e′}: raíz 2^k-ésima del promedio caja."""
    k = base_edge.arity
    if f.m != BLOCK_DIM * k:
        raise InvalidParameterError(f"f tiene dimensión {f.m}, e′={base_edge} requiere {BLOCK_DIM * k}")
    if not f.is_real:
        raise InvalidParameterError("La norma caja se define para funciones reales")

    average = box_average(point_tensor(f))
    if average < -1e-9:
        raise NumericalInvariantError(f"Promedio caja negativo: {average:.3e}")
    return max(average, 0.0) ** (1.0 / 2**k)


class CauchySchwarzCheck(NamedTuple):
    lhs: float
    rhs: float
    holds: bool


def gowers_cs_check(fam: EdgeFunctionFamily) -> CauchySchwarzCheck:
    """|ℳ(f_e)| ≤ min_e ‖f_e‖_□."""
    lhs = abs(eval_M(fam))
    rhs = min(box_norm(fam[edge], edge.projection()) for edge in fam.edges)
    return CauchySchwarzCheck(lhs=lhs, rhs=rhs, holds=lhs <= rhs + 1e-9)


class VonNeumannCheck(NamedTuple):
    count: float
    min_box: float
    excess: float


def von_neumann_check(space: ConfigurationSpace, fam: EdgeFunctionFamily) -> VonNeumannCheck:
    """|𝒩_t̲(f_e)| frente a min_e ‖f_e‖_□; el exceso·√q estima C₁."""
    count = abs(eval_N(space, fam))
    min_box = min(box_norm(fam[edge], edge.projection()) for edge in fam.edges)
    return VonNeumannCheck(count=count, min_box=min_box, excess=count - min_box)


class CountingGap(NamedTuple):
    N: float
    M: float
    gap: float
    lower_bound: float
    box_min: float


def counting_gap(
    space: ConfigurationSpace,
    subset: np.ndarray,
    method: str = "einsum",
    threads: Optional[int] = None,
) -> CountingGap:
    """Comparar 𝒩_t̲(1_S) con ℳ(1_S) y con la cota (|S|/q^{2d})^{2^d}."""
    expected_shape = (space.q,) * (BLOCK_DIM * space.d)
    subset = np.asarray(subset, dtype=bool)
    if subset.shape != expected_shape:
        raise InvalidParameterError(f"S debe tener forma {expected_shape}, tiene {subset.shape}")

    spec = BundleSpec.rectangles(space.d)
    fam = indicator_family(spec, space.q, subset)
    density = float(subset.mean())

    n_value = eval_N(space, fam, method, threads)
    m_value = eval_M(fam, method, threads)
    lower_bound = density ** (2**space.d)

    if m_value < lower_bound - _BOUND_TOLERANCE:
        logger.error(f"ℳ={m_value:.6e} por debajo de la cota {lower_bound:.6e}")
        raise NumericalInvariantError("ℳ(1_S) viola la cota inferior incondicional")

    box_min = box_norm(fam[fam.edges[0]], BaseEdge(tuple(range(1, space.d + 1))))
    return CountingGap(
        N=n_value,
        M=m_value,
        gap=abs(n_value - m_value),
        lower_bound=lower_bound,
        box_min=box_min,
    )


def scaled_constant(values: Sequence[float], q_values: Sequence[int]) -> float:
    """max_i values[i]·√q_i, la constante empírica registrada en los barridos."""
    return max(v * math.sqrt(q) for v, q in zip(values, q_values)) if values else 0.0
