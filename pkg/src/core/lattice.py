"""
Símplices en la red entera ℤⁿ.

Restricciones de Gram, enumeración de copias isométricas, medidas de conteo
normalizadas, formas de conteo sobre cubos, normas U¹_{q,L}, descomposiciones
en rejillas, q_ε, pruebas de ε-uniformidad e incremento de densidad.

λ se transporta siempre como λ² (entero) y toda la aritmética de Gram es exacta.
Las lecturas fuera de la ventana valen 0; el déficit de borde se mide y se informa.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from pathlib import Path
from typing import Any, Dict, List, NamedTuple, Optional, Sequence, Tuple

import numpy as np
import pandas as pd

from src.config.settings import get_settings
from src.core.kernels import block_sum, ordered_map
from src.utils.errors import (
    CapExceededError,
    InvalidParameterError,
    NoCopiesError,
    NumericalInvariantError,
)
from src.utils.logging import LoggerMixin, get_logger

logger = get_logger(__name__)

Point = Tuple[int, ...]
Copy = Tuple[Point, ...]


# Símplices

def _is_positive_definite(matrix: Sequence[Sequence[int]]) -> bool:
    """Eliminación gaussiana exacta: todos los pivotes deben ser positivos."""
    rows = [[Fraction(v) for v in row] for row in matrix]
    size = len(rows)
    for i in range(size):
        if rows[i][i] <= 0:
            return False
        for r in range(i + 1, size):
            factor = rows[r][i] / rows[i][i]
            for c in range(i, size):
                rows[r][c] -= factor * rows[i][c]
    return True


@dataclass(frozen=True)
class SimplexSpec:
    """Símplice no degenerado v₁ = 0, v₂, …, v_k ∈ ℤⁿ."""

    n: int
    points: Tuple[Point, ...]

    def __post_init__(self) -> None:
        points = tuple(tuple(int(c) for c in p) for p in self.points)
        object.__setattr__(self, "points", points)

        if self.n < 1:
            raise InvalidParameterError(f"n debe ser >= 1, recibido {self.n}")
        if len(points) < 2:
            raise InvalidParameterError("Un símplice necesita al menos 2 puntos")
        if any(len(p) != self.n for p in points):
            raise InvalidParameterError(f"Todos los puntos deben estar en ℤ^{self.n}")
        if any(points[0]):
            raise InvalidParameterError("El primer punto debe ser el origen")
        if not _is_positive_definite(self.gram):
            raise InvalidParameterError("Símplice degenerado: la matriz de Gram no es definida positiva")

    @classmethod
    def segment(cls, n: int, vector: Optional[Point] = None) -> SimplexSpec:
        """Segmento {0, v₂}; por defecto v₂ = e₁."""
        v = vector if vector is not None else (1,) + (0,) * (n - 1)
        return cls(n=n, points=((0,) * n, tuple(v)))

    @classmethod
    def orthonormal(cls, n: int, k: int = 3) -> SimplexSpec:
        """{0, e₁, …, e_{k−1}}: para k=3 el triángulo rectángulo isósceles unitario."""
        if k - 1 > n:
            raise InvalidParameterError(f"No caben {k - 1} vectores ortonormales en ℤ^{n}")
        points = [(0,) * n] + [tuple(1 if c == i else 0 for c in range(n)) for i in range(k - 1)]
        return cls(n=n, points=tuple(points))

    @property
    def k(self) -> int:
        return len(self.points)

    @property
    def gram(self) -> Tuple[Tuple[int, ...], ...]:
        """t_ij = vᵢ·vⱼ para 2 ≤ i, j ≤ k."""
        vectors = self.points[1:]
        return tuple(tuple(sum(a * b for a, b in zip(u, v)) for v in vectors) for u in vectors)

    @property
    def max_norm2(self) -> int:
        return max(self.gram[i][i] for i in range(self.k - 1))

    def to_dict(self) -> Dict[str, Any]:
        return {"n": self.n, "points": [list(p) for p in self.points]}

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> SimplexSpec:
        try:
            return cls(n=int(data["n"]), points=tuple(tuple(p) for p in data["points"]))
        except (KeyError, TypeError, ValueError) as e:
            raise InvalidParameterError(f"Símplice inválido: {e}") from e

    def save(self, path: Path) -> Path:
        path = Path(path)
        path.write_text(json.dumps(self.to_dict()), encoding="utf-8")
        return path

    @classmethod
    def load(cls, path: Path) -> SimplexSpec:
        return cls.from_dict(json.loads(Path(path).read_text(encoding="utf-8")))


def _dot(u: Sequence[int], v: Sequence[int]) -> int:
    return sum(a * b for a, b in zip(u, v))


def isometry_check(spec: SimplexSpec, candidate: Sequence[Sequence[int]], lambda2: int) -> bool:
    """True si (mᵢ − m₁)·(mⱼ − m₁) = λ² t_ij para todo par (aritmética entera)."""
    points = [tuple(int(c) for c in p) for p in candidate]
    if len(points) != spec.k or any(len(p) != spec.n for p in points):
        return False

    base = points[0]
    diffs = [tuple(a - b for a, b in zip(p, base)) for p in points[1:]]
    gram = spec.gram
    return all(
        _dot(diffs[i], diffs[j]) == lambda2 * gram[i][j]
        for i in range(len(diffs))
        for j in range(i, len(diffs))
    )


# Enumeración de copias

def _check_lambda2(lambda2: int) -> int:
    if int(lambda2) != lambda2 or lambda2 < 1:
        raise InvalidParameterError(f"λ² debe ser un entero positivo, recibido {lambda2}")
    cap = get_settings().lattice_max_lambda2
    if lambda2 > cap:
        raise CapExceededError(f"λ²={lambda2} supera el tope {cap}")
    return int(lambda2)


def _default_bound(spec: SimplexSpec, lambda2: int) -> int:
    return math.isqrt(lambda2 * spec.max_norm2)


def _check_bound(spec: SimplexSpec, lambda2: int, bound: Optional[int]) -> int:
    needed = _default_bound(spec, lambda2)
    if bound is None:
        return needed
    if bound < needed:
        raise InvalidParameterError(f"B={bound} recorta copias: se necesita B >= {needed}")
    return int(bound)


def _scaled_gram(spec: SimplexSpec, lambda2: int, q: int) -> Optional[List[List[int]]]:
    """λ² t_ij / q² para m = q·u, o None si alguna entrada no es divisible."""
    targets = []
    for row in spec.gram:
        scaled_row = []
        for value in row:
            total = lambda2 * value
            if total % (q * q):
                return None
            scaled_row.append(total // (q * q))
        targets.append(scaled_row)
    return targets


def _extend(previous: Sequence[Point], norm: int, dots: Sequence[int], n: int) -> List[Point]:
    """
    Vectores u ∈ ℤⁿ con u·u = norm y u·pⱼ = dotsⱼ, coordenada a coordenada.

    La poda usa Cauchy–Schwarz sobre las colas: dⱼ² ≤ (norma restante)·‖cola de pⱼ‖².
    """
    tails = []
    for p in previous:
        tail = [0] * (n + 1)
        for c in range(n - 1, -1, -1):
            tail[c] = tail[c + 1] + p[c] * p[c]
        tails.append(tail)

    results: List[Point] = []

    def walk(c: int, remaining: int, rest: Tuple[int, ...], prefix: Tuple[int, ...]) -> None:
        for j, d in enumerate(rest):
            if d * d > remaining * tails[j][c]:
                return
        if c == n:
            if remaining == 0:
                results.append(prefix)
            return
        if c == n - 1 and not previous:
            root = math.isqrt(remaining)
            if root * root == remaining:
                for x in sorted({-root, root}):
                    walk(n, 0, rest, prefix + (x,))
            return
        radius = math.isqrt(remaining)
        for x in range(-radius, radius + 1):
            walk(c + 1, remaining - x * x, tuple(d - x * p[c] for d, p in zip(rest, previous)), prefix + (x,))

    walk(0, norm, tuple(dots), ())
    return results


@lru_cache(maxsize=256)
def sphere_points(n: int, norm: int) -> Tuple[Point, ...]:
    """Puntos de ℤⁿ con |u|² = norm, en orden lexicográfico."""
    if norm < 0:
        return ()
    return tuple(_extend((), norm, (), n))


def enumerate_copies(
    spec: SimplexSpec,
    lambda2: int,
    q: int = 1,
    bound: Optional[int] = None,
    threads: Optional[int] = None,
) -> List[Copy]:
    """
    Todas las tuplas (m₂, …, m_k) con mᵢ ∈ (qℤ)ⁿ ∩ [−B, B]ⁿ y mᵢ·mⱼ = λ² t_ij.

    m₂ recorre la esfera por descomposición en sumas de cuadrados; cada mᵢ
    siguiente se extiende bajo las restricciones lineales de los ya fijados.
    Las ramas de m₂ se procesan en paralelo y se concatenan en orden.
    """
    lambda2 = _check_lambda2(lambda2)
    if q < 1:
        raise InvalidParameterError(f"q debe ser >= 1, recibido {q}")
    _check_bound(spec, lambda2, bound)

    targets = _scaled_gram(spec, lambda2, q)
    if targets is None:
        return []

    first = sphere_points(spec.n, targets[0][0])

    def complete(start: Point) -> List[Tuple[Point, ...]]:
        partial: List[Tuple[Point, ...]] = [(start,)]
        for i in range(1, spec.k - 1):
            grown = []
            for prefix in partial:
                for u in _extend(prefix, targets[i][i], [targets[i][j] for j in range(i)], spec.n):
                    grown.append(prefix + (u,))
            partial = grown
        return partial

    branches = ordered_map(complete, list(first), threads)
    copies = [
        tuple(tuple(q * c for c in u) for u in copy)
        for branch in branches
        for copy in branch
    ]
    logger.debug(f"enumerate_copies: λ²={lambda2} q={q} → {len(copies)} copias")
    return copies


def brute_force_copies(spec: SimplexSpec, lambda2: int, q: int = 1, bound: Optional[int] = None) -> List[Copy]:
    """Oráculo ingenuo: filtrar la caja completa (qℤ)ⁿ ∩ [−B, B]ⁿ."""
    lambda2 = _check_lambda2(lambda2)
    bound = _check_bound(spec, lambda2, bound)

    axis = np.arange(-(bound // q) * q, bound + 1, q, dtype=np.int64)
    box = np.stack(np.meshgrid(*([axis] * spec.n), indexing="ij"), axis=-1).reshape(-1, spec.n)
    norms = np.einsum("ij,ij->i", box, box)
    gram = spec.gram

    partial: List[Tuple[np.ndarray, ...]] = [()]
    for i in range(spec.k - 1):
        candidates = box[norms == lambda2 * gram[i][i]]
        grown = []
        for prefix in partial:
            keep = np.ones(len(candidates), dtype=bool)
            for j, previous in enumerate(prefix):
                keep &= candidates @ previous == lambda2 * gram[i][j]
            grown.extend(prefix + (row,) for row in candidates[keep])
        partial = grown

    return sorted(tuple(tuple(int(c) for c in m) for m in copy) for copy in partial)


def representation_counts(limit: int, n: int) -> np.ndarray:
    """r_n(m) para 0 ≤ m ≤ limit, por convolución de la serie de cuadrados."""
    single = np.zeros(limit + 1, dtype=np.int64)
    root = 0
    while root * root <= limit:
        single[root * root] += 1 if root == 0 else 2
        root += 1

    counts = np.zeros(limit + 1, dtype=np.int64)
    counts[0] = 1
    for _ in range(n):
        counts = np.convolve(counts, single)[: limit + 1]
    return counts


def normalization_exponent(spec: SimplexSpec) -> int:
    """(n − k)(k − 1)."""
    return (spec.n - spec.k) * (spec.k - 1)


class ScanResult(NamedTuple):
    table: pd.DataFrame
    rho_hat: float
    decay_exponent: float


def count_asymptotic_scan(
    spec: SimplexSpec,
    lambda2_values: Sequence[int],
    q: int = 1,
    threads: Optional[int] = None,
) -> ScanResult:
    """
    Tabla (λ², raw_count, normalized) con normalized = raw/(λ/q)^{(n−k)(k−1)}.

    ρ̂ es la mediana de la columna normalizada (filas con copias); el exponente
    de decaimiento τ̂ es −pendiente del ajuste log|normalized/ρ̂ − 1| contra log λ.
    """
    values = [_check_lambda2(v) for v in lambda2_values]
    if spec.n < 2 * spec.k + 1:
        logger.warning(f"n={spec.n} < 2k+1={2 * spec.k + 1}: la asintótica no aplica")

    exponent = normalization_exponent(spec)
    if spec.k == 2:
        limit = max(values) * spec.gram[0][0]
        reps = representation_counts(limit // (q * q), spec.n)
        raw = []
        for lambda2 in values:
            total = lambda2 * spec.gram[0][0]
            raw.append(int(reps[total // (q * q)]) if total % (q * q) == 0 else 0)
    else:
        raw = [len(enumerate_copies(spec, lambda2, q, threads=threads)) for lambda2 in values]

    table = pd.DataFrame({"lambda2": values, "raw_count": raw})
    scale = (table["lambda2"].astype(float) / (q * q)) ** (exponent / 2)
    table["normalized"] = table["raw_count"] / scale

    present = table[table["raw_count"] > 0]
    rho_hat = float(present["normalized"].median()) if len(present) else float("nan")
    decay = _decay_exponent(present, rho_hat)
    table["deviation"] = (table["normalized"] / rho_hat - 1.0).abs() if rho_hat > 0 else np.nan
    return ScanResult(table=table, rho_hat=rho_hat, decay_exponent=decay)


def _decay_exponent(rows: pd.DataFrame, rho_hat: float) -> float:
    if not rho_hat > 0:
        return float("nan")
    deviation = (rows["normalized"] / rho_hat - 1.0).abs()
    usable = deviation > 0
    if usable.sum() < 2:
        return float("nan")
    log_lambda = 0.5 * np.log(rows["lambda2"][usable].astype(float))
    slope, _ = np.polyfit(log_lambda, np.log(deviation[usable]), 1)
    return float(-slope)


@dataclass(frozen=True)
class SigmaMeasure:
    """σ_{λΔ⁰,q}: pesos uniformes sobre las copias, normalizados exactamente por λ."""

    lambda2: int
    q: int
    copies: Tuple[Copy, ...]
    weights: Tuple[Fraction, ...]
    normalized: float
    deviation: Optional[float]

    @property
    def raw_count(self) -> int:
        return len(self.copies)

    def total(self) -> Fraction:
        return sum(self.weights, Fraction(0))

    def weight_array(self) -> np.ndarray:
        return np.array([float(w) for w in self.weights])


def sigma_normalized(
    spec: SimplexSpec,
    lambda2: int,
    q: int = 1,
    bound: Optional[int] = None,
    rho_hat: Optional[float] = None,
    threads: Optional[int] = None,
) -> SigmaMeasure:
    copies = enumerate_copies(spec, lambda2, q, bound, threads)
    if not copies:
        raise NoCopiesError(f"No hay copias de λΔ⁰ con λ²={lambda2}, q={q}")

    weight = Fraction(1, len(copies))
    normalized = len(copies) / (lambda2 / (q * q)) ** (normalization_exponent(spec) / 2)
    deviation = abs(normalized / rho_hat - 1.0) if rho_hat else None
    return SigmaMeasure(
        lambda2=lambda2,
        q=q,
        copies=tuple(copies),
        weights=(weight,) * len(copies),
        normalized=normalized,
        deviation=deviation,
    )


# Cubos y conjuntos

@dataclass(frozen=True)
class GridCube:
    """Cubo corner + [0, side)ⁿ con rejilla de paso q y escala L (q | L | side)."""

    n: int
    corner: Point
    side: int
    q: int = 1
    L: Optional[int] = None

    def __post_init__(self) -> None:
        object.__setattr__(self, "corner", tuple(int(c) for c in self.corner))
        if self.L is None:
            object.__setattr__(self, "L", self.side)
        if len(self.corner) != self.n:
            raise InvalidParameterError(f"La esquina debe tener {self.n} coordenadas")
        if self.side < 1 or self.q < 1:
            raise InvalidParameterError("side y q deben ser positivos")
        if self.scale % self.q or self.side % self.scale:
            raise InvalidParameterError(
                f"Se requiere q | L | side, recibido q={self.q}, L={self.L}, side={self.side}"
            )

    @classmethod
    def origin(cls, n: int, side: int, q: int = 1, L: Optional[int] = None) -> GridCube:
        return cls(n=n, corner=(0,) * n, side=side, q=q, L=L)

    @property
    def scale(self) -> int:
        return int(self.L if self.L is not None else self.side)

    @property
    def shape(self) -> Tuple[int, ...]:
        return (self.side,) * self.n

    @property
    def volume(self) -> int:
        return self.side**self.n

    def check_cap(self) -> None:
        cap = get_settings().lattice_max_volume
        if self.volume > cap:
            raise CapExceededError(f"Ventana de {self.volume} puntos supera el tope {cap}")

    def to_dict(self) -> Dict[str, Any]:
        return {"n": self.n, "corner": list(self.corner), "side": self.side, "q": self.q, "L": self.scale}


_RLE_VERSION = 1


@dataclass(frozen=True, eq=False)
class LatticeSet:
    """S ∩ ventana como tabla densa de pertenencia (sustituto finito de S ⊆ ℤⁿ)."""

    window: GridCube
    membership: np.ndarray

    def __post_init__(self) -> None:
        table = np.asarray(self.membership, dtype=bool)
        if table.shape != self.window.shape:
            raise InvalidParameterError(
                f"La tabla tiene forma {table.shape}, la ventana {self.window.shape}"
            )
        table = table.copy()
        table.setflags(write=False)
        object.__setattr__(self, "membership", table)

    @classmethod
    def full(cls, window: GridCube) -> LatticeSet:
        return cls(window=window, membership=np.ones(window.shape, dtype=bool))

    @classmethod
    def congruence_class(cls, window: GridCube, modulus: int, residue: Optional[Point] = None) -> LatticeSet:
        """(s + (q*ℤ)ⁿ) ∩ ventana, con el residuo en coordenadas absolutas."""
        residue = residue if residue is not None else (0,) * window.n
        mask = np.ones(window.shape, dtype=bool)
        for axis in range(window.n):
            coords = np.arange(window.side) + window.corner[axis]
            shape = [1] * window.n
            shape[axis] = window.side
            mask &= ((coords - residue[axis]) % modulus == 0).reshape(shape)
        return cls(window=window, membership=mask)

    @property
    def n(self) -> int:
        return self.window.n

    @property
    def count(self) -> int:
        return int(self.membership.sum())

    @property
    def density(self) -> float:
        return self.count / self.window.volume

    def indicator(self) -> np.ndarray:
        return self.membership.astype(np.float64)

    def points(self) -> np.ndarray:
        """Coordenadas absolutas de los puntos del conjunto."""
        return np.argwhere(self.membership) + np.array(self.window.corner)

    def restrict(self, modulus: int, residue: Point) -> Tuple[LatticeSet, Point]:
        """
        S_{j+1} = (S ∩ (s + (q*ℤ)ⁿ) − s)/q*.

        Devuelve el conjunto reescalado (ventana con esquina en el origen) y s,
        el primer punto de la ventana en la clase del residuo.
        """
        if self.window.side % modulus:
            raise InvalidParameterError(f"El lado {self.window.side} no es divisible por {modulus}")
        offsets = tuple((r - c) % modulus for r, c in zip(residue, self.window.corner))
        index = tuple(slice(o, None, modulus) for o in offsets)
        shift = tuple(c + o for c, o in zip(self.window.corner, offsets))
        window = GridCube.origin(self.n, self.window.side // modulus)
        return LatticeSet(window=window, membership=self.membership[index]), shift

    def save(self, path: Path) -> Path:
        """Cabecera JSON en la primera línea y luego las longitudes de racha (empezando por 0)."""
        flat = self.membership.reshape(-1).astype(np.int8)
        changes = np.flatnonzero(np.diff(flat)) + 1
        bounds = np.concatenate([[0], changes, [flat.size]])
        runs = np.diff(bounds).tolist()
        if flat.size and flat[0]:
            runs = [0] + runs

        header = {"format": "lattice-set", "version": _RLE_VERSION, "window": self.window.to_dict()}
        path = Path(path)
        path.write_text(json.dumps(header) + "\n" + " ".join(str(r) for r in runs) + "\n", encoding="utf-8")
        return path

    @classmethod
    def load(cls, path: Path) -> LatticeSet:
        header_line, _, body = Path(path).read_text(encoding="utf-8").partition("\n")
        try:
            header = json.loads(header_line)
            window = GridCube(**header["window"])
            runs = [int(v) for v in body.split()]
        except (KeyError, TypeError, ValueError) as e:
            raise InvalidParameterError(f"Archivo de conjunto inválido: {path}") from e

        bits = np.repeat(np.arange(len(runs)) % 2, runs).astype(bool)
        if bits.size != window.volume:
            raise InvalidParameterError(f"Se esperaban {window.volume} bits, hay {bits.size}")
        return cls(window=window, membership=bits.reshape(window.shape))


# Formas de conteo

def _check_tables(window: GridCube, tables: Sequence[np.ndarray], count: int) -> List[np.ndarray]:
    if len(tables) != count:
        raise InvalidParameterError(f"Se esperaban {count} funciones, hay {len(tables)}")
    arrays = [np.asarray(t, dtype=np.float64) for t in tables]
    for table in arrays:
        if table.shape != window.shape:
            raise InvalidParameterError(f"Tabla con forma {table.shape}, la ventana es {window.shape}")
    return arrays


def shifted_table(table: np.ndarray, offset: Sequence[int]) -> np.ndarray:
    """g(x) = f(x + v), con ceros fuera de la ventana."""
    out = np.zeros_like(table)
    source, target = [], []
    for size, o in zip(table.shape, offset):
        if abs(o) >= size:
            return out
        source.append(slice(max(o, 0), size + min(o, 0)))
        target.append(slice(max(-o, 0), size - max(o, 0)))
    out[tuple(target)] = table[tuple(source)]
    return out


def eval_N1_lattice(
    spec: SimplexSpec,
    lambda2: int,
    window: GridCube,
    tables: Sequence[np.ndarray],
    q: int = 1,
    threads: Optional[int] = None,
) -> float:
    """𝒩¹ = 𝔼_{m₁∈Q} Σ σ_{λΔ⁰,q}(m₂,…,m_k) f₁(m₁) Π_{i≥2} fᵢ(m₁ + mᵢ)."""
    arrays = _check_tables(window, tables, spec.k)
    measure = sigma_normalized(spec, lambda2, q, threads=threads)

    def per_copy(copy: Copy) -> float:
        product = arrays[0].copy()
        for table, m in zip(arrays[1:], copy):
            product *= shifted_table(table, m)
            if not product.any():
                return 0.0
        return float(product.sum())

    total = block_sum(per_copy, measure.copies, threads)
    return total / measure.raw_count / window.volume


def _progression_average(table: np.ndarray, step: int, low: int, high: int) -> np.ndarray:
    """Promedio de f(x + step·j) con j ∈ [low, high]ⁿ, separable por ejes y con ceros fuera."""
    count = high - low + 1
    result = table
    for axis in range(table.ndim):
        accumulated = np.zeros_like(result)
        for j in range(low, high + 1):
            offset = [0] * table.ndim
            offset[axis] = step * j
            accumulated += shifted_table(result, offset)
        result = accumulated / count
    return result


def progression_radius(lambda2: int, q: int) -> int:
    """Mayor j con 4q²j² ≤ λ², de modo que Q(q,λ) = {qj : |j|_∞ ≤ radio}."""
    return math.isqrt(lambda2 // (4 * q * q))


def eval_M1_lattice(
    lambda2: int,
    window: GridCube,
    tables: Sequence[np.ndarray],
    q: int = 1,
) -> float:
    """ℳ¹ = 𝔼_{t∈Q} Π_i 𝔼_{m∈t+Q(q,λ)} fᵢ(m)."""
    lambda2 = _check_lambda2(lambda2)
    if not tables:
        raise InvalidParameterError("Se necesita al menos una función")
    arrays = _check_tables(window, tables, len(tables))
    radius = progression_radius(lambda2, q)

    product = np.ones(window.shape)
    for table in arrays:
        product *= _progression_average(table, q, -radius, radius)
    return float(product.mean())


def u1_norm(table: np.ndarray, window: GridCube, q: int, L: int) -> float:
    """
    ‖f‖_{U¹_{q,L}(Q)} = (𝔼_{t∈Q} |f∗χ_{q,L}(t)|²)^{1/2}.

    χ_{q,L} es el indicador normalizado del cubo centrado [−L/2, L/2]ⁿ ∩ (qℤ)ⁿ,
    es decir t + q·j con |j|_∞ ≤ ⌊L/2q⌋; fuera de Q la función vale 0.
    """
    if q < 1 or L % q:
        raise InvalidParameterError(f"Se requiere q | L, recibido q={q}, L={L}")
    if L > window.side:
        raise InvalidParameterError(f"L={L} supera el lado de la ventana {window.side}")
    arrays = _check_tables(window, [table], 1)
    radius = L // (2 * q)
    averaged = _progression_average(arrays[0], q, -radius, radius)
    return float(np.sqrt(np.mean(np.abs(averaged) ** 2)))


def boundary_deficit(spec: SimplexSpec, lambda2: int, window: GridCube, q: int = 1) -> float:
    """1 − 𝒩¹(1_Q, …, 1_Q)."""
    ones = [np.ones(window.shape)] * spec.k
    deficit = 1.0 - eval_N1_lattice(spec, lambda2, window, ones, q)
    if deficit > 0.1:
        logger.warning(f"Déficit de borde {deficit:.3f} con λ²={lambda2}, lado {window.side}")
    return deficit


class LatticeVonNeumannCheck(NamedTuple):
    count: float
    min_u1: float
    excess: float


def von_neumann_lattice_check(
    spec: SimplexSpec,
    lambda2: int,
    window: GridCube,
    tables: Sequence[np.ndarray],
    grid_q: int,
    L: int,
    q: int = 1,
) -> LatticeVonNeumannCheck:
    """|𝒩¹(f₁,…,f_k)| frente a min_i ‖fᵢ‖_{U¹_{q′,L}}; el exceso positivo es el término O(ε)."""
    count = abs(eval_N1_lattice(spec, lambda2, window, tables, q))
    min_u1 = min(u1_norm(t, window, grid_q, L) for t in tables)
    return LatticeVonNeumannCheck(count=count, min_u1=min_u1, excess=count - min_u1)


def uniform_part_norm(subset: LatticeSet, q: int, L: int) -> float:
    """‖1_S − δ1_Q‖_{U¹_{q,L}(Q)}."""
    balanced = subset.indicator() - subset.density
    return u1_norm(balanced, subset.window, q, L)


# Descomposición en rejillas

def grid_labels(window: GridCube, q: int, L: int) -> np.ndarray:
    """Átomos de 𝓖_{q,L,Q}: celda (m − esquina)//L y residuo (m − esquina) mod q."""
    if L % q or window.side % L:
        raise InvalidParameterError(f"Se requiere q | L | side, recibido q={q}, L={L}, side={window.side}")

    per_axis = (window.side // L) * q
    index = np.arange(window.side)
    axis_labels = (index // L) * q + index % q

    labels = np.zeros((1,) * window.n, dtype=np.int64)
    for axis in range(window.n):
        shape = [1] * window.n
        shape[axis] = window.side
        labels = labels * per_axis + axis_labels.reshape(shape)
    return np.broadcast_to(labels, window.shape)


def grid_cond_exp(table: np.ndarray, window: GridCube, q: int, L: int) -> np.ndarray:
    """𝔼(f | 𝓖_{q,L,Q}): media de f en cada átomo de la rejilla."""
    arrays = _check_tables(window, [table], 1)
    ids = grid_labels(window, q, L).reshape(-1)
    sums = np.bincount(ids, weights=arrays[0].reshape(-1))
    counts = np.bincount(ids)
    means = np.divide(sums, counts, out=np.zeros_like(sums), where=counts > 0)
    return means[ids].reshape(window.shape)


@dataclass(frozen=True)
class ScaleSequence:
    """Escalas L₀ ≥ L₁ ≥ … ≥ L_J con módulos qⱼ = q₀·q₁ʲ."""

    eps: float
    q0: int
    q1: int
    scales: Tuple[int, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "scales", tuple(int(s) for s in self.scales))
        if not 0 < self.eps <= 1:
            raise InvalidParameterError(f"ε debe estar en (0, 1], recibido {self.eps}")
        if len(self.scales) < 2:
            raise InvalidParameterError("La sucesión necesita al menos dos escalas")
        for j in range(len(self.scales) - 1):
            coarse, fine = self.scales[j], self.scales[j + 1]
            if fine < 1 or coarse % fine:
                raise InvalidParameterError(f"L_{j}/L_{j + 1} = {coarse}/{fine} no es entero")
            if 4 * fine > self.eps**2 * coarse + 1e-9:
                raise InvalidParameterError(
                    f"No admisible: L_{j + 1}={fine} > ε²·L_{j}/4 = {self.eps**2 * coarse / 4:g}"
                )
        for j in range(1, len(self.scales)):
            if self.scales[j] % self.modulus(j):
                raise InvalidParameterError(f"q_{j}={self.modulus(j)} no divide L_{j}={self.scales[j]}")

    @property
    def J(self) -> int:
        return len(self.scales) - 1

    def modulus(self, level: int) -> int:
        return self.q0 * self.q1**level


def admissible_sequence(eps: float, q0: int, q1: int, last_scale: int, levels: int) -> ScaleSequence:
    """La sucesión (ε,q)-admisible más gruesa que termina en L_J = last_scale."""
    if levels < 1:
        raise InvalidParameterError("Se necesita al menos un nivel")
    ratio = math.ceil(4 / eps**2 - 1e-9)
    scales = [last_scale * ratio**i for i in range(levels, -1, -1)]
    return ScaleSequence(eps=eps, q0=q0, q1=q1, scales=tuple(scales))


def guaranteed_levels(eps: float, constant: Optional[float] = None) -> int:
    """⌈C·ε⁻²⌉."""
    constant = get_settings().kvn_level_constant if constant is None else constant
    return math.ceil(constant * eps**-2 - 1e-9)


class GridLevel(NamedTuple):
    level: int
    modulus: int
    scale: int
    residual: float
    energy: float


@dataclass
class GridDecomposition:
    status: str
    level: Optional[int]
    cond_exp: Optional[np.ndarray]
    residual: Optional[float]
    levels: List[GridLevel] = field(default_factory=list)

    @property
    def succeeded(self) -> bool:
        return self.status == "ok"


def kvn_grid_decompose(
    table: np.ndarray,
    window: GridCube,
    eps: float,
    scales: ScaleSequence,
    enforce_guarantee: bool = True,
) -> GridDecomposition:
    """
    Primer nivel j con ‖f − 𝔼(f|𝓖_{qⱼ,Lⱼ,Q})‖_{U¹_{qⱼ₊₁,Lⱼ₊₁}(Q)} ≤ ε.

    Las sucesiones con menos de ⌈C·ε⁻²⌉ niveles se rechazan. Con
    enforce_guarantee=False se aceptan sucesiones cortas a escala de escritorio
    y, si ningún nivel cumple, el estado es "exhausted".
    """
    arrays = _check_tables(window, [table], 1)
    if np.abs(arrays[0]).max(initial=0.0) > 1.0 + 1e-12:
        raise InvalidParameterError("f debe estar acotada por 1")
    if scales.scales[1] > window.side or window.side % scales.scales[1]:
        raise InvalidParameterError(f"L₁={scales.scales[1]} debe dividir el lado {window.side}")

    available = scales.J - 1
    needed = guaranteed_levels(eps)
    if available < needed:
        if enforce_guarantee:
            raise InvalidParameterError(f"Sucesión corta: {available} niveles, se garantizan {needed}")
        logger.info(f"Sucesión corta aceptada: {available} niveles de {needed} garantizados")

    levels: List[GridLevel] = []
    for j in range(1, scales.J):
        expectation = grid_cond_exp(arrays[0], window, scales.modulus(j), scales.scales[j])
        residual = u1_norm(arrays[0] - expectation, window, scales.modulus(j + 1), scales.scales[j + 1])
        level = GridLevel(
            level=j,
            modulus=scales.modulus(j),
            scale=scales.scales[j],
            residual=residual,
            energy=float(np.mean(expectation**2)),
        )
        levels.append(level)
        logger.debug(f"Nivel {j}: q={level.modulus} L={level.scale} residuo U¹={residual:.4f}")
        if residual <= eps:
            return GridDecomposition(status="ok", level=j, cond_exp=expectation, residual=residual, levels=levels)

    logger.warning(f"Ningún nivel de 1..{scales.J - 1} alcanza ε={eps}")
    return GridDecomposition(status="exhausted", level=None, cond_exp=None, residual=None, levels=levels)


# q_ε, uniformidad e incremento de densidad

def lcm_range(upper: int) -> int:
    """lcm{1, …, upper} (1 si upper < 1)."""
    return math.lcm(*range(1, upper + 1)) if upper >= 1 else 1


def q_epsilon(eps: float, constant: float = 1.0, cap: Optional[int] = None) -> int:
    """q_ε = lcm{1 ≤ q ≤ C·ε⁻¹⁰} exacto; por encima del tope se rechaza."""
    if not 0 < eps <= 1:
        raise InvalidParameterError(f"ε debe estar en (0, 1], recibido {eps}")
    cap = get_settings().q_epsilon_cap if cap is None else cap
    upper = math.floor(constant * eps**-10 + 1e-9)
    if upper > cap:
        raise CapExceededError(f"Tope de escala de escritorio: el rango 1..{upper} supera {cap}")
    return lcm_range(upper)


class UniformityReport(NamedTuple):
    max_relative_density: float
    overall_density: float
    is_uniform: bool
    worst_residue: Point
    modulus: int
    window_side: int

    @property
    def ratio(self) -> float:
        return self.max_relative_density / self.overall_density if self.overall_density else float("nan")


def residue_densities(subset: LatticeSet, modulus: int) -> np.ndarray:
    """
    Densidad relativa de S en cada clase s + (q*ℤ)ⁿ, indexada por el residuo absoluto.

    Cada clase se mide sobre sus propios puntos en la ventana, así que el lado
    no necesita ser múltiplo de q*; sí debe contener todas las clases.
    """
    side = subset.window.side
    if modulus < 1 or side < modulus:
        raise InvalidParameterError(f"El lado {side} no contiene todas las clases módulo q*={modulus}")

    labels = np.zeros((1,) * subset.n, dtype=np.int64)
    for axis, corner in enumerate(subset.window.corner):
        shape = [1] * subset.n
        shape[axis] = side
        residues = (corner + np.arange(side)) % modulus
        labels = labels * modulus + residues.reshape(shape)
    ids = np.broadcast_to(labels, subset.window.shape).reshape(-1)

    classes = modulus**subset.n
    counts = np.bincount(ids, weights=subset.membership.reshape(-1), minlength=classes)
    sizes = np.bincount(ids, minlength=classes)
    return (counts / sizes).reshape((modulus,) * subset.n)


def uniformity_test(subset: LatticeSet, eps: float, modulus: int) -> UniformityReport:
    """ε-uniforme si la máxima densidad relativa es ≤ (1 + ε²)·densidad global (sobre la ventana)."""
    densities = residue_densities(subset, modulus)
    worst = tuple(int(i) for i in np.unravel_index(int(np.argmax(densities)), densities.shape))
    max_relative = float(densities[worst])
    overall = subset.density
    return UniformityReport(
        max_relative_density=max_relative,
        overall_density=overall,
        is_uniform=max_relative <= (1 + eps**2) * overall + 1e-12,
        worst_residue=worst,
        modulus=modulus,
        window_side=subset.window.side,
    )


class IncrementStep(NamedTuple):
    step: int
    residue: Point
    shift: Point
    modulus: int
    density_before: float
    density_after: float
    window_side: int


@dataclass
class IncrementResult:
    final_set: LatticeSet
    status: str
    history: List[IncrementStep] = field(default_factory=list)

    @property
    def steps(self) -> int:
        return len(self.history)


def increment_step_bound(density: float, eps: float) -> int:
    """⌈log(1/δ₀)/log(1+ε²)⌉."""
    return math.ceil(math.log(1 / density) / math.log(1 + eps**2) - 1e-12)


class DensityIncrement(LoggerMixin):
    """Restringir a la peor clase de residuos y reescalar hasta que S sea ε-uniforme."""

    def __init__(self, subset: LatticeSet, eps: float, modulus: Optional[int] = None):
        if subset.count == 0:
            raise InvalidParameterError("El conjunto está vacío en su ventana")
        if not 0 < eps <= 1:
            raise InvalidParameterError(f"ε debe estar en (0, 1], recibido {eps}")
        self.subset = subset
        self.eps = eps
        self.modulus = modulus if modulus is not None else get_settings().surrogate_modulus

    def run(self) -> IncrementResult:
        current = self.subset
        history: List[IncrementStep] = []
        bound = increment_step_bound(current.density, self.eps)

        while True:
            side = current.window.side
            if side < self.modulus:
                return self._exhausted(current, history)

            report = uniformity_test(current, self.eps, self.modulus)
            if report.is_uniform:
                self.logger.info(f"Conjunto ε-uniforme tras {len(history)} pasos (δ={current.density:.4f})")
                return IncrementResult(final_set=current, status="uniform", history=history)

            # Uniformidad medida, pero no hay reescalado posible
            if side % self.modulus:
                return self._exhausted(current, history)

            restricted, shift = current.restrict(self.modulus, report.worst_residue)
            history.append(IncrementStep(
                step=len(history) + 1,
                residue=report.worst_residue,
                shift=shift,
                modulus=self.modulus,
                density_before=current.density,
                density_after=restricted.density,
                window_side=restricted.window.side,
            ))
            self.logger.debug(
                f"Paso {len(history)}: residuo {report.worst_residue}, "
                f"δ {current.density:.4f} → {restricted.density:.4f}"
            )
            current = restricted

            if len(history) > bound:
                raise NumericalInvariantError(f"Se superó la cota de {bound} pasos de incremento")

    def _exhausted(self, current: LatticeSet, history: List[IncrementStep]) -> IncrementResult:
        self.logger.info(f"Ventana de lado {current.window.side} agotada tras {len(history)} pasos")
        return IncrementResult(final_set=current, status="window exhausted", history=history)


def density_increment(subset: LatticeSet, eps: float, modulus: Optional[int] = None) -> IncrementResult:
    return DensityIncrement(subset, eps, modulus).run()
