"""
Aritmética en cuerpos primos, funciones densas sobre F_q^m y transformada de Fourier.

Convención de caracteres: la transformada directa usa e^{+2πi x·ξ/q} con
normalización por promedio en el lado espacial,

    f̂(ξ) = q^{-m} Σ_x f(x) e^{2πi x·ξ/q},

y la inversa es la suma simple f(x) = Σ_ξ f̂(ξ) e^{-2πi x·ξ/q}.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from functools import lru_cache
from io import StringIO
from pathlib import Path
from typing import List, NamedTuple, Tuple, Union

import numpy as np
import pandas as pd

from src.utils.errors import InvalidParameterError
from src.utils.logging import get_logger

logger = get_logger(__name__)

# Filas por bloque en la DFT de referencia
_NAIVE_BLOCK = 1024


@lru_cache(maxsize=None)
def is_prime(n: int) -> bool:
    """Primalidad por división de prueba."""
    if n < 2:
        return False
    if n % 2 == 0:
        return n == 2
    for divisor in range(3, math.isqrt(n) + 1, 2):
        if n % divisor == 0:
            return False
    return True


def primes_up_to(limit: int, start: int = 3) -> List[int]:
    """Primos p con start <= p <= limit."""
    return [p for p in range(max(start, 2), limit + 1) if is_prime(p)]


@dataclass(frozen=True)
class PrimeField:
    """Cuerpo F_q con q primo impar."""

    q: int

    def __post_init__(self) -> None:
        if not isinstance(self.q, (int, np.integer)) or self.q < 3:
            raise InvalidParameterError(f"q debe ser un primo >= 3, recibido {self.q!r}")
        if not is_prime(int(self.q)):
            raise InvalidParameterError(f"q={self.q} no es primo")

    def nonzero(self) -> range:
        """Elementos de F_q^*."""
        return range(1, self.q)

    def require_nonzero(self, t: int) -> int:
        """Normalizar t módulo q rechazando t ≡ 0."""
        residue = int(t) % self.q
        if residue == 0:
            raise InvalidParameterError(f"t={t} es 0 módulo q={self.q}")
        return residue


class ValueKind(str, Enum):
    """Tipo de almacenamiento de una tabla."""
    REAL = "real"
    COMPLEX = "complex"


_DTYPES = {ValueKind.REAL: np.float64, ValueKind.COMPLEX: np.complex128}


@dataclass(frozen=True, eq=False)
class FieldFunction:
    """Tabla densa de valores indexada por F_q^m (forma (q,)*m, orden row-major)."""

    q: int
    m: int
    values: np.ndarray
    kind: ValueKind = ValueKind.REAL

    def __post_init__(self) -> None:
        PrimeField(self.q)
        if self.m < 1:
            raise InvalidParameterError(f"La dimensión m debe ser >= 1, recibido {self.m}")

        expected = (self.q,) * self.m
        if self.values.shape != expected:
            raise InvalidParameterError(
                f"La tabla tiene forma {self.values.shape}, se esperaba {expected}"
            )

        kind = ValueKind(self.kind)
        if kind is ValueKind.REAL and np.iscomplexobj(self.values):
            raise InvalidParameterError("Tabla compleja declarada como real")

        table = np.array(self.values, dtype=_DTYPES[kind], copy=True)
        table.setflags(write=False)
        object.__setattr__(self, "values", table)
        object.__setattr__(self, "kind", kind)

    # Constructores

    @classmethod
    def from_array(cls, q: int, values: np.ndarray) -> FieldFunction:
        """Crear a partir de un arreglo de forma (q,)*m; el tipo se deduce del dtype."""
        values = np.asarray(values)
        kind = ValueKind.COMPLEX if np.iscomplexobj(values) else ValueKind.REAL
        return cls(q=q, m=values.ndim, values=values, kind=kind)

    @classmethod
    def constant(cls, q: int, m: int, value: float) -> FieldFunction:
        return cls(q=q, m=m, values=np.full((q,) * m, float(value)))

    @classmethod
    def indicator(cls, q: int, mask: np.ndarray) -> FieldFunction:
        """Indicador de un subconjunto dado como máscara booleana."""
        return cls(q=q, m=mask.ndim, values=np.asarray(mask, dtype=bool).astype(np.float64))

    @classmethod
    def delta(cls, q: int, m: int, point: Tuple[int, ...] | None = None) -> FieldFunction:
        """q^m veces el indicador de un punto (masa unitaria en promedio)."""
        table = np.zeros((q,) * m)
        table[point or (0,) * m] = float(q**m)
        return cls(q=q, m=m, values=table)

    @classmethod
    def random_uniform(
        cls, q: int, m: int, rng: np.random.Generator, low: float = -1.0, high: float = 1.0
    ) -> FieldFunction:
        return cls(q=q, m=m, values=rng.uniform(low, high, size=(q,) * m))

    @classmethod
    def random_signs(cls, q: int, m: int, rng: np.random.Generator) -> FieldFunction:
        return cls(q=q, m=m, values=rng.choice(np.array([-1.0, 1.0]), size=(q,) * m))

    # Propiedades

    @property
    def size(self) -> int:
        return self.q**self.m

    @property
    def is_real(self) -> bool:
        return self.kind is ValueKind.REAL

    def mean(self) -> Union[float, complex]:
        value = self.values.mean()
        return float(value) if self.is_real else complex(value)

    def mean_square(self) -> float:
        """𝔼|f|²."""
        return float(np.mean(np.abs(self.values) ** 2))

    def sup_norm(self) -> float:
        return float(np.max(np.abs(self.values)))

    def support(self) -> List[Tuple[int, ...]]:
        """Puntos con valor no nulo, en orden lexicográfico."""
        return [tuple(int(c) for c in idx) for idx in np.argwhere(self.values != 0)]

    # Aritmética (sin coerción implícita entre real y complejo)

    def _check_compatible(self, other: FieldFunction) -> None:
        if (self.q, self.m, self.kind) != (other.q, other.m, other.kind):
            raise InvalidParameterError(
                f"Funciones incompatibles: ({self.q},{self.m},{self.kind.value}) "
                f"vs ({other.q},{other.m},{other.kind.value})"
            )

    def __add__(self, other: FieldFunction) -> FieldFunction:
        self._check_compatible(other)
        return FieldFunction(self.q, self.m, self.values + other.values, self.kind)

    def __sub__(self, other: FieldFunction) -> FieldFunction:
        self._check_compatible(other)
        return FieldFunction(self.q, self.m, self.values - other.values, self.kind)

    def __mul__(self, other: FieldFunction) -> FieldFunction:
        self._check_compatible(other)
        return FieldFunction(self.q, self.m, self.values * other.values, self.kind)

    def scaled(self, factor: float) -> FieldFunction:
        return FieldFunction(self.q, self.m, self.values * factor, self.kind)

    def shifted(self, offset: Tuple[int, ...]) -> FieldFunction:
        """Traslación x ↦ f(x − v)."""
        return FieldFunction(
            self.q, self.m, np.roll(self.values, shift=offset, axis=tuple(range(self.m))), self.kind
        )

    def real_part(self, tolerance: float = 1e-9) -> FieldFunction:
        """Convertir una tabla compleja a real verificando que la parte imaginaria es despreciable."""
        if self.is_real:
            return self
        imag = float(np.max(np.abs(self.values.imag)))
        if imag > tolerance:
            raise InvalidParameterError(f"Parte imaginaria {imag:.3e} supera la tolerancia")
        return FieldFunction(self.q, self.m, self.values.real, ValueKind.REAL)

    def allclose(self, other: FieldFunction, atol: float = 1e-9) -> bool:
        if (self.q, self.m) != (other.q, other.m):
            return False
        return bool(np.allclose(self.values, other.values, rtol=0.0, atol=atol))

    # Serialización: cabecera de 3 campos (q, m, kind) + q^m valores row-major

    def save(self, path: Path, fmt: str = "csv") -> Path:
        """Guardar en formato CSV o binario."""
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        header = f"{self.q},{self.m},{self.kind.value}\n"
        flat = self.values.reshape(-1)

        if fmt == "csv":
            if self.is_real:
                body = pd.DataFrame({"value": flat})
            else:
                body = pd.DataFrame({"re": flat.real, "im": flat.imag})
            with path.open("w", encoding="utf-8", newline="") as handle:
                handle.write("q,m,kind\n")
                handle.write(header)
                body.to_csv(handle, index=False, float_format="%.17g")
        elif fmt == "bin":
            dtype = "<f8" if self.is_real else "<c16"
            with path.open("wb") as handle:
                handle.write(header.encode("ascii"))
                handle.write(flat.astype(dtype).tobytes())
        else:
            raise InvalidParameterError(f"Formato desconocido: {fmt}")

        logger.debug(f"Función guardada en {path} ({fmt})")
        return path

    @classmethod
    def load(cls, path: Path) -> FieldFunction:
        """Cargar desde CSV o binario (se detecta por la cabecera)."""
        path = Path(path)
        raw = path.read_bytes()
        first, _, rest = raw.partition(b"\n")

        if first.strip() == b"q,m,kind":
            lines = rest.decode("utf-8").split("\n", 1)
            q, m, kind = _parse_header(lines[0])
            body = pd.read_csv(StringIO(lines[1]))
            if kind is ValueKind.REAL:
                flat = body["value"].to_numpy(dtype=np.float64)
            else:
                flat = body["re"].to_numpy() + 1j * body["im"].to_numpy()
        else:
            q, m, kind = _parse_header(first.decode("ascii"))
            dtype = "<f8" if kind is ValueKind.REAL else "<c16"
            flat = np.frombuffer(rest, dtype=dtype)

        if flat.size != q**m:
            raise InvalidParameterError(f"Se esperaban {q**m} valores, se leyeron {flat.size}")
        return cls(q=q, m=m, values=flat.reshape((q,) * m), kind=kind)


def _parse_header(line: str) -> Tuple[int, int, ValueKind]:
    try:
        q_text, m_text, kind_text = line.strip().split(",")
        return int(q_text), int(m_text), ValueKind(kind_text)
    except ValueError as e:
        raise InvalidParameterError(f"Cabecera inválida: {line!r}") from e


@dataclass(frozen=True, eq=False)
class SphereFunction:
    """σ_t sobre F_q²: vale q en {|x|² = t} y 0 fuera."""

    q: int
    t: int
    table: FieldFunction

    @property
    def support_size(self) -> int:
        return int(np.count_nonzero(self.table.values))

    def mean(self) -> float:
        return float(self.table.mean())

    def matrix(self) -> np.ndarray:
        """Matriz D[a, b] = σ_t(b − a) sobre pares de puntos aplanados de F_q²."""
        return difference_matrix(self.table)


def _norm_table(q: int) -> np.ndarray:
    coords = np.arange(q)
    squares = coords**2
    return (squares[:, None] + squares[None, :]) % q


def make_sphere(q: int, t: int) -> SphereFunction:
    """Función esfera σ_t, análogo discreto de la medida de superficie normalizada."""
    field = PrimeField(q)
    t = field.require_nonzero(t)
    values = np.where(_norm_table(q) == t, float(q), 0.0)
    return SphereFunction(q=q, t=t, table=FieldFunction(q=q, m=2, values=values))


def sphere_size(q: int, t: int) -> int:
    """|{x ∈ F_q² : x₁² + x₂² = t}|."""
    field = PrimeField(q)
    return int(np.count_nonzero(_norm_table(q) == field.require_nonzero(t)))


def difference_matrix(f: FieldFunction) -> np.ndarray:
    """D[a, b] = f(b − a) para f sobre F_q^m, con a, b aplanados en orden row-major."""
    q, m = f.q, f.m
    points = np.indices((q,) * m).reshape(m, -1).T
    diff = (points[None, :, :] - points[:, None, :]) % q
    return f.values[tuple(diff[..., axis] for axis in range(m))]


def _character_matrix(q: int) -> np.ndarray:
    coords = np.arange(q)
    return np.exp(2j * np.pi * np.outer(coords, coords) / q)


def _dft_naive(values: np.ndarray, q: int, m: int) -> np.ndarray:
    points = np.indices((q,) * m).reshape(m, -1).T
    flat = values.reshape(-1).astype(np.complex128)
    roots = np.exp(2j * np.pi * np.arange(q) / q)
    out = np.empty(points.shape[0], dtype=np.complex128)

    for start in range(0, points.shape[0], _NAIVE_BLOCK):
        block = points[start:start + _NAIVE_BLOCK]
        phases = (block @ points.T) % q
        out[start:start + _NAIVE_BLOCK] = roots[phases] @ flat

    return (out / q**m).reshape((q,) * m)


def dft(f: FieldFunction, method: str = "fast") -> FieldFunction:
    """
    Transformada f̂(ξ) = q^{-m} Σ_x f(x) e^{2πi x·ξ/q}.

    method="naive" aplica la matriz de caracteres completa (referencia, O(q^{2m}));
    method="fast" aplica transformadas 1-D dimensión por dimensión.
    """
    if method == "fast":
        # ifftn ya incluye el factor q^{-m} y el signo positivo en la exponencial
        table = np.fft.ifftn(f.values, axes=tuple(range(f.m)))
    elif method == "matrix":
        table = f.values.astype(np.complex128)
        char = _character_matrix(f.q)
        for axis in range(f.m):
            table = np.moveaxis(np.tensordot(table, char, axes=([axis], [0])), -1, axis)
        table = table / f.q**f.m
    elif method == "naive":
        table = _dft_naive(f.values, f.q, f.m)
    else:
        raise InvalidParameterError(f"Método de DFT desconocido: {method}")

    return FieldFunction(q=f.q, m=f.m, values=table, kind=ValueKind.COMPLEX)


def idft(transform: FieldFunction) -> FieldFunction:
    """Inversa f(x) = Σ_ξ f̂(ξ) e^{-2πi x·ξ/q} (resultado complejo)."""
    table = np.fft.fftn(transform.values, axes=tuple(range(transform.m)))
    return FieldFunction(q=transform.q, m=transform.m, values=table, kind=ValueKind.COMPLEX)


class SphereDecay(NamedTuple):
    """Desviación de la media y constante de decaimiento de σ̂_t, escaladas por √q."""
    mean_deviation: float
    max_decay_const: float


def sphere_decay(q: int, t: int) -> SphereDecay:
    """Medir |𝔼σ_t − 1|·√q y max_{ξ≠0} |σ̂_t(ξ)|·√q."""
    sphere = make_sphere(q, t)
    transform = np.abs(dft(sphere.table).values)
    root = math.sqrt(q)

    mean_deviation = abs(sphere.mean() - 1.0) * root
    transform[0, 0] = 0.0
    max_decay_const = float(transform.max()) * root

    logger.debug(f"q={q} t={t}: mean_dev={mean_deviation:.4f} decay={max_decay_const:.4f}")
    return SphereDecay(mean_deviation=mean_deviation, max_decay_const=max_decay_const)


def parseval_gap(f: FieldFunction) -> float:
    """|Σ_ξ |f̂(ξ)|² − 𝔼|f|²|."""
    transform = dft(f)
    return abs(float(np.sum(np.abs(transform.values) ** 2)) - f.mean_square())


def square_symmetries(values: np.ndarray) -> List[np.ndarray]:
    """Las 8 imágenes de una tabla sobre F_q² bajo intercambio y cambios de signo."""
    q = values.shape[0]
    negate = (-np.arange(q)) % q
    images = []
    for table in (values, values.T):
        for flip_first in (False, True):
            for flip_second in (False, True):
                image = table
                if flip_first:
                    image = image[negate, :]
                if flip_second:
                    image = image[:, negate]
                images.append(image)
    return images


def is_square_symmetric(f: FieldFunction) -> bool:
    """Invariancia bajo las 8 simetrías del retículo cuadrado."""
    if f.m != 2:
        raise InvalidParameterError("Las simetrías del cuadrado requieren m=2")
    return all(np.array_equal(image, f.values) for image in square_symmetries(f.values))
