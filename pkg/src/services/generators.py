"""Generación determinista de conjuntos de prueba."""

from __future__ import annotations

from enum import Enum
from typing import Optional, Sequence, Tuple

import numpy as np

from src.config.settings import get_settings
from src.core.forms import BLOCK_DIM
from src.core.lattice import GridCube, LatticeSet, Point
from src.utils.errors import InvalidParameterError
from src.utils.logging import get_logger

logger = get_logger(__name__)

_BIT_GENERATORS = ("PCG64", "PCG64DXSM", "Philox", "SFC64", "MT19937")


class GeneratorKind(str, Enum):
    """Tipos de generador de conjuntos."""
    RANDOM_DENSITY = "random_density"
    CONGRUENCE_CLASS = "congruence_class"
    PLANTED_PRODUCT = "planted_product"
    TWO_SCALE = "two_scale"


def make_rng(seed: int, algorithm: Optional[str] = None) -> np.random.Generator:
    """Generator con un bit generator nombrado explícitamente (nunca el de la plataforma)."""
    algorithm = algorithm or get_settings().rng_algorithm
    if algorithm not in _BIT_GENERATORS:
        raise InvalidParameterError(f"Algoritmo RNG desconocido: {algorithm}")
    if not 0 <= seed < 2**64:
        raise InvalidParameterError(f"La semilla debe caber en 64 bits: {seed}")
    return np.random.Generator(getattr(np.random, algorithm)(seed))


def exact_density_mask(shape: Tuple[int, ...], density: float, rng: np.random.Generator) -> np.ndarray:
    """Máscara con exactamente round(δ·volumen) puntos elegidos por permutación."""
    if not 0 <= density <= 1:
        raise InvalidParameterError(f"La densidad debe estar en [0, 1], recibido {density}")
    volume = int(np.prod(shape, dtype=np.int64))
    chosen = rng.permutation(volume)[: round(density * volume)]
    mask = np.zeros(volume, dtype=bool)
    mask[chosen] = True
    return mask.reshape(shape)


class SetGenerator:
    """Conjuntos S en una ventana de ℤⁿ o en V = (F_q²)^d, reproducibles por semilla."""

    def __init__(self, seed: int = 0, algorithm: Optional[str] = None):
        self.seed = seed
        self.rng = make_rng(seed, algorithm)

    # Retículo

    def random_density(self, window: GridCube, density: float) -> LatticeSet:
        return LatticeSet(window=window, membership=exact_density_mask(window.shape, density, self.rng))

    def congruence_class(
        self,
        window: GridCube,
        modulus: int,
        residue: Optional[Point] = None,
        concentration: float = 1.0,
    ) -> LatticeSet:
        """
        Clase s + (q*ℤ)ⁿ completa más puntos fuera de ella.

        Con concentración c < 1 se añaden round(|clase|·(1−c)/c) puntos al azar
        del complemento, de modo que una fracción c de S queda en la clase.
        """
        if not 0 < concentration <= 1:
            raise InvalidParameterError(f"La concentración debe estar en (0, 1], recibido {concentration}")

        base = LatticeSet.congruence_class(window, modulus, residue)
        if concentration == 1.0:
            return base

        mask = base.membership.copy()
        outside = np.flatnonzero(~mask.reshape(-1))
        extra = min(len(outside), round(base.count * (1 - concentration) / concentration))
        chosen = self.rng.choice(outside, size=extra, replace=False)
        mask.reshape(-1)[np.sort(chosen)] = True
        return LatticeSet(window=window, membership=mask)

    def planted_product(self, window: GridCube, densities: Sequence[float], split: Optional[int] = None) -> LatticeSet:
        """A₁ × A₂ con A₁ en las primeras `split` coordenadas y A₂ en el resto."""
        split = window.n // 2 if split is None else split
        if not 1 <= split < window.n or len(densities) != 2:
            raise InvalidParameterError("planted_product necesita n ≥ 2, 1 ≤ split < n y dos densidades")

        first = exact_density_mask((window.side,) * split, densities[0], self.rng)
        second = exact_density_mask((window.side,) * (window.n - split), densities[1], self.rng)
        mask = first.reshape(first.shape + (1,) * second.ndim) & second.reshape((1,) * first.ndim + second.shape)
        return LatticeSet(window=window, membership=mask)

    def two_scale(self, window: GridCube, scale: int) -> LatticeSet:
        """S = {m : ⌊(m₁ − esquina)/L⌋ par}: media 1/2 a escala gruesa, estructurado a escala L."""
        if scale < 1 or window.side % (2 * scale):
            raise InvalidParameterError(f"El lado {window.side} debe ser múltiplo de 2L = {2 * scale}")
        stripes = (np.arange(window.side) // scale) % 2 == 0
        shape = [window.side] + [1] * (window.n - 1)
        mask = np.broadcast_to(stripes.reshape(shape), window.shape)
        return LatticeSet(window=window, membership=mask)

    # Cuerpo finito

    def ff_random_subset(self, q: int, d: int, density: float) -> np.ndarray:
        """S ⊆ (F_q²)^d de densidad exacta round(δ·q^{2d})/q^{2d}."""
        return exact_density_mask((q,) * (BLOCK_DIM * d), density, self.rng)

    def ff_planted_product(self, q: int, d: int, densities: Sequence[float]) -> np.ndarray:
        """S = A₁ × … × A_d con Aᵢ ⊆ F_q² de densidad δᵢ."""
        if len(densities) != d:
            raise InvalidParameterError(f"Se esperaban {d} densidades, hay {len(densities)}")
        mask = np.ones((1,) * (BLOCK_DIM * d), dtype=bool)
        for i, density in enumerate(densities):
            factor = exact_density_mask((q,) * BLOCK_DIM, density, self.rng)
            shape = [1] * (BLOCK_DIM * d)
            shape[BLOCK_DIM * i: BLOCK_DIM * (i + 1)] = [q] * BLOCK_DIM
            mask = mask & factor.reshape(shape)
        return np.broadcast_to(mask, (q,) * (BLOCK_DIM * d)).copy()
