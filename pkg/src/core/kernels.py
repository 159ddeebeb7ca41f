"""Reducciones por bloques deterministas para los núcleos de suma."""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Iterable, List, Optional, Sequence, TypeVar

from src.config.settings import get_settings

T = TypeVar("T")
R = TypeVar("R")


def resolve_threads(threads: Optional[int] = None) -> int:
    """Número de hilos efectivo (argumento explícito o CONFIG_COUNT_THREADS)."""
    if threads is None:
        threads = get_settings().threads
    return max(1, int(threads))


def ordered_map(
    func: Callable[[T], R],
    items: Sequence[T],
    threads: Optional[int] = None,
) -> List[R]:
    """
    Aplicar `func` a cada bloque, en paralelo si hay hilos disponibles.

    El resultado conserva el orden de `items`, de modo que la reducción
    posterior no depende de la planificación de los hilos.
    """
    workers = resolve_threads(threads)
    if workers == 1 or len(items) <= 1:
        return [func(item) for item in items]

    with ThreadPoolExecutor(max_workers=min(workers, len(items))) as pool:
        return list(pool.map(func, items))


def block_sum(
    func: Callable[[T], float],
    items: Iterable[T],
    threads: Optional[int] = None,
) -> float:
    """Suma de los bloques en orden fijo."""
    partials = ordered_map(func, list(items), threads)
    total = 0.0
    for value in partials:
        total += value
    return total
