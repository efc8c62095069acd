# shared/infrastructure/parallel_executor.py

import logging
from typing import Callable, Iterable, List, TypeVar

from joblib import Parallel, delayed

from shared.infrastructure.settings import settings

logger = logging.getLogger(__name__)

T = TypeVar("T")
R = TypeVar("R")


def map_blocks(fn: Callable[[T], R], items: Iterable[T], threads: int | None = None) -> List[R]:
    """
    Evalúa `fn` sobre cada bloque y devuelve los resultados en el orden de entrada.

    Con un solo hilo se evalúa en serie; con más se usa joblib con backend de
    hilos (numpy libera el GIL en las operaciones vectorizadas).
    """
    items = list(items)
    n_jobs = threads if threads is not None else settings.THREADS
    if n_jobs <= 1 or len(items) <= 1:
        return [fn(item) for item in items]
    logger.debug("Evaluando %d bloques con %d hilos", len(items), n_jobs)
    return Parallel(n_jobs=n_jobs, prefer="threads")(delayed(fn)(item) for item in items)
