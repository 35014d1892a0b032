"""
Пул исполнителей с сохранением порядка результатов
"""

from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Iterable, List, Optional, TypeVar
import logging

logger = logging.getLogger(__name__)

T = TypeVar("T")
R = TypeVar("R")


class WorkerPool:
    """Упорядоченный map поверх ThreadPoolExecutor; workers = 1 выполняет задачи в текущем потоке"""

    def __init__(self, workers: int = 1):
        """
        Инициализация пула

        Args:
            workers: Число потоков, >= 1
        """
        if workers < 1:
            raise ValueError(f"workers must be positive, got {workers}")
        self.workers = workers
        self._executor: Optional[ThreadPoolExecutor] = None

    def __enter__(self) -> "WorkerPool":
        if self.workers > 1:
            self._executor = ThreadPoolExecutor(max_workers=self.workers, thread_name_prefix="loggas")
        return self

    def __exit__(self, *exc_info):
        self.close()

    def close(self):
        if self._executor is not None:
            self._executor.shutdown(wait=True)
            self._executor = None

    def map(self, fn: Callable[[T], R], items: Iterable[T]) -> List[R]:
        """Результаты в порядке входа; исключение первой упавшей задачи пробрасывается"""
        items = list(items)
        if self._executor is None or len(items) < 2:
            return [fn(item) for item in items]
        logger.debug(f"Dispatching {len(items)} tasks to {self.workers} workers")
        return list(self._executor.map(fn, items))
