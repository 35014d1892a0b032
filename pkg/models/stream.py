"""
Детерминированные потоки случайных чисел
"""

import hashlib
from typing import Tuple, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, Field

StreamKey = Union[int, str]


def _key_to_int(key: StreamKey) -> int:
    if isinstance(key, int):
        return key
    return int.from_bytes(hashlib.sha256(key.encode("utf-8")).digest()[:8], "little")


class RandomStream(BaseModel):
    """Поток stream(seed, k_1, ..., k_m) на основе SeedSequence"""

    model_config = ConfigDict(frozen=True)

    seed: int = Field(..., ge=0, lt=2 ** 64, description="Корневой seed эксперимента")
    keys: Tuple[int, ...] = Field(default=(), description="Путь дочернего потока")

    def child(self, *keys: StreamKey) -> "RandomStream":
        """Дочерний поток; разные пути дают независимые последовательности"""
        return RandomStream(seed=self.seed, keys=self.keys + tuple(_key_to_int(k) for k in keys))

    def generator(self) -> np.random.Generator:
        """Генератор PCG64, однозначно определенный (seed, keys)"""
        return np.random.Generator(np.random.PCG64(np.random.SeedSequence([self.seed, *self.keys])))
