"""
Вердикты приемочных проверок
"""

from enum import Enum
from typing import Iterable


class Verdict(str, Enum):
    """Итог одной проверки"""
    PASS = "pass"
    FAIL = "fail"
    INCONCLUSIVE = "inconclusive"

    @classmethod
    def of(cls, condition: bool) -> "Verdict":
        return cls.PASS if condition else cls.FAIL

    @classmethod
    def combine(cls, verdicts: Iterable["Verdict"]) -> "Verdict":
        """Любой fail дает fail, иначе inconclusive, если он есть"""
        verdicts = [cls(v) for v in verdicts]
        if cls.FAIL in verdicts:
            return cls.FAIL
        if cls.INCONCLUSIVE in verdicts:
            return cls.INCONCLUSIVE
        return cls.PASS
