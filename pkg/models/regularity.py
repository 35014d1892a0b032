"""
Отчет о численной проверке предположений о регулярности ядра
"""

from typing import Dict, List, Optional

import numpy as np
from pydantic import BaseModel, Field, model_validator

from .verdict import Verdict


class RegularityReport(BaseModel):
    """Результаты sweep по eps для одного ядра"""

    check: str = Field(..., description="Название проверки")
    epsilons: List[float] = Field(..., description="Значения eps, строго убывают")
    diagonal_values: List[float] = Field(default_factory=list, description="W_eps(x, x)")
    diagonal_ratios: List[float] = Field(default_factory=list, description="W_eps(x, x) / (|ln eps| + 1)")
    besov_norms: List[float] = Field(default_factory=list, description="sup_x ‖(P_eps - id)W(x,·)‖^p_{L^p(ρ̄)}")
    superharm_minima: List[float] = Field(default_factory=list, description="min по сетке (W - P_eps W)")
    fitted_exponents: Dict[str, float] = Field(default_factory=dict, description="Подогнанные κ̂, α̂ и константы")
    residuals: List[float] = Field(default_factory=list, description="Остатки линейной подгонки в log-log")
    tail_bounds: List[float] = Field(default_factory=list, description="Оценка хвоста ряда при каждом eps")
    verdict: Verdict = Field(Verdict.INCONCLUSIVE, description="pass / fail / inconclusive")
    notes: Optional[str] = Field(None, description="Комментарий к вердикту")

    @model_validator(mode="after")
    def _check_invariants(self) -> "RegularityReport":
        eps = np.asarray(self.epsilons, dtype=float)
        if eps.size == 0 or np.any(eps <= 0) or np.any(eps >= 0.5) or np.any(np.diff(eps) >= 0):
            raise ValueError("epsilons must be strictly decreasing in (0, 1/2)")
        for name in ("besov_norms",):
            values = np.asarray(getattr(self, name), dtype=float)
            if values.size and (not np.all(np.isfinite(values)) or np.any(values < 0)):
                raise ValueError(f"{name} must be finite and nonnegative")
        return self

    def to_rows(self) -> List[dict]:
        """Пары (eps, значение) для графиков"""
        rows = []
        for i, eps in enumerate(self.epsilons):
            row = {"eps": eps}
            for name in ("diagonal_values", "diagonal_ratios", "besov_norms", "superharm_minima", "tail_bounds"):
                values = getattr(self, name)
                if values:
                    row[name] = values[i]
            rows.append(row)
        return rows
