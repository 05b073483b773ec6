"""
Modelos de dados para avaliação das estimativas
"""

from dataclasses import dataclass, field
from typing import Any, Dict, List, Tuple

import numpy as np


@dataclass
class NodeMatching:
    """Bijeção estimado -> verdadeiro de distância circular total mínima"""
    permutation: List[int]  # permutation[i] = índice do nó verdadeiro casado com a estimativa i
    distances: List[float]  # distância circular de cada estimativa ao seu par

    @property
    def total_distance(self) -> float:
        return float(sum(self.distances))

    def estimate_for_true(self) -> np.ndarray:
        """Índice da estimativa casada com cada nó verdadeiro"""
        inverse = np.empty(len(self.permutation), dtype=int)
        inverse[np.asarray(self.permutation, dtype=int)] = np.arange(len(self.permutation))
        return inverse

    def to_dict(self) -> Dict[str, Any]:
        """Converte para dicionário"""
        return {"permutation": self.permutation, "distances": self.distances}


@dataclass
class LogLogFit:
    """Reta ajustada em (log10 x, log10 y)"""
    slope: float
    intercept: float
    r2: float

    def annotation(self) -> str:
        return f"slope = {self.slope:.3f}"

    def to_dict(self) -> Dict[str, Any]:
        """Converte para dicionário"""
        return {"slope": self.slope, "intercept": self.intercept, "r2": self.r2}


@dataclass
class ThresholdFit:
    """Fronteira de 50% de sucesso e inclinação de log eps* contra log Delta"""
    slope: float
    intercept: float
    r2: float
    boundary: List[Tuple[float, float]] = field(default_factory=list)

    def to_dict(self) -> Dict[str, Any]:
        """Converte para dicionário"""
        return {
            "slope": self.slope,
            "intercept": self.intercept,
            "r2": self.r2,
            "boundary": [list(point) for point in self.boundary],
        }
