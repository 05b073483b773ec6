"""
Modelos de dados para os resultados de recuperação (Prony, DPM)
"""

from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Dict, List, Optional, Set, Tuple

import numpy as np

from ..utils.errors import InvalidInputError


class RecoveryStatus(str, Enum):
    SUCCESS = "success"
    EMPTY_COLLISION_SET = "empty-collision-set"
    PRONY_FAILURE = "prony-failure"
    RANK_COLLAPSE = "rank-collapse"
    ERROR = "error"


@dataclass
class PronySolution:
    """Saída do método de Prony clássico"""
    roots: np.ndarray
    wrapped_nodes: np.ndarray
    amplitudes: np.ndarray
    residuals: Tuple[float, float]

    @property
    def n(self) -> int:
        return int(self.roots.size)

    def to_dict(self) -> Dict[str, Any]:
        """Converte para dicionário"""
        return {
            "roots": [[z.real, z.imag] for z in self.roots],
            "wrapped_nodes": self.wrapped_nodes.tolist(),
            "amplitudes": [[a.real, a.imag] for a in self.amplitudes],
            "residuals": list(self.residuals),
        }


@dataclass
class DecimationGrid:
    """Grade G = linspace(J, N_lambda), J = [Omega/(2(2n-1)), Omega/(2n-1)]"""
    omega: float
    n: int
    n_lambda: int
    lambdas: np.ndarray

    def __len__(self) -> int:
        return int(self.lambdas.size)

    @property
    def step(self) -> float:
        return float(self.lambdas[1] - self.lambdas[0])

    @property
    def alias_period(self) -> float:
        """
        Período 1/h da rede de fantasmas, h = passo da grade

        Todo lambda da grade é múltiplo inteiro de h, então t e t + k/h geram
        as mesmas amostras em todos os lambdas e recebem os mesmos votos.
        """
        return 2.0 * (2 * self.n - 1) * (self.n_lambda - 1) / self.omega

    def to_dict(self) -> Dict[str, Any]:
        """Converte para dicionário"""
        return {
            "omega": self.omega,
            "n": self.n,
            "n_lambda": self.n_lambda,
            "lambdas": self.lambdas.tolist(),
        }


@dataclass
class AliasedSolutionSet:
    """Conjunto X_lambda: candidatos t = (y_j + m) / lambda com |t| <= 1/2"""
    lam: float
    wrapped_nodes: np.ndarray
    node_index: np.ndarray  # j de cada candidato
    positions: np.ndarray   # t de cada candidato

    @property
    def candidates(self) -> List[Tuple[int, float]]:
        return list(zip(self.node_index.tolist(), self.positions.tolist()))

    def __len__(self) -> int:
        return int(self.positions.size)


@dataclass
class DealiasHistogram:
    """Histograma dos candidatos em [-1/2, 1/2] com N_b bins uniformes"""
    n_bins: int
    edges: np.ndarray
    counts: np.ndarray
    candidate_sums: np.ndarray  # soma das posições por bin, para a média do passo 8
    pair_bins: np.ndarray       # pares distintos (bin, lambda) que recebeu candidato
    pair_lambdas: np.ndarray

    @property
    def contributor_counts(self) -> np.ndarray:
        return np.bincount(self.pair_bins, minlength=self.n_bins)

    @property
    def contributors(self) -> Dict[int, Set[float]]:
        """Conjunto de lambdas contribuintes de cada bin não vazio"""
        result: Dict[int, Set[float]] = {}
        for index, lam in zip(self.pair_bins.tolist(), self.pair_lambdas.tolist()):
            result.setdefault(index, set()).add(lam)
        return result

    def contributors_of(self, index: int) -> Set[float]:
        mask = self.pair_bins == index
        return set(self.pair_lambdas[mask].tolist())

    def bin_of(self, positions: np.ndarray) -> np.ndarray:
        """Índice do bin de cada posição (t = 1/2 vai para o último bin)"""
        idx = np.floor((np.asarray(positions, dtype=float) + 0.5) * self.n_bins).astype(int)
        return np.clip(idx, 0, self.n_bins - 1)

    def bin_mean(self, index: int) -> float:
        return float(self.candidate_sums[index] / self.counts[index])


@dataclass
class DpmParams:
    """Parâmetros do DPM"""
    omega: float
    n: int
    n_lambda: int
    n_bins: int
    refine: bool = False

    def __post_init__(self):
        if self.omega <= 0:
            raise InvalidInputError(f"omega deve ser positivo (omega={self.omega})")
        if self.n < 1:
            raise InvalidInputError(f"n deve ser >= 1 (n={self.n})")
        if self.n_lambda < 2:
            raise InvalidInputError(f"n_lambda deve ser >= 2 (n_lambda={self.n_lambda})")
        if self.n_bins < 1:
            raise InvalidInputError(f"n_bins deve ser >= 1 (n_bins={self.n_bins})")


@dataclass
class RecoveryResult:
    """Estimativas de nós/amplitudes e diagnósticos do DPM"""
    status: RecoveryStatus
    est_nodes: List[float] = field(default_factory=list)
    est_amplitudes: List[complex] = field(default_factory=list)
    lambda_star: Optional[float] = None
    collision_set_size: int = 0
    selected_bins: List[int] = field(default_factory=list)
    refined: bool = False
    per_lambda_diagnostics: Optional[List[Dict[str, Any]]] = None

    @property
    def ok(self) -> bool:
        return self.status == RecoveryStatus.SUCCESS

    def to_dict(self) -> Dict[str, Any]:
        """Converte para dicionário"""
        return {
            "status": self.status.value,
            "est_nodes": self.est_nodes,
            "est_amplitudes": [[a.real, a.imag] for a in self.est_amplitudes],
            "lambda_star": self.lambda_star,
            "collision_set_size": self.collision_set_size,
            "selected_bins": self.selected_bins,
            "refined": self.refined,
            "per_lambda_diagnostics": self.per_lambda_diagnostics,
        }


@dataclass
class EspritConfig:
    """Configuração do ESPRIT: M amostras em 0..M-1, L linhas de Hankel, ordem n"""
    m_samples: int
    n: int
    hankel_rows: Optional[int] = None

    def __post_init__(self):
        if self.hankel_rows is None:
            self.hankel_rows = self.m_samples // 2
        if self.n < 1 or self.m_samples < 2 * self.n:
            raise InvalidInputError(f"ESPRIT exige M >= 2n (M={self.m_samples}, n={self.n})")
        if not self.n <= self.hankel_rows <= self.m_samples - self.n + 1:
            raise InvalidInputError(
                f"L fora de [n, M-n+1]: L={self.hankel_rows}, n={self.n}, M={self.m_samples}"
            )


@dataclass
class EspritResult:
    """Nós (ordenados) e amplitudes estimados pelo ESPRIT"""
    nodes: List[float]
    amplitudes: List[complex]
    singular_values: List[float] = field(default_factory=list)

    def to_dict(self) -> Dict[str, Any]:
        """Converte para dicionário"""
        return {
            "nodes": self.nodes,
            "amplitudes": [[a.real, a.imag] for a in self.amplitudes],
            "singular_values": self.singular_values,
        }
