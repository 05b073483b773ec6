"""
Modelos de dados para sinais e medições espectrais
"""

from dataclasses import dataclass
from enum import Enum
from typing import Any, Dict, List, Optional, Tuple

import numpy as np

from ..utils.errors import InvalidInputError


class NoiseMode(str, Enum):
    BOUNDARY = "boundary"          # |e_k| = eps, fase uniforme
    UNIFORM_DISK = "uniform-disk"  # e_k uniforme no disco de raio eps


@dataclass
class SpikeSignal:
    """Trem de impulsos: nós x_k em [-1/2, 1/2] e amplitudes complexas"""
    nodes: List[float]
    amplitudes: List[complex]
    in_cluster: Optional[List[bool]] = None
    cluster_ids: Optional[List[int]] = None  # nós do mesmo cluster compartilham o id

    def __post_init__(self):
        self.nodes = [float(x) for x in self.nodes]
        self.amplitudes = [complex(a) for a in self.amplitudes]
        n = len(self.nodes)

        if n < 1 or len(self.amplitudes) != n:
            raise InvalidInputError(
                f"nós e amplitudes devem ter o mesmo tamanho n >= 1 ({n} vs {len(self.amplitudes)})"
            )
        if any(not -0.5 <= x <= 0.5 for x in self.nodes):
            raise InvalidInputError(f"nós fora de [-1/2, 1/2]: {self.nodes}")
        if any(a == 0 for a in self.amplitudes):
            raise InvalidInputError("amplitudes devem ser não nulas")
        # -1/2 e 1/2 são o mesmo ponto do círculo
        if np.unique(np.mod(self.nodes, 1.0)).size < n:
            raise InvalidInputError(f"nós repetidos: {self.nodes}")

        if self.in_cluster is None:
            self.in_cluster = [False] * n
        elif len(self.in_cluster) != n:
            raise InvalidInputError("in_cluster deve ter um flag por nó")

        if self.cluster_ids is None:
            self.cluster_ids = list(range(n))
        elif len(self.cluster_ids) != n:
            raise InvalidInputError("cluster_ids deve ter um id por nó")

    @property
    def n(self) -> int:
        return len(self.nodes)

    @property
    def nodes_array(self) -> np.ndarray:
        return np.asarray(self.nodes, dtype=float)

    @property
    def amplitudes_array(self) -> np.ndarray:
        return np.asarray(self.amplitudes, dtype=complex)

    def scaled(self, factor: complex) -> "SpikeSignal":
        """Mesmo sinal com amplitudes multiplicadas por factor"""
        return SpikeSignal(
            nodes=list(self.nodes),
            amplitudes=[a * factor for a in self.amplitudes],
            in_cluster=list(self.in_cluster),
            cluster_ids=list(self.cluster_ids),
        )

    def to_dict(self) -> Dict[str, Any]:
        """Converte para dicionário"""
        return {
            "nodes": self.nodes,
            "amplitudes": [[a.real, a.imag] for a in self.amplitudes],
            "in_cluster": self.in_cluster,
            "cluster_ids": self.cluster_ids,
        }


@dataclass
class ClusterConfig:
    """Configuração de sinal agrupado (cluster de tamanho ell + nós isolados)"""
    n: int
    ell: int
    delta: float
    omega: float
    cluster_center: float = 0.0
    amp_magnitude_range: Tuple[float, float] = (1.0 / 3.0, 1.0)
    seed: int = 0
    n_clusters: int = 1

    def __post_init__(self):
        if self.n < 1:
            raise InvalidInputError(f"n deve ser >= 1 (n={self.n})")
        if not 1 < self.ell <= self.n:
            raise InvalidInputError(f"tamanho do cluster fora de (1, n]: ell={self.ell}, n={self.n}")
        if self.n_clusters < 1 or self.n_clusters * self.ell > self.n:
            raise InvalidInputError(
                f"{self.n_clusters} clusters de {self.ell} nós não cabem em n={self.n}"
            )
        if self.delta <= 0 or self.omega <= 0:
            raise InvalidInputError(f"delta e omega devem ser positivos ({self.delta}, {self.omega})")
        if self.delta * (self.ell - 1) >= 1:
            raise InvalidInputError(f"cluster não cabe no domínio: delta={self.delta}, ell={self.ell}")
        if not -0.5 <= self.cluster_center <= 0.5:
            raise InvalidInputError(f"cluster_center fora de [-1/2, 1/2]: {self.cluster_center}")
        low, high = self.amp_magnitude_range
        if not 0 < low <= high:
            raise InvalidInputError(f"faixa de módulos inválida: {self.amp_magnitude_range}")

    @property
    def srf(self) -> float:
        """Fator de super-resolução 1/(Omega * Delta)"""
        return 1.0 / (self.omega * self.delta)

    def to_dict(self) -> Dict[str, Any]:
        """Converte para dicionário"""
        return {
            "n": self.n,
            "ell": self.ell,
            "delta": self.delta,
            "omega": self.omega,
            "cluster_center": self.cluster_center,
            "amp_magnitude_range": list(self.amp_magnitude_range),
            "seed": self.seed,
            "n_clusters": self.n_clusters,
            "srf": self.srf,
        }


@dataclass
class MomentSequence:
    """Amostras espectrais m_k = g(lambda * k) com cota de ruído eps"""
    lam: float
    values: np.ndarray
    eps: float = 0.0

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=complex).ravel()
        if self.values.size == 0:
            raise InvalidInputError("sequência de momentos vazia")
        if self.lam <= 0:
            raise InvalidInputError(f"lambda deve ser positivo (lambda={self.lam})")
        if self.eps < 0:
            raise InvalidInputError(f"eps deve ser >= 0 (eps={self.eps})")

    def __len__(self) -> int:
        return int(self.values.size)

    def to_dict(self) -> Dict[str, Any]:
        """Converte para dicionário"""
        return {
            "lambda": self.lam,
            "values": [[v.real, v.imag] for v in self.values],
            "eps": self.eps,
        }
