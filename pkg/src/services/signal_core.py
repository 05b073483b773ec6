"""
Serviço de sinais: geração de configurações agrupadas, amostragem espectral
e injeção de ruído limitado
"""

import logging
from typing import Dict, Iterable, List

import numpy as np

from ..models.signal import ClusterConfig, MomentSequence, NoiseMode, SpikeSignal
from ..utils.errors import InvalidInputError
from ..utils.seeding import child_seed

logger = logging.getLogger(__name__)

# Distância mínima (em unidades de 1/Omega) entre grupos de nós
INTER_CLUSTER_CONSTANT = 2.0


def wrap_to_domain(x):
    """Reduz posições ao intervalo periódico [-1/2, 1/2)"""
    return np.mod(np.asarray(x, dtype=float) + 0.5, 1.0) - 0.5


def circular_distance(a: float, b: float) -> float:
    """Distância no círculo de perímetro 1 entre duas posições de [-1/2, 1/2]"""
    d = abs(float(a) - float(b)) % 1.0
    return min(d, 1.0 - d)


def circular_distance_matrix(a: Iterable[float], b: Iterable[float]) -> np.ndarray:
    """Matriz de distâncias circulares |a_i - b_j| no círculo"""
    d = np.abs(np.subtract.outer(np.asarray(a, dtype=float), np.asarray(b, dtype=float))) % 1.0
    return np.minimum(d, 1.0 - d)


def min_separation(signal: SpikeSignal) -> float:
    """Separação mínima Delta entre pares de nós (distância circular)"""
    if signal.n < 2:
        raise InvalidInputError(f"separação mínima exige n >= 2 (n={signal.n})")
    d = circular_distance_matrix(signal.nodes, signal.nodes)
    np.fill_diagonal(d, np.inf)
    return float(d.min())


def sample_spectrum(signal: SpikeSignal, lam: float, count: int) -> MomentSequence:
    """
    Amostra o espectro sem ruído nas frequências lambda * k

    Args:
        signal: Sinal de referência
        lam: Passo de decimação lambda > 0
        count: Número de amostras (k = 0..count-1)

    Returns:
        Sequência com values[k] = sum_j alpha_j exp(2 pi i x_j lambda k), eps = 0
    """
    if count < 1:
        raise InvalidInputError(f"count deve ser >= 1 (count={count})")
    if lam <= 0:
        raise InvalidInputError(f"lambda deve ser positivo (lambda={lam})")

    k = np.arange(count, dtype=float)
    phases = np.exp(2j * np.pi * lam * np.outer(k, signal.nodes_array))
    return MomentSequence(lam=float(lam), values=phases @ signal.amplitudes_array, eps=0.0)


def add_noise(
    moments: MomentSequence,
    eps: float,
    mode: NoiseMode = NoiseMode.BOUNDARY,
    rng_seed: int = 0,
) -> MomentSequence:
    """
    Soma ruído com ||e||_inf <= eps às amostras

    Args:
        moments: Amostras de entrada
        eps: Cota do ruído
        mode: boundary (|e_k| = eps) ou uniform-disk (uniforme no disco)
        rng_seed: Semente do gerador

    Returns:
        Nova sequência com o campo eps igual à cota usada
    """
    if eps < 0:
        raise InvalidInputError(f"eps deve ser >= 0 (eps={eps})")
    mode = NoiseMode(mode)

    if eps == 0:
        return MomentSequence(lam=moments.lam, values=moments.values.copy(), eps=0.0)

    rng = np.random.default_rng(rng_seed)
    size = len(moments)
    phase = np.exp(2j * np.pi * rng.uniform(0.0, 1.0, size))
    if mode == NoiseMode.BOUNDARY:
        radius = np.full(size, float(eps))
    else:
        radius = eps * np.sqrt(rng.uniform(0.0, 1.0, size))

    return MomentSequence(lam=moments.lam, values=moments.values + radius * phase, eps=float(eps))


def make_clustered_signal(config: ClusterConfig) -> SpikeSignal:
    """
    Gera um sinal agrupado de forma determinística

    Os grupos (n_clusters clusters de ell nós espaçados de Delta, seguidos dos
    nós isolados) são dispostos no círculo a partir de cluster_center com
    folgas iguais entre si; cada folga deve ser >= 2/Omega.

    Args:
        config: Configuração do sinal

    Returns:
        Sinal com n nós distintos e amplitudes com módulo na faixa configurada
    """
    n_singletons = config.n - config.n_clusters * config.ell
    n_groups = config.n_clusters + n_singletons
    extent = (config.ell - 1) * config.delta
    gap = (1.0 - config.n_clusters * extent) / n_groups
    min_gap = INTER_CLUSTER_CONSTANT / config.omega

    if n_groups > 1 and gap < min_gap:
        raise InvalidInputError(
            f"layout não cabe em [-1/2, 1/2]: folga {gap:.3g} < 2/Omega = {min_gap:.3g}"
        )
    if n_groups == 1 and 1.0 - extent < config.delta:
        raise InvalidInputError(f"cluster não cabe no círculo: extensão {extent:.3g}")

    positions: List[float] = []
    in_cluster: List[bool] = []
    cluster_ids: List[int] = []
    cursor = config.cluster_center
    for group in range(config.n_clusters):
        positions.extend(cursor + j * config.delta for j in range(config.ell))
        in_cluster.extend([True] * config.ell)
        cluster_ids.extend([group] * config.ell)
        cursor += extent + gap
    for group in range(config.n_clusters, n_groups):
        positions.append(cursor)
        in_cluster.append(False)
        cluster_ids.append(group)
        cursor += gap

    nodes = wrap_to_domain(positions)

    rng = np.random.default_rng(config.seed)
    low, high = config.amp_magnitude_range
    moduli = rng.uniform(low, high, config.n)
    phases = rng.uniform(0.0, 2.0 * np.pi, config.n)

    signal = SpikeSignal(
        nodes=nodes.tolist(),
        amplitudes=(moduli * np.exp(1j * phases)).tolist(),
        in_cluster=in_cluster,
        cluster_ids=cluster_ids,
    )
    logger.debug(f"Sinal agrupado gerado: n={config.n}, ell={config.ell}, SRF={config.srf:.3g}")
    return signal


class SpectrumTable:
    """
    Tabela de amostras ruidosas g(lambda k) para uma grade de lambdas

    Cada lambda recebe um sorteio de ruído independente, semeado por
    (seed, índice de lambda). Funciona como provedor de amostras do DPM.
    """

    def __init__(
        self,
        signal: SpikeSignal,
        lambdas: Iterable[float],
        count: int,
        eps: float = 0.0,
        mode: NoiseMode = NoiseMode.BOUNDARY,
        seed: int = 0,
    ):
        self.count = count
        self.eps = float(eps)
        self._table: Dict[float, MomentSequence] = {}

        for index, lam in enumerate(lambdas):
            moments = sample_spectrum(signal, float(lam), count)
            if eps > 0:
                moments = add_noise(moments, eps, mode, child_seed(seed, index))
            self._table[float(lam)] = moments

    def moments(self, lam: float) -> MomentSequence:
        try:
            return self._table[float(lam)]
        except KeyError:
            raise InvalidInputError(f"lambda {lam} fora da tabela de amostras") from None

    def __call__(self, lam: float, k: int) -> complex:
        values = self.moments(lam).values
        if not 0 <= k < values.size:
            raise InvalidInputError(f"índice de amostra {k} fora de 0..{values.size - 1}")
        return complex(values[k])

    def block(self, lambdas: Iterable[float], count: int) -> np.ndarray:
        """Matriz (lambdas, count) com as primeiras count amostras de cada lambda"""
        rows = [self.moments(lam).values for lam in lambdas]
        if any(row.size < count for row in rows):
            raise InvalidInputError(f"a tabela guarda {self.count} amostras por lambda, pedidas {count}")
        return np.array([row[:count] for row in rows], dtype=complex)
