"""
Serviço de métricas: casamento de nós, fatores de amplificação de erro,
critério de sucesso e ajuste de inclinações
"""

import logging
from collections import defaultdict
from typing import Dict, Iterable, List, Sequence, Tuple

import numpy as np
from scipy.optimize import linear_sum_assignment
from scipy.stats import linregress

from ..models.evaluation import LogLogFit, NodeMatching, ThresholdFit
from ..models.signal import SpikeSignal
from ..utils.errors import InvalidInputError
from .signal_core import circular_distance_matrix

logger = logging.getLogger(__name__)

SUCCESS_FRACTION = 1.0 / 3.0


def match_nodes(true_nodes: Sequence[float], est_nodes: Sequence[float]) -> NodeMatching:
    """
    Casa estimativas e nós verdadeiros minimizando a distância circular total

    Args:
        true_nodes: Nós verdadeiros
        est_nodes: Nós estimados (mesmo tamanho)

    Returns:
        Permutação estimado -> verdadeiro e distâncias
    """
    if len(true_nodes) != len(est_nodes):
        raise InvalidInputError(f"tamanhos diferentes: {len(true_nodes)} vs {len(est_nodes)}")

    cost = circular_distance_matrix(est_nodes, true_nodes)
    rows, cols = linear_sum_assignment(cost)
    permutation = np.empty(len(est_nodes), dtype=int)
    permutation[rows] = cols
    distances = cost[np.arange(len(est_nodes)), permutation]
    return NodeMatching(permutation=permutation.tolist(), distances=distances.tolist())


def node_errors(
    truth: SpikeSignal,
    est_nodes: Sequence[float],
    est_amps: Sequence[complex],
) -> Tuple[np.ndarray, np.ndarray]:
    """Erros absolutos de nó (circular) e de amplitude por nó verdadeiro"""
    matching = match_nodes(truth.nodes, est_nodes)
    order = matching.estimate_for_true()
    est = np.asarray(est_nodes, dtype=float)[order]
    amps = np.asarray(est_amps, dtype=complex)[order]

    node_err = circular_distance_matrix(truth.nodes, est).diagonal().copy()
    amp_err = np.abs(truth.amplitudes_array - amps)
    return node_err, amp_err


def amplification_factors(
    truth: SpikeSignal,
    est_nodes: Sequence[float],
    est_amps: Sequence[complex],
    eps: float,
    omega: float,
) -> List[Tuple[float, float]]:
    """
    Fatores K_x = Omega |x - x~| / eps e K_alpha = |alpha - alpha~| / eps

    Returns:
        Lista (K_x, K_alpha) na ordem dos nós verdadeiros
    """
    if eps <= 0:
        raise InvalidInputError(f"fatores de amplificação exigem eps > 0 (eps={eps})")

    node_err, amp_err = node_errors(truth, est_nodes, est_amps)
    return list(zip((omega * node_err / eps).tolist(), (amp_err / eps).tolist()))


def is_success(truth: SpikeSignal, est_nodes: Sequence[float]) -> List[bool]:
    """Sucesso do nó k: erro < 1/3 da distância ao vizinho verdadeiro mais próximo"""
    if truth.n < 2:
        raise InvalidInputError(f"critério de sucesso exige n >= 2 (n={truth.n})")

    matching = match_nodes(truth.nodes, est_nodes)
    est = np.asarray(est_nodes, dtype=float)[matching.estimate_for_true()]
    errors = circular_distance_matrix(truth.nodes, est).diagonal()

    neighbors = circular_distance_matrix(truth.nodes, truth.nodes)
    np.fill_diagonal(neighbors, np.inf)
    return (errors < SUCCESS_FRACTION * neighbors.min(axis=1)).tolist()


def fit_loglog_slope(points: Iterable[Tuple[float, float]]) -> LogLogFit:
    """
    Mínimos quadrados ordinários em (log10 x, log10 y)

    Args:
        points: Pelo menos 3 pares (x, y) positivos

    Returns:
        Inclinação, intercepto e r^2
    """
    data = np.asarray(list(points), dtype=float)
    if data.ndim != 2 or data.shape[0] < 3 or data.shape[1] != 2:
        raise InvalidInputError(f"ajuste exige pelo menos 3 pontos (x, y), recebeu {data.shape}")
    if np.any(data <= 0) or not np.all(np.isfinite(data)):
        raise InvalidInputError("ajuste log-log exige valores positivos e finitos")

    log_x = np.log10(data[:, 0])
    log_y = np.log10(data[:, 1])
    if np.ptp(log_x) == 0:
        raise InvalidInputError("todos os x são iguais; inclinação indefinida")

    fit = linregress(log_x, log_y)
    return LogLogFit(slope=float(fit.slope), intercept=float(fit.intercept), r2=float(fit.rvalue ** 2))


def threshold_boundary(grid: Iterable[Tuple[float, float, float]]) -> ThresholdFit:
    """
    Fronteira de 50% de sucesso no plano (Delta, eps)

    Para cada coluna de Delta, localiza o eps em que a taxa de sucesso cruza
    0.5 (interpolação linear em log eps) e ajusta log eps* contra log Delta.

    Args:
        grid: Triplas (Delta, eps, taxa de sucesso)

    Returns:
        Inclinação ajustada e os pontos da fronteira
    """
    columns: Dict[float, List[Tuple[float, float]]] = defaultdict(list)
    for delta, eps, rate in grid:
        columns[float(delta)].append((float(eps), float(rate)))

    boundary: List[Tuple[float, float]] = []
    for delta in sorted(columns):
        cells = sorted(columns[delta])
        crossing = _crossing(cells)
        if crossing is None:
            logger.debug(f"Coluna Delta={delta:.3g} sem cruzamento de 50%; excluída")
            continue
        boundary.append((delta, crossing))

    if len(boundary) < 3:
        raise InvalidInputError(f"apenas {len(boundary)} colunas com cruzamento de 50% (mínimo 3)")

    fit = fit_loglog_slope(boundary)
    return ThresholdFit(slope=fit.slope, intercept=fit.intercept, r2=fit.r2, boundary=boundary)


def _crossing(cells: List[Tuple[float, float]]):
    for (eps0, rate0), (eps1, rate1) in zip(cells, cells[1:]):
        if rate0 >= 0.5 > rate1:
            fraction = (rate0 - 0.5) / (rate0 - rate1)
            log_eps = np.log10(eps0) + fraction * (np.log10(eps1) - np.log10(eps0))
            return float(10.0 ** log_eps)
    return None
