"""
ESPRIT (referência para comparação de precisão e tempo com o DPM)
"""

import logging
from typing import Sequence, Union

import numpy as np
import scipy.linalg

from ..models.recovery import EspritConfig, EspritResult
from ..models.signal import MomentSequence
from ..utils.errors import EspritRankError, InvalidInputError
from .prony import RANK_TOL, solve_vandermonde_ls

logger = logging.getLogger(__name__)


def esprit(moments: Union[MomentSequence, Sequence[complex]], config: EspritConfig) -> EspritResult:
    """
    Estima nós e amplitudes pelo subespaço de sinal da matriz de Hankel

    Args:
        moments: Amostras g(0), ..., g(M-1) (sequência ou MomentSequence)
        config: M, L e ordem n

    Returns:
        Nós Arg(psi_k)/2pi em ordem crescente e amplitudes por Vandermonde
        com todas as M amostras
    """
    if isinstance(moments, MomentSequence):
        moments = moments.values
    values = np.asarray(moments, dtype=complex).ravel()
    if values.size < config.m_samples:
        raise InvalidInputError(f"ESPRIT esperava {config.m_samples} amostras, recebeu {values.size}")
    values = values[:config.m_samples]

    n = config.n
    rows = config.hankel_rows
    hankel = scipy.linalg.hankel(values[:rows], values[rows - 1:])

    u, s, _ = scipy.linalg.svd(hankel, full_matrices=False)
    rank = int(np.sum(s > RANK_TOL * s[0])) if s[0] > 0 else 0
    if rank < n:
        raise EspritRankError(f"posto numérico {rank} < n={n} na matriz de Hankel", rank=rank)

    signal_space = u[:, :n]
    rotation, _, _, _ = scipy.linalg.lstsq(signal_space[:-1], signal_space[1:])
    psi = np.linalg.eigvals(rotation)

    nodes = np.sort(np.angle(psi) / (2.0 * np.pi))
    amplitudes = solve_vandermonde_ls(np.exp(2j * np.pi * nodes), values)
    logger.debug(f"ESPRIT: M={config.m_samples}, L={rows}, sigma_n/sigma_1={s[n - 1] / s[0]:.3g}")

    return EspritResult(
        nodes=nodes.tolist(),
        amplitudes=amplitudes.tolist(),
        singular_values=s[:n + 1].tolist(),
    )
