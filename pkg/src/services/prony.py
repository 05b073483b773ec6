"""
Método de Prony clássico

Passos: matriz de Hankel, mínimos quadrados para o polinômio de Prony,
raízes (autovalores da matriz companheira com um passo de Newton),
nós pelo argumento principal e amplitudes por Vandermonde.
"""

import logging
from typing import Tuple

import numpy as np
import scipy.linalg

from ..models.recovery import PronySolution
from ..models.signal import MomentSequence
from ..utils.errors import InvalidInputError, RootFindingError

logger = logging.getLogger(__name__)

# Tolerância relativa de posto: valores singulares < RANK_TOL * ||A|| são descartados
RANK_TOL = 1e-12
ROOT_RESIDUAL_TOL = 1e-8


def _require_samples(moments: MomentSequence, n: int):
    if n < 1:
        raise InvalidInputError(f"n deve ser >= 1 (n={n})")
    if len(moments) < 2 * n:
        raise InvalidInputError(f"são necessárias {2 * n} amostras, recebidas {len(moments)}")


def build_hankel(moments: MomentSequence, n: int) -> np.ndarray:
    """Matriz H_n com entradas (i, j) = m_{i+j}, 0 <= i, j <= n-1"""
    _require_samples(moments, n)
    values = moments.values
    return scipy.linalg.hankel(values[:n], values[n - 1:2 * n - 1])


def _hankel_stack(values: np.ndarray, n: int) -> np.ndarray:
    idx = np.add.outer(np.arange(n), np.arange(n))
    return values[:, idx]


def _coeffs_batch(values: np.ndarray, n: int) -> np.ndarray:
    """q = argmin ||H q + m_{n..2n-1}|| (mínima norma) para cada linha de values"""
    hankel = _hankel_stack(values, n)
    rhs = -values[:, n:2 * n, None]
    try:
        pseudo_inverse = np.linalg.pinv(hankel, rcond=RANK_TOL)
    except np.linalg.LinAlgError:
        pseudo_inverse = np.full(hankel.shape, np.nan, dtype=complex)
        for b in range(hankel.shape[0]):
            try:
                pseudo_inverse[b] = np.linalg.pinv(hankel[b], rcond=RANK_TOL)
            except np.linalg.LinAlgError:
                logger.debug(f"SVD não convergiu para a sequência {b}")
    return (pseudo_inverse @ rhs)[..., 0]


def prony_polynomial_coeffs(moments: MomentSequence, n: int) -> np.ndarray:
    """
    Resolve o problema de mínimos quadrados do polinômio de Prony

    Args:
        moments: Amostras (pelo menos 2n)
        n: Número de nós

    Returns:
        Coeficientes (q_0, ..., q_{n-1}) do polinômio mônico
        q(z) = z^n + sum_j q_j z^j; solução de mínima norma se H_n for singular
    """
    _require_samples(moments, n)
    return _coeffs_batch(moments.values[None, :2 * n], n)[0]


def _evaluate_monic(coeffs: np.ndarray, z: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """Horner para q(z) e q'(z); coeffs (..., n) em ordem crescente, z (..., m)"""
    value = np.ones_like(z)
    derivative = np.zeros_like(z)
    for j in range(coeffs.shape[-1] - 1, -1, -1):
        derivative = derivative * z + value
        value = value * z + coeffs[..., j, None]
    return value, derivative


def wrap_nodes(roots: np.ndarray) -> np.ndarray:
    """arg(z) / 2pi em (-1/2, 1/2]; o ângulo -pi vai para +1/2"""
    wrapped = np.angle(roots) / (2.0 * np.pi)
    return np.where(wrapped <= -0.5, 0.5, wrapped)


def _companion_stack(coeffs: np.ndarray) -> np.ndarray:
    batch, n = coeffs.shape
    companion = np.zeros((batch, n, n), dtype=complex)
    companion[:, np.arange(1, n), np.arange(n - 1)] = 1.0
    companion[:, :, -1] = -coeffs
    return companion


def _roots_batch(coeffs: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """
    Raízes de vários polinômios mônicos de mesmo grau

    Returns:
        (raízes (B, n), máscara de linhas aceitas pelo teste de resíduo)
    """
    coeffs = np.asarray(coeffs, dtype=complex)
    companion = _companion_stack(coeffs)
    try:
        roots = np.linalg.eigvals(companion)
    except np.linalg.LinAlgError:
        roots = np.full(coeffs.shape, np.nan, dtype=complex)
        for b in range(coeffs.shape[0]):
            try:
                roots[b] = np.linalg.eigvals(companion[b])
            except np.linalg.LinAlgError:
                logger.debug(f"Autovalores não convergiram para o polinômio {b}")

    # Um passo de Newton, aceito apenas quando reduz |q(r)|
    value, derivative = _evaluate_monic(coeffs, roots)
    with np.errstate(divide="ignore", invalid="ignore"):
        polished = roots - value / derivative
    polished_value, _ = _evaluate_monic(coeffs, polished)
    improve = np.isfinite(polished) & (np.abs(polished_value) < np.abs(value))
    roots = np.where(improve, polished, roots)
    value = np.where(improve, polished_value, value)

    scale = np.maximum(1.0, np.abs(coeffs).max(axis=-1, keepdims=True))
    with np.errstate(invalid="ignore"):
        ok = np.all(np.isfinite(roots) & (np.abs(value) <= ROOT_RESIDUAL_TOL * scale), axis=-1)
    return roots, ok


def polynomial_roots(coeffs: np.ndarray) -> np.ndarray:
    """
    Raízes do polinômio mônico z^n + sum_j q_j z^j

    Args:
        coeffs: (q_0, ..., q_{n-1}) em ordem crescente; o coeficiente líder 1 é implícito

    Returns:
        As n raízes, com multiplicidade
    """
    coeffs = np.atleast_1d(np.asarray(coeffs, dtype=complex))
    if coeffs.ndim != 1 or coeffs.size < 1:
        raise InvalidInputError(f"coeficientes inválidos: {coeffs}")

    roots, ok = _roots_batch(coeffs[None, :])
    if not ok[0]:
        raise RootFindingError("raízes do polinômio de Prony não convergiram", best_iterates=roots[0])
    return roots[0]


def solve_vandermonde_ls(roots: np.ndarray, rhs: np.ndarray) -> np.ndarray:
    """
    Amplitudes por mínimos quadrados: argmin ||V alpha - rhs||, V_{i,k} = z_k^i

    Args:
        roots: Nós complexos z_k
        rhs: Amostras m_0, ..., m_{M-1}

    Returns:
        Vetor de amplitudes (mínima norma se V for deficiente)
    """
    roots = np.atleast_1d(np.asarray(roots, dtype=complex))
    rhs = np.atleast_1d(np.asarray(rhs, dtype=complex))
    vandermonde = np.vander(roots, N=rhs.size, increasing=True).T
    amplitudes, _, _, _ = scipy.linalg.lstsq(vandermonde, rhs, cond=RANK_TOL)
    return amplitudes


def prony_nodes_batch(values: np.ndarray, n: int) -> Tuple[np.ndarray, np.ndarray]:
    """
    Passos 1-4 do método de Prony para várias sequências de uma vez

    Args:
        values: Matriz (B, >= 2n) de amostras, uma sequência por linha
        n: Número de nós

    Returns:
        (nós enrolados (B, n) ordenados, máscara de linhas resolvidas)
    """
    values = np.asarray(values, dtype=complex)
    if values.ndim != 2 or values.shape[1] < 2 * n:
        raise InvalidInputError(f"esperadas linhas com {2 * n} amostras, shape={values.shape}")

    coeffs = _coeffs_batch(values[:, :2 * n], n)
    roots, ok = _roots_batch(coeffs)
    wrapped = np.sort(wrap_nodes(roots), axis=-1)
    return wrapped, ok


def prony(moments: MomentSequence, n: int) -> PronySolution:
    """
    Método de Prony clássico

    Args:
        moments: Exatamente 2n amostras (as excedentes são ignoradas)
        n: Número de nós

    Returns:
        Raízes, nós enrolados em (-1/2, 1/2] em ordem crescente, amplitudes e resíduos
    """
    _require_samples(moments, n)
    if len(moments) > 2 * n:
        logger.warning(f"Prony recebeu {len(moments)} amostras; usando apenas as {2 * n} primeiras")

    values = moments.values[:2 * n]
    coeffs = prony_polynomial_coeffs(moments, n)
    hankel = build_hankel(moments, n)
    hankel_residual = float(np.linalg.norm(hankel @ coeffs + values[n:2 * n]))

    roots = polynomial_roots(coeffs)
    amplitudes = solve_vandermonde_ls(roots, values[:n])
    vandermonde = np.vander(roots, N=n, increasing=True).T
    vandermonde_residual = float(np.linalg.norm(vandermonde @ amplitudes - values[:n]))

    wrapped = wrap_nodes(roots)
    order = np.argsort(wrapped, kind="stable")

    return PronySolution(
        roots=roots[order],
        wrapped_nodes=wrapped[order],
        amplitudes=amplitudes[order],
        residuals=(hankel_residual, vandermonde_residual),
    )
