"""
Método de Prony Decimado (DPM)

Para cada lambda da grade resolve um Prony com as amostras g(lambda k),
enumera as soluções com aliasing, faz o histograma de todos os candidatos,
escolhe os n bins mais votados, calcula o conjunto de colisão e recupera
nós e amplitudes no maior lambda livre de colisão.

Todo lambda da grade é múltiplo inteiro do passo h, então posições que
diferem de um múltiplo de 1/h são indistinguíveis pelas amostras. Se a
grade é grossa demais (1/h < 1) essa rede de fantasmas cai dentro de
[-1/2, 1/2] e o DPM devolve empty-collision-set em vez de escolher.
"""

import logging
import math
from typing import Callable, List, Sequence, Set, Tuple

import numpy as np
from scipy.optimize import least_squares

from ..models.recovery import (
    AliasedSolutionSet,
    DealiasHistogram,
    DecimationGrid,
    DpmParams,
    RecoveryResult,
    RecoveryStatus,
)
from ..models.signal import SpikeSignal
from ..utils.errors import DealiasingError, InvalidInputError
from .prony import prony_nodes_batch, solve_vandermonde_ls

logger = logging.getLogger(__name__)

SampleProvider = Callable[[float, int], complex]

MIN_N_LAMBDA = 10


def default_n_bins(delta: float) -> int:
    """N_b = ceil(3 / Delta)"""
    if delta <= 0:
        raise InvalidInputError(f"delta deve ser positivo (delta={delta})")
    return int(math.ceil(3.0 / delta))


def default_n_lambda(omega: float) -> int:
    """N_lambda = ceil(Omega), com mínimo de 10"""
    return max(MIN_N_LAMBDA, int(math.ceil(omega)))


def decimation_grid(omega: float, n: int, n_lambda: int) -> DecimationGrid:
    """
    Grade uniforme de N_lambda pontos em J = [Omega/(2(2n-1)), Omega/(2n-1)]

    Args:
        omega: Largura de banda
        n: Número de nós
        n_lambda: Número de pontos (>= 2)

    Returns:
        Grade incluindo as duas extremidades
    """
    if omega <= 0:
        raise InvalidInputError(f"omega deve ser positivo (omega={omega})")
    if n < 1:
        raise InvalidInputError(f"n deve ser >= 1 (n={n})")
    if n_lambda < 2:
        raise InvalidInputError(f"n_lambda deve ser >= 2 (n_lambda={n_lambda})")

    right = omega / (2 * n - 1)
    lambdas = np.linspace(right / 2.0, right, n_lambda)
    return DecimationGrid(omega=float(omega), n=n, n_lambda=n_lambda, lambdas=lambdas)


def aliased_solutions(lam: float, wrapped_nodes: Sequence[float]) -> AliasedSolutionSet:
    """
    Todas as posições t = (y_j + m) / lambda, m inteiro, com |t| <= 1/2

    Args:
        lam: Passo de decimação
        wrapped_nodes: Nós enrolados y_j em (-1/2, 1/2]

    Returns:
        Conjunto X_lambda com o índice j de origem de cada candidato
    """
    return aliased_solutions_batch([lam], [wrapped_nodes])[0]


def aliased_solutions_batch(
    lambdas: Sequence[float],
    wrapped_nodes: Sequence[Sequence[float]],
) -> List[AliasedSolutionSet]:
    """
    aliased_solutions para vários lambdas de uma vez

    Os deslocamentos m cobrem o maior lambda; posições fora de [-1/2, 1/2]
    são descartadas, então cada conjunto sai igual ao do cálculo isolado.
    """
    lams = np.asarray(lambdas, dtype=float).ravel()
    if lams.size == 0:
        return []
    if np.any(lams <= 0):
        raise InvalidInputError(f"lambda deve ser positivo (lambda={lams.min()})")

    wrapped = np.asarray(wrapped_nodes, dtype=float).reshape(lams.size, -1)
    if wrapped.size == 0:
        empty = np.array([], dtype=float)
        return [
            AliasedSolutionSet(lam=float(lam), wrapped_nodes=empty,
                               node_index=np.array([], dtype=int), positions=empty)
            for lam in lams
        ]

    m_low = int(np.floor(-lams.max() / 2.0 - wrapped.max()))
    m_high = int(np.ceil(lams.max() / 2.0 - wrapped.min()))
    shifts = np.arange(m_low, m_high + 1, dtype=float)

    # (lambda, j, m): a ordem de np.nonzero é a do cálculo por lambda
    positions = (wrapped[:, :, None] + shifts[None, None, :]) / lams[:, None, None]
    mask = np.abs(positions) <= 0.5
    owners, node_index, _ = np.nonzero(mask)
    selected = positions[mask]
    splits = np.cumsum(np.bincount(owners, minlength=lams.size))[:-1]

    return [
        AliasedSolutionSet(lam=float(lam), wrapped_nodes=wrapped[i], node_index=index, positions=pos)
        for i, (lam, index, pos) in enumerate(zip(lams, np.split(node_index, splits), np.split(selected, splits)))
    ]


def build_histogram(all_sets: Sequence[AliasedSolutionSet], n_bins: int) -> DealiasHistogram:
    """
    Histograma de todos os candidatos com N_b bins uniformes em [-1/2, 1/2]

    Args:
        all_sets: Conjuntos X_lambda
        n_bins: Número de bins

    Returns:
        Contagens, lambdas contribuintes por bin e somas das posições
    """
    if n_bins < 1:
        raise InvalidInputError(f"n_bins deve ser >= 1 (n_bins={n_bins})")

    edges = np.linspace(-0.5, 0.5, n_bins + 1)
    if all_sets:
        positions = np.concatenate([s.positions for s in all_sets])
        owners = np.concatenate([np.full(len(s), i, dtype=int) for i, s in enumerate(all_sets)])
    else:
        positions = np.array([], dtype=float)
        owners = np.array([], dtype=int)

    bins = np.clip(np.floor((positions + 0.5) * n_bins).astype(int), 0, n_bins - 1)
    counts = np.bincount(bins, minlength=n_bins)
    sums = np.bincount(bins, weights=positions, minlength=n_bins)

    # pares distintos (bin, conjunto) codificados em um inteiro
    n_sets = max(len(all_sets), 1)
    set_lambdas = np.array([s.lam for s in all_sets], dtype=float)
    pairs = np.unique(bins * n_sets + owners)
    pair_bins = pairs // n_sets
    pair_lambdas = set_lambdas[pairs % n_sets]

    return DealiasHistogram(
        n_bins=n_bins,
        edges=edges,
        counts=counts,
        candidate_sums=sums,
        pair_bins=pair_bins.astype(int),
        pair_lambdas=pair_lambdas,
    )


def rank_bins(hist: DealiasHistogram) -> np.ndarray:
    """Bins não vazios por contagem, lambdas contribuintes e menor índice"""
    nonempty = np.flatnonzero(hist.counts > 0)
    contributors = hist.contributor_counts[nonempty]
    order = np.lexsort((nonempty, -contributors, -hist.counts[nonempty]))
    return nonempty[order]


def top_bins(hist: DealiasHistogram, n: int) -> List[int]:
    """
    Os n bins mais votados

    Empates são desfeitos pelo número de lambdas contribuintes e depois
    pelo menor índice.
    """
    ranked = rank_bins(hist)
    if ranked.size < n:
        raise DealiasingError(f"apenas {ranked.size} bins não vazios para {n} nós")
    return ranked[:n].tolist()


def selection_is_tied(hist: DealiasHistogram, n: int) -> bool:
    """True se o n-ésimo e o (n+1)-ésimo bins empatam em contagem e contribuintes"""
    ranked = rank_bins(hist)
    if ranked.size <= n:
        return False
    last, first_out = ranked[n - 1], ranked[n]
    contributors = hist.contributor_counts
    return bool(
        hist.counts[last] == hist.counts[first_out]
        and contributors[last] == contributors[first_out]
    )


def alias_partners(grid: DecimationGrid, positions: Sequence[float]) -> List[float]:
    """
    Posições com fantasma t +- 1/h dentro de [-1/2, 1/2]

    Args:
        grid: Grade de decimação
        positions: Centros dos bins escolhidos

    Returns:
        As posições ambíguas (vazio quando 1/h >= 1)
    """
    period = grid.alias_period
    return [
        float(t) for t in positions
        if t + period < 0.5 or t - period > -0.5
    ]


def collision_set(hist: DealiasHistogram, bins: Sequence[int]) -> Set[float]:
    """Lambdas cujo X_lambda tem candidato em todos os bins selecionados"""
    selected = np.unique(np.asarray(bins, dtype=int))
    hit = np.isin(hist.pair_bins, selected)
    lambdas, hits = np.unique(hist.pair_lambdas[hit], return_counts=True)
    return set(lambdas[hits == selected.size].tolist())


def _wrapped_angles(signal: SpikeSignal, lam: float) -> np.ndarray:
    diff = lam * np.subtract.outer(signal.nodes_array, signal.nodes_array)
    return np.abs(np.angle(np.exp(2j * np.pi * diff)))


def wrapped_separation(signal: SpikeSignal, lam: float) -> float:
    """min_{s != k} |arg(exp(2 pi i lambda (x_k - x_s)))|, em [0, pi]"""
    if signal.n < 2:
        raise InvalidInputError(f"separação exige n >= 2 (n={signal.n})")
    upper = np.triu_indices(signal.n, k=1)
    return float(_wrapped_angles(signal, lam)[upper].min())


def inter_cluster_separation(signal: SpikeSignal, lam: float) -> float:
    """
    wrapped_separation restrita a pares de nós de clusters diferentes

    Returns:
        O menor ângulo, ou NaN se todos os nós estão no mesmo cluster
    """
    if signal.n < 2:
        raise InvalidInputError(f"separação exige n >= 2 (n={signal.n})")
    ids = np.asarray(signal.cluster_ids)
    rows, cols = np.triu_indices(signal.n, k=1)
    between = ids[rows] != ids[cols]
    if not between.any():
        return float("nan")
    return float(_wrapped_angles(signal, lam)[rows[between], cols[between]].min())


def refine_estimates(
    lambdas: Sequence[float],
    values: np.ndarray,
    nodes: Sequence[float],
    amplitudes: Sequence[complex],
) -> Tuple[np.ndarray, np.ndarray]:
    """
    Ajuste não linear de nós e amplitudes sobre todas as amostras decimadas

    Minimiza sum |sum_j a_j exp(2 pi i x_j lambda k) - g(lambda k)|^2 em todos
    os (lambda, k) finitos, partindo da estimativa do DPM.

    Args:
        lambdas: Grade de decimação
        values: Amostras, uma linha por lambda
        nodes: Nós iniciais
        amplitudes: Amplitudes iniciais

    Returns:
        (nós, amplitudes) ajustados, na mesma ordem da entrada

    Raises:
        DealiasingError: se o ajuste não convergir
    """
    values = np.asarray(values, dtype=complex)
    freqs = (np.asarray(lambdas, dtype=float)[:, None] * np.arange(values.shape[1])[None, :]).ravel()
    samples = values.ravel()
    finite = np.isfinite(samples)
    freqs, samples = freqs[finite], samples[finite]

    n = len(nodes)
    if 2 * samples.size < 3 * n:
        raise DealiasingError(f"amostras finitas insuficientes para o ajuste ({samples.size})")

    def unpack(theta):
        return theta[:n], theta[n:2 * n] + 1j * theta[2 * n:]

    def residuals(theta):
        x, alpha = unpack(theta)
        r = np.exp(2j * np.pi * np.outer(freqs, x)) @ alpha - samples
        return np.concatenate([r.real, r.imag])

    def jacobian(theta):
        x, alpha = unpack(theta)
        basis = np.exp(2j * np.pi * np.outer(freqs, x))
        d_nodes = 2j * np.pi * freqs[:, None] * basis * alpha[None, :]
        jac = np.hstack([d_nodes, basis, 1j * basis])
        return np.vstack([jac.real, jac.imag])

    amplitudes = np.asarray(amplitudes, dtype=complex)
    theta0 = np.concatenate([np.asarray(nodes, dtype=float), amplitudes.real, amplitudes.imag])
    try:
        fit = least_squares(residuals, theta0, jac=jacobian, method="lm", x_scale="jac")
    except ValueError as e:
        raise DealiasingError(f"ajuste não linear inválido: {e}") from e
    if not fit.success:
        raise DealiasingError(f"ajuste não linear não convergiu: {fit.message}")

    return unpack(fit.x)


def _sample_block(sample_provider: SampleProvider, lambdas: Sequence[float], count: int) -> np.ndarray:
    block = getattr(sample_provider, "block", None)
    if block is not None:
        return np.asarray(block(lambdas, count), dtype=complex)
    return np.array(
        [[sample_provider(lam, k) for k in range(count)] for lam in lambdas],
        dtype=complex,
    )


def _pick_candidate(aliased: AliasedSolutionSet, hist: DealiasHistogram, index: int):
    in_bin = np.flatnonzero(hist.bin_of(aliased.positions) == index)
    target = hist.bin_mean(index)
    best = in_bin[np.argmin(np.abs(aliased.positions[in_bin] - target))]
    return int(aliased.node_index[best]), float(aliased.positions[best])


def _refine(grid: DecimationGrid, values, nodes, amplitudes, params: DpmParams):
    """Ajuste final; mantém a estimativa do DPM se ele falhar ou sair do bin"""
    try:
        refined_nodes, refined_amps = refine_estimates(grid.lambdas, values, nodes, amplitudes)
    except DealiasingError as e:
        logger.debug(f"Refinamento descartado: {e}")
        return nodes, amplitudes, False

    # mais de três bins (~Delta) é troca de nó, não refinamento
    moved = np.max(np.abs(refined_nodes - nodes))
    if moved > 3.0 / params.n_bins or np.any(np.abs(refined_nodes) > 0.5):
        logger.debug(f"Refinamento descartado: nós deslocados em {moved:.3g}")
        return nodes, amplitudes, False
    return refined_nodes, refined_amps, True


def dpm(
    sample_provider: SampleProvider,
    params: DpmParams,
    diagnostics: bool = False,
) -> RecoveryResult:
    """
    Executa o Método de Prony Decimado

    Args:
        sample_provider: Função (lambda, k) -> g(lambda k); se tiver um
            método block(lambdas, count), as amostras são lidas em bloco
        params: Omega, n, N_lambda, N_b e o refinamento opcional
        diagnostics: Se True, inclui diagnósticos por lambda no resultado

    Returns:
        Resultado com status, nós/amplitudes estimados, lambda* e |Lambda|
    """
    n = params.n
    grid = decimation_grid(params.omega, n, params.n_lambda)
    lambdas = grid.lambdas

    values = _sample_block(sample_provider, lambdas.tolist(), 2 * n)
    wrapped, solved = prony_nodes_batch(values, n)

    all_sets = aliased_solutions_batch(lambdas[solved], wrapped[solved])
    star_values = {float(lam): values[i] for i, lam in enumerate(lambdas)}

    per_lambda = None
    if diagnostics:
        per_lambda = [
            {"lambda": float(lam), "solved": bool(solved[i]), "wrapped_nodes": wrapped[i].tolist()}
            for i, lam in enumerate(lambdas)
        ]

    if not all_sets:
        logger.warning(f"Prony falhou em todos os {len(lambdas)} lambdas da grade")
        return RecoveryResult(status=RecoveryStatus.PRONY_FAILURE, per_lambda_diagnostics=per_lambda)
    if len(all_sets) < len(lambdas):
        logger.debug(f"Prony falhou em {len(lambdas) - len(all_sets)} lambdas; seguindo com o restante")

    hist = build_histogram(all_sets, params.n_bins)
    try:
        bins = top_bins(hist, n)
    except DealiasingError as e:
        logger.warning(f"Dealiasing falhou: {e}")
        return RecoveryResult(status=RecoveryStatus.EMPTY_COLLISION_SET, per_lambda_diagnostics=per_lambda)

    ambiguous = alias_partners(grid, [hist.bin_mean(b) for b in bins])
    if ambiguous:
        logger.warning(
            f"Grade grossa: período de fantasmas 1/h={grid.alias_period:.3g} < 1 deixa "
            f"{len(ambiguous)} nós ambíguos; use N_lambda >= Omega"
        )
        return RecoveryResult(
            status=RecoveryStatus.EMPTY_COLLISION_SET,
            selected_bins=bins,
            per_lambda_diagnostics=per_lambda,
        )

    if selection_is_tied(hist, n):
        logger.debug("Empate entre o último bin escolhido e o primeiro descartado")
        return RecoveryResult(
            status=RecoveryStatus.EMPTY_COLLISION_SET,
            selected_bins=bins,
            per_lambda_diagnostics=per_lambda,
        )

    lambda_set = collision_set(hist, bins)
    if per_lambda is not None:
        for entry in per_lambda:
            entry["in_collision_set"] = entry["lambda"] in lambda_set

    if not lambda_set:
        logger.debug("Conjunto de colisão vazio")
        return RecoveryResult(
            status=RecoveryStatus.EMPTY_COLLISION_SET,
            selected_bins=bins,
            per_lambda_diagnostics=per_lambda,
        )

    lambda_star = max(lambda_set)
    star_set = next(s for s in all_sets if s.lam == lambda_star)
    picks = [_pick_candidate(star_set, hist, b) for b in bins]

    origins = [origin for origin, _ in picks]
    if len(set(origins)) < n:
        logger.debug(f"Bins selecionados compartilham o mesmo nó de Prony em lambda*={lambda_star}")
        return RecoveryResult(
            status=RecoveryStatus.EMPTY_COLLISION_SET,
            lambda_star=lambda_star,
            collision_set_size=len(lambda_set),
            selected_bins=bins,
            per_lambda_diagnostics=per_lambda,
        )

    nodes = np.array([position for _, position in picks])
    amplitudes = solve_vandermonde_ls(np.exp(2j * np.pi * nodes * lambda_star), star_values[lambda_star][:n])

    refined = False
    if params.refine:
        nodes, amplitudes, refined = _refine(grid, values, nodes, amplitudes, params)

    order = np.argsort(nodes, kind="stable")
    return RecoveryResult(
        status=RecoveryStatus.SUCCESS,
        est_nodes=nodes[order].tolist(),
        est_amplitudes=amplitudes[order].tolist(),
        lambda_star=float(lambda_star),
        collision_set_size=len(lambda_set),
        selected_bins=bins,
        refined=refined,
        per_lambda_diagnostics=per_lambda,
    )
