"""
Testes unitários para o método de Prony clássico
"""

import logging

import pytest
import numpy as np
from pathlib import Path

import sys
sys.path.append(str(Path(__file__).parent.parent.parent / "src"))

from unittest.mock import patch

from src.models.signal import ClusterConfig, MomentSequence, NoiseMode, SpikeSignal
from src.services.metrics import match_nodes
from src.services.prony import (
    build_hankel,
    polynomial_roots,
    prony,
    prony_nodes_batch,
    prony_polynomial_coeffs,
    solve_vandermonde_ls,
    wrap_nodes,
)
from src.services.signal_core import add_noise, make_clustered_signal, sample_spectrum
from src.utils.errors import InvalidInputError, RootFindingError


def random_signal(rng, n, min_sep=0.05):
    """Sinal aleatório com separação circular mínima min_sep"""
    while True:
        nodes = rng.uniform(-0.5, 0.5, n)
        diff = np.abs(np.subtract.outer(nodes, nodes)) % 1.0
        diff = np.minimum(diff, 1.0 - diff)
        np.fill_diagonal(diff, 1.0)
        if diff.min() >= min_sep:
            break
    moduli = rng.uniform(1.0 / 3.0, 1.0, n)
    phases = rng.uniform(0, 2 * np.pi, n)
    return SpikeSignal(nodes=nodes.tolist(), amplitudes=(moduli * np.exp(1j * phases)).tolist())


class TestHankel:
    """Testes da matriz de Hankel e do polinômio de Prony"""

    def test_hankel(self):
        """Testa H_n com entradas m_{i+j}"""
        moments = MomentSequence(lam=1.0, values=[1, 2, 3, 4, 5, 6])
        hankel = build_hankel(moments, 3)

        np.testing.assert_array_equal(hankel, [[1, 2, 3], [2, 3, 4], [3, 4, 5]])

    def test_amostras_insuficientes(self):
        """Testa rejeição de menos de 2n amostras"""
        moments = MomentSequence(lam=1.0, values=[1, 2, 3])
        with pytest.raises(InvalidInputError):
            build_hankel(moments, 2)
        with pytest.raises(InvalidInputError):
            prony(moments, 2)

    def test_coeficientes(self):
        """Testa que as raízes do polinômio são as exponenciais dos nós"""
        signal = SpikeSignal(nodes=[-0.2, 0.1], amplitudes=[1.0, 2.0])
        coeffs = prony_polynomial_coeffs(sample_spectrum(signal, 1.0, 4), 2)
        z = np.exp(2j * np.pi * np.array([-0.2, 0.1]))

        np.testing.assert_allclose(coeffs, [z[0] * z[1], -(z[0] + z[1])], atol=1e-12)


class TestRaizes:
    """Testes para polynomial_roots"""

    def test_raizes_reais(self):
        """Testa (z - 1)(z - 2) = z^2 - 3z + 2"""
        roots = np.sort_complex(polynomial_roots([2.0, -3.0]))

        np.testing.assert_allclose(roots, [1.0, 2.0], atol=1e-12)

    def test_coeficientes_invalidos(self):
        """Testa falha de convergência com coeficientes não finitos"""
        with pytest.raises(RootFindingError) as exc_info:
            polynomial_roots([np.nan, 1.0])

        assert len(exc_info.value.best_iterates) == 2

    def test_residuos_aleatorios(self):
        """Testa |q(r)| < 1e-10 para polinômios mônicos aleatórios"""
        rng = np.random.default_rng(0)
        for _ in range(1000):
            n = int(rng.integers(1, 7))
            true_roots = np.sqrt(rng.uniform(0, 1, n)) * np.exp(2j * np.pi * rng.uniform(0, 1, n))
            monic = np.poly(true_roots)
            coeffs = monic[::-1][:-1]

            roots = polynomial_roots(coeffs)
            residuals = np.abs(np.polyval(monic, roots))

            assert roots.size == n
            assert residuals.max() < 1e-10

    def test_residuo_na_escala_dos_coeficientes(self):
        """Testa que o resíduo é medido contra tol * max(1, ||q||), sem fator |r|^n"""
        # (z - 1)(z - 100); 100.01 sai do passo de Newton com |q(r)| ~ 1e-4 > 1e-8 * 101
        with patch("numpy.linalg.eigvals", return_value=np.array([[100.01 + 0j, 1.0 + 0j]])):
            with pytest.raises(RootFindingError):
                polynomial_roots([100.0, -101.0])

    def test_enrolamento_do_angulo_pi(self):
        """Testa que o ângulo -pi vira +1/2 e os demais ficam em (-1/2, 1/2]"""
        wrapped = wrap_nodes(np.array([complex(-1.0, -0.0), 1j, -1j, 1.0]))

        np.testing.assert_allclose(wrapped, [0.5, 0.25, -0.25, 0.0], atol=1e-15)


class TestVandermonde:
    """Testes para solve_vandermonde_ls"""

    def test_sistema_exato(self):
        """Testa amplitudes (2, 3) com nós 1 e -1"""
        amplitudes = solve_vandermonde_ls([1.0, -1.0], [5.0, -1.0, 5.0])

        np.testing.assert_allclose(amplitudes, [2.0, 3.0], atol=1e-12)


class TestProny:
    """Testes do método de Prony completo"""

    def test_um_no(self):
        """Testa recuperação exata de um nó em 1/4 com amplitude 2"""
        signal = SpikeSignal(nodes=[0.25], amplitudes=[2.0])
        solution = prony(sample_spectrum(signal, 1.0, 2), 1)

        assert solution.wrapped_nodes[0] == pytest.approx(0.25, abs=1e-12)
        assert solution.amplitudes[0] == pytest.approx(2.0, abs=1e-12)
        assert solution.residuals[0] < 1e-12

    def test_tres_nos(self):
        """Testa recuperação sem ruído de três nós, ordenados"""
        signal = SpikeSignal(nodes=[-0.3, 0.05, 0.2], amplitudes=[1.0, 0.5j, -0.7])
        solution = prony(sample_spectrum(signal, 1.0, 6), 3)

        np.testing.assert_allclose(solution.wrapped_nodes, [-0.3, 0.05, 0.2], atol=1e-8)
        np.testing.assert_allclose(solution.amplitudes, [1.0, 0.5j, -0.7], atol=1e-7)
        assert list(solution.wrapped_nodes) == sorted(solution.wrapped_nodes)

    def test_amostras_excedentes(self, caplog):
        """Testa aviso e uso apenas das 2n primeiras amostras"""
        signal = SpikeSignal(nodes=[-0.1, 0.2], amplitudes=[1.0, 1.0])
        moments = sample_spectrum(signal, 1.0, 10)

        with caplog.at_level(logging.WARNING):
            solution = prony(moments, 2)

        assert "amostras" in caplog.text
        np.testing.assert_allclose(solution.wrapped_nodes, [-0.1, 0.2], atol=1e-8)

    def test_sinais_aleatorios_sem_ruido(self):
        """Testa recuperação exata em sinais aleatórios com Delta >= 0.05"""
        rng = np.random.default_rng(1)
        for _ in range(500):
            signal = random_signal(rng, int(rng.integers(1, 6)))
            solution = prony(sample_spectrum(signal, 1.0, 2 * signal.n), signal.n)

            matching = match_nodes(signal.nodes, solution.wrapped_nodes)
            order = matching.estimate_for_true()

            assert max(matching.distances) < 1e-8
            np.testing.assert_allclose(solution.amplitudes[order], signal.amplitudes_array, atol=1e-7)


class TestPronyEmLote:
    """Testes para prony_nodes_batch"""

    def test_lote_igual_individual(self):
        """Testa que o lote reproduz soluções individuais"""
        signal = SpikeSignal(nodes=[-0.3, 0.1, 0.15], amplitudes=[1.0, 0.6, 0.9j])
        lambdas = [1.0, 1.3, 1.7]
        values = np.array([sample_spectrum(signal, lam, 6).values for lam in lambdas])

        wrapped, ok = prony_nodes_batch(values, 3)

        assert ok.all()
        for i, lam in enumerate(lambdas):
            single = prony(sample_spectrum(signal, lam, 6), 3)
            np.testing.assert_allclose(wrapped[i], single.wrapped_nodes, atol=1e-10)

    def test_linha_invalida(self):
        """Testa que uma linha com NaN é marcada como não resolvida"""
        signal = SpikeSignal(nodes=[-0.2, 0.2], amplitudes=[1.0, 1.0])
        good = sample_spectrum(signal, 1.0, 4).values
        values = np.array([good, np.full(4, np.nan + 0j)])

        _, ok = prony_nodes_batch(values, 2)

        assert ok.tolist() == [True, False]

    def test_formato_invalido(self):
        """Testa rejeição de linhas curtas"""
        with pytest.raises(InvalidInputError):
            prony_nodes_batch(np.ones((2, 3), dtype=complex), 2)


def projection_residuals(roots: np.ndarray, values: np.ndarray) -> np.ndarray:
    """||m - P_V m|| para cada linha de raízes (G, n), V_{k,j} = z_j^k"""
    k = np.arange(values.size)
    vandermonde = roots[:, None, :] ** k[None, :, None]
    basis, _ = np.linalg.qr(vandermonde)
    projected = basis @ (basis.conj().transpose(0, 2, 1) @ values[None, :, None])
    return np.linalg.norm(values[None, :, None] - projected, axis=(1, 2))


class TestPropriedades:
    """Simetrias do Prony e comparação com ajuste por força bruta"""

    def test_simetria_conjugada(self):
        """Testa raízes fechadas por conjugação para amostras reais"""
        signal = SpikeSignal(nodes=[-0.2, -0.05, 0.05, 0.2], amplitudes=[1.0, 0.5, 0.5, 1.0])
        moments = sample_spectrum(signal, 1.0, 8)
        assert np.abs(moments.values.imag).max() < 1e-12

        roots = prony(moments, 4).roots

        for root in roots:
            assert np.abs(roots - np.conj(root)).min() < 1e-8

    def test_escala_das_amplitudes(self):
        """Testa nós invariantes e amplitudes multiplicadas por c"""
        factor = 2.0 - 1.5j
        signal = random_signal(np.random.default_rng(3), 4)

        base = prony(sample_spectrum(signal, 1.0, 8), 4)
        scaled = prony(sample_spectrum(signal.scaled(factor), 1.0, 8), 4)

        np.testing.assert_allclose(scaled.wrapped_nodes, base.wrapped_nodes, atol=1e-10)
        np.testing.assert_allclose(scaled.amplitudes, factor * base.amplitudes, rtol=1e-8)

    def test_cluster_ruidoso_contra_forca_bruta(self):
        """
        Testa Prony num cluster ruidoso contra um ajuste por força bruta

        A grade cobre os dois nós do cluster a +-5e-4 da verdade com o nó isolado
        fixo; nela o melhor resíduo é <= ||e||. O Prony interpola as 2n amostras,
        então não pode ficar atrás da grade, e o erro de nó respeita C * Delta^-2 * eps.
        """
        delta, eps = 1e-2, 1e-8
        signal = make_clustered_signal(ClusterConfig(n=3, ell=2, delta=delta, omega=5.0, seed=21))
        clean = sample_spectrum(signal, 1.0, 6)
        noisy = add_noise(clean, eps, NoiseMode.BOUNDARY, rng_seed=4)

        solution = prony(noisy, 3)

        cluster = [i for i, flag in enumerate(signal.in_cluster) if flag]
        isolated = [i for i, flag in enumerate(signal.in_cluster) if not flag]
        true_nodes = signal.nodes_array
        offsets = np.linspace(-5e-4, 5e-4, 101)
        first, second = np.meshgrid(offsets, offsets, indexing="ij")
        grid = np.empty((first.size, 3))
        grid[:, 0] = true_nodes[cluster[0]] + first.ravel()
        grid[:, 1] = true_nodes[cluster[1]] + second.ravel()
        grid[:, 2] = true_nodes[isolated[0]]

        brute = projection_residuals(np.exp(2j * np.pi * grid), noisy.values)
        fitted = projection_residuals(solution.roots[None, :], noisy.values)[0]

        assert brute.min() <= eps * np.sqrt(6) * (1 + 1e-6)
        assert fitted <= brute.min() + 1e-12
        matching = match_nodes(signal.nodes, solution.wrapped_nodes)
        assert max(matching.distances) <= 100 * delta ** -2 * eps
