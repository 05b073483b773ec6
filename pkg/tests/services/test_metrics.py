"""
Testes unitários para o serviço de métricas
"""

import itertools

import pytest
import numpy as np
from pathlib import Path

import sys
sys.path.append(str(Path(__file__).parent.parent.parent / "src"))

from src.models.signal import SpikeSignal
from src.services.metrics import (
    amplification_factors,
    fit_loglog_slope,
    is_success,
    match_nodes,
    node_errors,
    threshold_boundary,
)
from src.services.signal_core import circular_distance_matrix, wrap_to_domain
from src.utils.errors import InvalidInputError


class TestCasamento:
    """Testes para match_nodes"""

    def test_listas_identicas(self):
        """Testa permutação identidade com distâncias nulas"""
        matching = match_nodes([-0.3, 0.0, 0.3], [-0.3, 0.0, 0.3])

        assert matching.permutation == [0, 1, 2]
        assert matching.distances == [0.0, 0.0, 0.0]

    def test_borda(self):
        """Testa casamento através de -1/2 ~ 1/2"""
        matching = match_nodes([-0.49], [0.49])

        assert matching.distances[0] == pytest.approx(0.02)

    def test_ordem_reversa(self):
        """Testa estimativas em ordem reversa"""
        matching = match_nodes([-0.3, 0.0, 0.3], [0.3, 0.0, -0.3])

        assert matching.permutation == [2, 1, 0]
        assert matching.total_distance == pytest.approx(0.0)
        assert matching.estimate_for_true().tolist() == [2, 1, 0]

    def test_tamanhos_diferentes(self):
        """Testa rejeição de listas com tamanhos diferentes"""
        with pytest.raises(InvalidInputError):
            match_nodes([0.1, 0.2], [0.1])

    def test_otimalidade(self):
        """Testa contra a busca exaustiva de permutações"""
        rng = np.random.default_rng(0)
        for _ in range(200):
            n = int(rng.integers(1, 7))
            true_nodes = rng.uniform(-0.5, 0.5, n)
            est_nodes = rng.uniform(-0.5, 0.5, n)
            cost = circular_distance_matrix(est_nodes, true_nodes)

            best = min(sum(cost[i, p[i]] for i in range(n)) for p in itertools.permutations(range(n)))
            matching = match_nodes(true_nodes, est_nodes)

            assert sorted(matching.permutation) == list(range(n))
            assert matching.total_distance == pytest.approx(best, abs=1e-12)

    def test_melhor_que_pareamento_ordenado(self):
        """Testa que o casamento não é pior que parear listas ordenadas"""
        rng = np.random.default_rng(1)
        for _ in range(100):
            true_nodes = np.sort(rng.uniform(-0.5, 0.5, 4))
            est_nodes = np.sort(wrap_to_domain(true_nodes + rng.normal(0, 0.1, 4)))
            sorted_total = circular_distance_matrix(true_nodes, est_nodes).diagonal().sum()

            assert match_nodes(true_nodes, est_nodes).total_distance <= sorted_total + 1e-12


class TestFatoresDeAmplificacao:
    """Testes para amplification_factors"""

    @pytest.fixture
    def truth(self):
        """Sinal de dois nós com amplitudes unitárias"""
        return SpikeSignal(nodes=[0.1, 0.3], amplitudes=[1.0, 1.0])

    def test_fator_de_no(self, truth):
        """Testa K_x = Omega * erro / eps = 5 * 0.002 / 0.01 = 1"""
        factors = amplification_factors(truth, [0.102, 0.3], [1.0, 1.0], eps=0.01, omega=5.0)

        assert factors[0][0] == pytest.approx(1.0)
        assert factors[0][1] == 0.0
        assert factors[1] == (0.0, 0.0)

    def test_fator_de_amplitude(self, truth):
        """Testa K_alpha = 0.1 / 1e-3 = 100"""
        factors = amplification_factors(truth, [0.1, 0.3], [1.1, 1.0], eps=1e-3, omega=5.0)

        assert factors[0][1] == pytest.approx(100.0)

    def test_casamento_antes_do_calculo(self, truth):
        """Testa que estimativas fora de ordem são casadas antes"""
        factors = amplification_factors(truth, [0.3, 0.102], [1.0, 1.0], eps=0.01, omega=5.0)

        assert factors[0][0] == pytest.approx(1.0)
        assert factors[1][0] == pytest.approx(0.0)

    def test_eps_zero(self, truth):
        """Testa rejeição de eps = 0"""
        with pytest.raises(InvalidInputError):
            amplification_factors(truth, [0.1, 0.3], [1.0, 1.0], eps=0.0, omega=5.0)

    def test_invariancia_por_translacao(self):
        """Testa que transladar sinal e estimativas juntos não muda os fatores"""
        truth = SpikeSignal(nodes=[-0.2, 0.05, 0.4], amplitudes=[1.0, 0.5j, 0.7])
        est_nodes = np.array([-0.199, 0.052, 0.395])
        est_amps = [1.01, 0.49j, 0.7]

        shift = 0.37
        shifted = SpikeSignal(
            nodes=wrap_to_domain(truth.nodes_array + shift).tolist(),
            amplitudes=truth.amplitudes,
        )
        base = amplification_factors(truth, est_nodes, est_amps, eps=1e-3, omega=10.0)
        moved = amplification_factors(shifted, wrap_to_domain(est_nodes + shift), est_amps, eps=1e-3, omega=10.0)

        np.testing.assert_allclose(np.array(moved), np.array(base), atol=1e-9)

    def test_erros_absolutos(self, truth):
        """Testa erros de nó e amplitude na ordem dos nós verdadeiros"""
        node_err, amp_err = node_errors(truth, [0.31, 0.1], [2.0, 1.0])

        np.testing.assert_allclose(node_err, [0.0, 0.01], atol=1e-12)
        np.testing.assert_allclose(amp_err, [0.0, 1.0], atol=1e-12)


class TestSucesso:
    """Testes para is_success"""

    @pytest.fixture
    def truth(self):
        """Nós 0.1, 0.13 e 0.4"""
        return SpikeSignal(nodes=[0.1, 0.13, 0.4], amplitudes=[1.0, 1.0, 1.0])

    def test_sucesso(self, truth):
        """Testa erro 0.005 < 0.03 / 3"""
        assert is_success(truth, [0.105, 0.13, 0.4]) == [True, True, True]

    def test_falha(self, truth):
        """Testa erro 0.02 > 0.03 / 3"""
        assert is_success(truth, [0.12, 0.13, 0.4])[0] is False

    def test_desigualdade_estrita(self):
        """Testa erro exatamente igual a um terço da distância ao vizinho"""
        truth = SpikeSignal(nodes=[-0.25, 0.125], amplitudes=[1.0, 1.0])

        assert is_success(truth, [-0.375, 0.125]) == [False, True]

    def test_independe_das_amplitudes(self, truth):
        """Testa que só os nós importam"""
        scaled = truth.scaled(1e-6)

        assert is_success(scaled, [0.105, 0.13, 0.4]) == is_success(truth, [0.105, 0.13, 0.4])

    def test_n_um(self):
        """Testa rejeição de n < 2"""
        with pytest.raises(InvalidInputError):
            is_success(SpikeSignal(nodes=[0.1], amplitudes=[1.0]), [0.1])


class TestAjusteLogLog:
    """Testes para fit_loglog_slope"""

    def test_quadratica(self):
        """Testa y = x^2"""
        x = np.logspace(0, 4, 5)
        fit = fit_loglog_slope(zip(x, x ** 2))

        assert fit.slope == pytest.approx(2.0, abs=1e-12)
        assert fit.r2 == pytest.approx(1.0, abs=1e-12)
        assert fit.annotation() == "slope = 2.000"

    def test_constante(self):
        """Testa y = 7 constante"""
        fit = fit_loglog_slope([(1.0, 7.0), (10.0, 7.0), (100.0, 7.0)])

        assert fit.slope == pytest.approx(0.0, abs=1e-12)

    def test_lei_de_potencia(self):
        """Testa y = 5 x^-3 em 5 décadas"""
        x = np.logspace(-2, 3, 6)
        fit = fit_loglog_slope(zip(x, 5.0 * x ** -3))

        assert fit.slope == pytest.approx(-3.0, abs=1e-10)
        assert 10 ** fit.intercept == pytest.approx(5.0)

    def test_x_degenerado(self):
        """Testa rejeição de x constante"""
        with pytest.raises(InvalidInputError):
            fit_loglog_slope([(2.0, 1.0), (2.0, 3.0), (2.0, 5.0)])

    def test_pontos_invalidos(self):
        """Testa rejeição de menos de 3 pontos e de valores não positivos"""
        with pytest.raises(InvalidInputError):
            fit_loglog_slope([(1.0, 1.0), (2.0, 2.0)])
        with pytest.raises(InvalidInputError):
            fit_loglog_slope([(1.0, 1.0), (2.0, -2.0), (3.0, 3.0)])


class TestFronteiraDeLimiar:
    """Testes para threshold_boundary"""

    @staticmethod
    def synthetic_grid(deltas, epsilons):
        """Taxa de sucesso linear em log eps, cruzando 0.5 em eps = Delta^3"""
        grid = []
        for delta in deltas:
            for eps in epsilons:
                rate = 0.5 - (np.log10(eps) - 3 * np.log10(delta)) / 2
                grid.append((delta, eps, float(np.clip(rate, 0.0, 1.0))))
        return grid

    def test_inclinacao_tres(self):
        """Testa fronteira exata eps* = Delta^3"""
        deltas = [0.01, 0.02, 0.05, 0.1]
        fit = threshold_boundary(self.synthetic_grid(deltas, np.logspace(-10, 0, 41)))

        assert fit.slope == pytest.approx(3.0, abs=0.05)
        assert [d for d, _ in fit.boundary] == deltas
        for delta, eps in fit.boundary:
            assert eps == pytest.approx(delta ** 3, rel=1e-6)

    def test_coluna_sem_cruzamento_excluida(self):
        """Testa que colunas sem cruzamento são descartadas"""
        deltas = [0.01, 0.02, 0.05, 0.1]
        grid = self.synthetic_grid(deltas, np.logspace(-10, 0, 41))
        grid += [(0.5, eps, 1.0) for eps in np.logspace(-10, 0, 41)]

        fit = threshold_boundary(grid)

        assert len(fit.boundary) == 4

    def test_tudo_sucesso(self):
        """Testa erro quando nenhuma coluna cruza 0.5"""
        grid = [(d, e, 1.0) for d in (0.01, 0.02, 0.05) for e in (1e-6, 1e-4, 1e-2)]

        with pytest.raises(InvalidInputError):
            threshold_boundary(grid)
