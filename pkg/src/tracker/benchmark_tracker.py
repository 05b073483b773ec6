"""
BenchmarkTracker - Orquestra os experimentos de Monte Carlo
"""

import logging
import math
import time
from concurrent.futures import ThreadPoolExecutor
from datetime import datetime
from pathlib import Path
from typing import Any, Dict, List, Optional, Tuple

import numpy as np
import pandas as pd

from .. import __version__
from ..models.experiment import (
    ExperimentKind,
    ExperimentSpec,
    GridCell,
    Method,
    ResultTable,
    TrialRecord,
)
from ..models.recovery import DecimationGrid, DpmParams, EspritConfig, RecoveryStatus
from ..models.signal import ClusterConfig, SpikeSignal
from ..services.dpm import (
    decimation_grid,
    default_n_bins,
    default_n_lambda,
    dpm,
    inter_cluster_separation,
    wrapped_separation,
)
from ..services.esprit import esprit
from ..services.metrics import amplification_factors, is_success, node_errors
from ..services.prony import prony
from ..services.reporting import emit, plot, summarize
from ..services.signal_core import SpectrumTable, add_noise, make_clustered_signal, sample_spectrum
from ..utils.config import Settings, get_settings
from ..utils.errors import EspritRankError, InvalidInputError, RootFindingError
from ..utils.seeding import child_seed, trial_seeds

logger = logging.getLogger(__name__)

# Grades padrão de cada tipo de experimento
DEFAULT_DELTA_POINTS = 8
DEFAULT_SRF_OMEGAS = np.logspace(2, 3, 6).tolist()
DEFAULT_SRFS = np.logspace(0.5, 1.5, 6).tolist()
DEFAULT_THRESHOLD_DELTAS = np.logspace(-2, -1, 5).tolist()
DEFAULT_THRESHOLD_EPSILONS = np.logspace(-9, -1, 17).tolist()
DEFAULT_COMPARE_DELTA = 10.0 ** -2.8
DEFAULT_COMPARE_OMEGA = 10.0 ** 2.5
DEFAULT_COMPARE_EPSILONS = np.logspace(-3.5, -2, 10).tolist()
DEFAULT_SINGLE_DELTA = 1e-2
DEFAULT_SCAN_OMEGA = 100.0
SCAN_SRF_RANGE = (1.0, 10.0 ** 1.5)


def default_deltas(ell: int) -> List[float]:
    """
    Deltas padrão do sweep-delta para clusters de tamanho ell

    ell = 2 usa [1e-3, 1e-1]; para ell > 2 a faixa é [10^-1.5, 10^-0.75], onde
    eps = 1e-2 Delta^(2 ell - 1) ainda fica acima do ruído de arredondamento
    (para ell = 3, eps >= 3e-10).
    """
    low, high = (-3.0, -1.0) if ell == 2 else (-1.5, -0.75)
    return np.logspace(low, high, DEFAULT_DELTA_POINTS).tolist()


class BenchmarkTracker:
    """Serviço principal para execução dos experimentos de recuperação"""

    def __init__(self, data_dir: Optional[str] = None, settings: Optional[Settings] = None):
        self.settings = settings or get_settings()
        self.data_dir = Path(data_dir or self.settings.data_dir)
        self.data_dir.mkdir(parents=True, exist_ok=True)
        logger.info("BenchmarkTracker inicializado")

    # ------------------------------------------------------------------
    # Grade de parâmetros
    # ------------------------------------------------------------------

    def build_cells(self, spec: ExperimentSpec) -> List[GridCell]:
        """
        Monta as células da grade de um experimento

        Args:
            spec: Especificação validada

        Returns:
            Células em ordem determinística
        """
        methods = self._methods(spec)
        default_omega = float(2 * spec.n - 1)
        points: List[Tuple[float, float, float]] = []

        if spec.kind == ExperimentKind.SWEEP_DELTA:
            omega = spec.omega or default_omega
            deltas = spec.deltas or default_deltas(spec.ell)
            for delta in deltas:
                for eps in spec.epsilons or [spec.eps_scale * delta ** (2 * spec.ell - 1)]:
                    points.append((delta, omega, eps))

        elif spec.kind == ExperimentKind.SWEEP_SRF:
            omegas = spec.omegas or ([spec.omega] if spec.omega else DEFAULT_SRF_OMEGAS)
            srfs = spec.srfs or DEFAULT_SRFS
            if len(omegas) == 1:
                omegas = omegas * len(srfs)
            if len(srfs) == 1:
                srfs = srfs * len(omegas)
            if len(omegas) != len(srfs):
                raise InvalidInputError(f"listas de omega ({len(omegas)}) e SRF ({len(srfs)}) com tamanhos diferentes")
            for omega, srf in zip(omegas, srfs):
                eps = spec.eps_scale * srf ** (1 - 2 * spec.ell)
                points.append((1.0 / (omega * srf), omega, eps))

        elif spec.kind == ExperimentKind.THRESHOLD:
            omega = spec.omega or default_omega
            for delta in spec.deltas or DEFAULT_THRESHOLD_DELTAS:
                for eps in spec.epsilons or DEFAULT_THRESHOLD_EPSILONS:
                    points.append((delta, omega, eps))

        elif spec.kind == ExperimentKind.COMPARE:
            omega = spec.omega or DEFAULT_COMPARE_OMEGA
            for delta in spec.deltas or [DEFAULT_COMPARE_DELTA]:
                for eps in spec.epsilons or DEFAULT_COMPARE_EPSILONS:
                    points.append((delta, omega, eps))

        elif spec.kind == ExperimentKind.SINGLE_RUN:
            delta = spec.deltas[0] if spec.deltas else DEFAULT_SINGLE_DELTA
            eps = spec.epsilons[0] if spec.epsilons else spec.eps_scale * delta ** (2 * spec.ell - 1)
            points.append((delta, spec.omega or default_omega, eps))

        else:
            raise InvalidInputError(f"{spec.kind.value} não produz tabela de tentativas; use collision_survey")

        return [
            GridCell(index=i, delta=float(d), omega=float(o), eps=float(e), methods=methods)
            for i, (d, o, e) in enumerate(points)
        ]

    @staticmethod
    def _methods(spec: ExperimentSpec) -> List[Method]:
        if spec.methods:
            return list(dict.fromkeys(spec.methods))
        if spec.kind == ExperimentKind.COMPARE:
            return [Method.DPM, Method.ESPRIT]
        return [spec.method]

    # ------------------------------------------------------------------
    # Execução
    # ------------------------------------------------------------------

    def run_experiment(self, spec: ExperimentSpec) -> ResultTable:
        """
        Executa todas as tentativas de todas as células

        Args:
            spec: Especificação do experimento

        Returns:
            Tabela ordenada por (célula, tentativa, método)
        """
        cells = self.build_cells(spec)
        tasks = [(cell, trial) for cell in cells for trial in range(spec.trials)]
        logger.info(
            f"Iniciando {spec.kind.value}: {len(cells)} células x {spec.trials} tentativas "
            f"({', '.join(m.value for m in cells[0].methods)})"
        )

        if spec.workers > 1:
            with ThreadPoolExecutor(max_workers=spec.workers) as pool:
                batches = list(pool.map(lambda task: self.run_trial(spec, *task), tasks))
        else:
            batches = [self.run_trial(spec, cell, trial) for cell, trial in tasks]

        records = sorted(
            (record for batch in batches for record in batch),
            key=lambda r: (r.cell, r.trial, cells[r.cell].methods.index(r.method)),
        )

        table = ResultTable(metadata=self._metadata(spec, cells))
        for record in records:
            table.extend(record)

        failures = sum(1 for r in records if r.status != RecoveryStatus.SUCCESS.value)
        logger.info(f"Experimento concluído: {len(records)} tentativas, {failures} sem sucesso")
        return table

    def run_trial(self, spec: ExperimentSpec, cell: GridCell, trial: int) -> List[TrialRecord]:
        """Gera sinal e ruído de uma tentativa e roda cada método da célula"""
        trial_id = cell.index * spec.trials + trial
        signal_seed, noise_seed, layout_seed = trial_seeds(spec.seed, cell.index, trial)
        dpm_layout = Method.DPM in cell.methods

        records = []
        try:
            signal = self._make_signal(spec, cell, signal_seed, layout_seed, dpm_layout)
        except Exception as e:
            logger.error(f"Erro ao gerar o sinal da tentativa {trial_id}: {e}")
            for method in cell.methods:
                records.append(self._record(spec, cell, trial, method, noise_seed, RecoveryStatus.ERROR.value))
            return records

        for method in cell.methods:
            record = self._record(spec, cell, trial, method, noise_seed, RecoveryStatus.ERROR.value)
            record.in_cluster = list(signal.in_cluster)
            try:
                self._run_method(spec, cell, method, signal, noise_seed, record)
            except Exception as e:
                logger.error(f"Erro na tentativa {trial_id} ({method.value}): {e}")
                record.status = RecoveryStatus.ERROR.value
            records.append(record)
        return records

    def _record(
        self,
        spec: ExperimentSpec,
        cell: GridCell,
        trial: int,
        method: Method,
        seed: int,
        status: str,
    ) -> TrialRecord:
        return TrialRecord(
            trial_id=cell.index * spec.trials + trial,
            cell=cell.index,
            trial=trial,
            method=method,
            n=spec.n,
            ell=spec.ell,
            delta=cell.delta,
            omega=cell.omega,
            eps=cell.eps,
            seed=seed,
            status=status,
        )

    def _make_signal(
        self,
        spec: ExperimentSpec,
        cell: GridCell,
        signal_seed: int,
        layout_seed: int,
        dpm_layout: bool,
    ) -> SpikeSignal:
        rng = np.random.default_rng(layout_seed)
        center = float(rng.uniform(-0.5, 0.5))
        if dpm_layout:
            # centro do cluster no meio de um bin do histograma
            n_bins = spec.n_bins or default_n_bins(cell.delta)
            center = (math.floor((center + 0.5) * n_bins) + 0.5) / n_bins - 0.5

        config = ClusterConfig(
            n=spec.n,
            ell=spec.ell,
            delta=cell.delta,
            omega=cell.omega,
            cluster_center=center,
            amp_magnitude_range=tuple(spec.amp_magnitude_range),
            seed=signal_seed,
            n_clusters=spec.n_clusters,
        )
        return make_clustered_signal(config)

    def _run_method(
        self,
        spec: ExperimentSpec,
        cell: GridCell,
        method: Method,
        signal: SpikeSignal,
        noise_seed: int,
        record: TrialRecord,
    ):
        """Executa um método; apenas a chamada do método é cronometrada"""
        if method == Method.DPM:
            params = DpmParams(
                omega=cell.omega,
                n=spec.n,
                n_lambda=spec.n_lambda or default_n_lambda(cell.omega),
                n_bins=spec.n_bins or default_n_bins(cell.delta),
                refine=spec.refine,
            )
            record.n_lambda, record.n_bins = params.n_lambda, params.n_bins
            grid = decimation_grid(params.omega, params.n, params.n_lambda)
            provider = SpectrumTable(signal, grid.lambdas, 2 * spec.n, cell.eps, spec.noise_mode, noise_seed)

            start = time.perf_counter_ns()
            result = dpm(provider, params)
            elapsed = time.perf_counter_ns() - start
            status = result.status
            est_nodes, est_amps = result.est_nodes, result.est_amplitudes

        elif method == Method.ESPRIT:
            config = EspritConfig(m_samples=int(math.floor(cell.omega)) + 1, n=spec.n)
            moments = add_noise(sample_spectrum(signal, 1.0, config.m_samples), cell.eps, spec.noise_mode, noise_seed)

            start = time.perf_counter_ns()
            try:
                result = esprit(moments, config)
                status = RecoveryStatus.SUCCESS
                est_nodes, est_amps = result.nodes, result.amplitudes
            except EspritRankError as e:
                logger.warning(f"ESPRIT sem posto suficiente (posto {e.rank}): {e}")
                status, est_nodes, est_amps = RecoveryStatus.RANK_COLLAPSE, [], []
            elapsed = time.perf_counter_ns() - start

        else:
            moments = add_noise(sample_spectrum(signal, 1.0, 2 * spec.n), cell.eps, spec.noise_mode, noise_seed)

            start = time.perf_counter_ns()
            try:
                solution = prony(moments, spec.n)
                status = RecoveryStatus.SUCCESS
                est_nodes, est_amps = solution.wrapped_nodes.tolist(), solution.amplitudes.tolist()
            except RootFindingError as e:
                logger.warning(f"Prony falhou: {e}")
                status, est_nodes, est_amps = RecoveryStatus.PRONY_FAILURE, [], []
            elapsed = time.perf_counter_ns() - start

        record.status = status.value
        record.runtime_ns = int(elapsed) if spec.record_runtime else 0
        if status == RecoveryStatus.SUCCESS:
            self._score(signal, est_nodes, est_amps, cell, record)

    @staticmethod
    def _score(signal: SpikeSignal, est_nodes, est_amps, cell: GridCell, record: TrialRecord):
        node_err, amp_err = node_errors(signal, est_nodes, est_amps)
        record.node_errors = node_err.tolist()
        record.amp_errors = amp_err.tolist()
        record.success = is_success(signal, est_nodes)
        if cell.eps > 0:
            factors = amplification_factors(signal, est_nodes, est_amps, cell.eps, cell.omega)
            record.k_x = [k_x for k_x, _ in factors]
            record.k_alpha = [k_alpha for _, k_alpha in factors]

    def _metadata(self, spec: ExperimentSpec, cells: List[GridCell]) -> Dict[str, Any]:
        return {
            "kind": spec.kind.value,
            "spec": spec.model_dump(mode="json"),
            "cells": [cell.to_dict() for cell in cells],
            "code_version": __version__,
            "timestamp": datetime.now().isoformat(),
        }

    # ------------------------------------------------------------------
    # Colisões
    # ------------------------------------------------------------------

    def collision_scan(self, signal: SpikeSignal, grid: DecimationGrid) -> pd.DataFrame:
        """
        Separação enrolada Delta_lambda para cada lambda da grade

        Colisão é entre nós de clusters diferentes: lambda evita colisão se a
        separação enrolada entre clusters passa de 1/n^2 (ou se há um só cluster).
        A separação entre todos os pares fica na coluna wrapped_separation.

        Args:
            signal: Sinal com n >= 2
            grid: Grade de decimação

        Returns:
            DataFrame com colunas lambda, wrapped_separation,
            inter_cluster_separation e collision_avoiding
        """
        threshold = 1.0 / signal.n ** 2
        lambdas = grid.lambdas.astype(float)
        separations = [wrapped_separation(signal, lam) for lam in lambdas]
        between = np.array([inter_cluster_separation(signal, lam) for lam in lambdas])
        return pd.DataFrame({
            "lambda": lambdas,
            "wrapped_separation": separations,
            "inter_cluster_separation": between,
            "collision_avoiding": np.isnan(between) | (between > threshold),
        })

    def collision_survey(self, spec: ExperimentSpec) -> pd.DataFrame:
        """
        Varredura de colisões sobre configurações aleatórias

        Com n_clusters = 1 cada configuração é um único cluster com os n nós;
        caso contrário, n_clusters clusters de ell nós mais nós isolados. O SRF
        é sorteado log-uniforme em [1, 10^1.5] e o centro uniforme.

        Returns:
            Uma linha por (configuração, lambda)
        """
        omega = spec.omega or DEFAULT_SCAN_OMEGA
        n_lambda = spec.n_lambda or int(math.ceil(omega))
        grid = decimation_grid(omega, spec.n, n_lambda)
        single = spec.n_clusters == 1
        low, high = np.log10(SCAN_SRF_RANGE)

        frames = []
        for config_index in range(spec.trials):
            rng = np.random.default_rng(child_seed(spec.seed, config_index))
            srf = 10.0 ** rng.uniform(low, high)
            config = ClusterConfig(
                n=spec.n,
                ell=spec.n if single else spec.ell,
                delta=1.0 / (omega * srf),
                omega=omega,
                cluster_center=float(rng.uniform(-0.5, 0.5)),
                amp_magnitude_range=tuple(spec.amp_magnitude_range),
                seed=child_seed(spec.seed, config_index, 1),
                n_clusters=1 if single else spec.n_clusters,
            )
            scan = self.collision_scan(make_clustered_signal(config), grid)
            scan.insert(0, "config", config_index)
            scan.insert(1, "n_clusters", config.n_clusters)
            scan.insert(2, "srf", config.srf)
            frames.append(scan)

        survey = pd.concat(frames, ignore_index=True)
        logger.info(
            f"Varredura de colisões: {survey['collision_avoiding'].mean():.1%} dos lambdas evitam colisão "
            f"({spec.trials} configurações, N_lambda={n_lambda})"
        )
        return survey

    # ------------------------------------------------------------------
    # Persistência
    # ------------------------------------------------------------------

    def save_results(self, table: ResultTable, spec: ExperimentSpec) -> Dict[str, Optional[Path]]:
        """Grava a tabela (e o gráfico, se pedido) no destino da especificação"""
        output = Path(spec.output) if spec.output else self.data_dir / f"{spec.kind.value}.{spec.format.value}"
        saved: Dict[str, Optional[Path]] = {"table": emit(table, spec.format, output), "plot": None}

        if spec.plot:
            kind = "threshold-map" if spec.kind == ExperimentKind.THRESHOLD else "loglog-scatter"
            plot(table, kind, spec.plot)
            saved["plot"] = Path(spec.plot)
        return saved

    def report(self, table: ResultTable):
        """Registra no log o resumo por método e célula"""
        summary = summarize(table)
        logger.info("=== RESUMO ===")
        for row in summary.itertuples(index=False):
            logger.info(
                f"{row.method} delta={row.delta:.3g} omega={row.omega:.3g} eps={row.eps:.3g}: "
                f"sucesso {row.success_rate:.0%}, K_x cluster {row.k_x_cluster:.3g}, "
                f"K_x isolado {row.k_x_isolated:.3g}, tempo mediano {row.runtime_ns / 1e3:.1f} us"
            )
