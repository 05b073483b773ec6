"""
Interface de linha de comando do benchmark

Subcomandos: sweep-delta, sweep-srf, threshold, compare, collision-scan, run.
Códigos de saída: 0 sucesso, 1 especificação inválida, 2 erro de E/S.
"""

import argparse
import logging
from pathlib import Path
from typing import List, Optional

from pydantic import ValidationError

from .models.experiment import ExperimentKind, ExperimentSpec, Method, OutputFormat
from .models.signal import NoiseMode
from .services.reporting import emit_frame
from .tracker.benchmark_tracker import BenchmarkTracker
from .utils.config import Settings, get_settings
from .utils.errors import InvalidInputError, ResultIOError

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_INVALID = 1
EXIT_IO = 2

SUBCOMMANDS = {
    "sweep-delta": (ExperimentKind.SWEEP_DELTA, Method.PRONY, "Escala de K_x/K_alpha com Delta (Prony clássico)"),
    "sweep-srf": (ExperimentKind.SWEEP_SRF, Method.DPM, "Escala de K_x/K_alpha com o SRF (DPM)"),
    "threshold": (ExperimentKind.THRESHOLD, Method.PRONY, "Mapa de sucesso no plano (Delta, eps)"),
    "compare": (ExperimentKind.COMPARE, Method.DPM, "DPM contra ESPRIT: erro e tempo"),
    "collision-scan": (ExperimentKind.COLLISION_SCAN, Method.DPM, "Fração de lambdas livres de colisão"),
    "run": (ExperimentKind.SINGLE_RUN, Method.PRONY, "Uma célula com um método"),
}


def build_parser(settings: Settings) -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="run_benchmark.py",
        description="Benchmark do Método de Prony Decimado",
    )
    subparsers = parser.add_subparsers(dest="command", required=True)

    for name, (_, method, help_text) in SUBCOMMANDS.items():
        sub = subparsers.add_parser(name, help=help_text, description=help_text)
        sub.add_argument("--n", type=int, default=3, help="Número de nós")
        sub.add_argument("--ell", type=int, default=2, help="Tamanho do cluster")
        sub.add_argument("--clusters", type=int, default=1, help="Número de clusters")
        sub.add_argument("--delta", type=float, nargs="+", default=[], help="Separação(ões) mínima(s)")
        sub.add_argument("--omega", type=float, nargs="+", default=[], help="Largura(s) de banda")
        sub.add_argument("--srf", type=float, nargs="+", default=[], help="Fatores de super-resolução (sweep-srf)")
        sub.add_argument("--eps", type=float, nargs="+", default=[], help="Nível(is) de ruído")
        sub.add_argument("--eps-scale", type=float, default=1e-2, help="c em eps = c * Delta^(2 ell - 1)")
        sub.add_argument("--trials", type=int, default=1, help="Tentativas por célula")
        sub.add_argument("--nlambda", type=int, default=None, help="N_lambda (DPM)")
        sub.add_argument("--nbins", type=int, default=None, help="N_b (DPM)")
        sub.add_argument("--refine", action="store_true", help="Ajuste não linear final do DPM")
        sub.add_argument("--seed", type=int, default=settings.seed, help="Semente mestre")
        sub.add_argument(
            "--method", nargs="+", default=[method.value],
            choices=[m.value for m in Method], help="Método(s)",
        )
        sub.add_argument("--noise-mode", default=settings.noise_mode.value, choices=[m.value for m in NoiseMode])
        sub.add_argument("--out", default=None, help="Arquivo de saída")
        sub.add_argument("--format", default=OutputFormat.CSV.value, choices=[f.value for f in OutputFormat])
        sub.add_argument("--plot", default=None, help="Arquivo do gráfico (.svg ou .html)")
        sub.add_argument("--workers", type=int, default=settings.workers, help="Threads de execução")
        sub.add_argument("--no-timing", action="store_true", help="Grava runtime_ns = 0")

    return parser


def build_spec(args: argparse.Namespace, settings: Settings) -> ExperimentSpec:
    """Converte os argumentos em uma especificação validada"""
    kind = SUBCOMMANDS[args.command][0]
    methods = [Method(m) for m in args.method]
    output = args.out or str(Path(settings.data_dir) / f"{kind.value}.{args.format}")

    return ExperimentSpec(
        kind=kind,
        method=methods[0],
        methods=methods if len(methods) > 1 or kind == ExperimentKind.COMPARE else [],
        n=args.n,
        ell=args.ell,
        n_clusters=args.clusters,
        omega=args.omega[0] if len(args.omega) == 1 else None,
        omegas=args.omega if len(args.omega) > 1 else [],
        deltas=args.delta,
        srfs=args.srf,
        epsilons=args.eps,
        eps_scale=args.eps_scale,
        trials=args.trials,
        seed=args.seed,
        n_lambda=args.nlambda,
        n_bins=args.nbins,
        refine=args.refine,
        noise_mode=NoiseMode(args.noise_mode),
        output=output,
        format=OutputFormat(args.format),
        plot=args.plot,
        workers=args.workers,
        record_runtime=not args.no_timing,
    )


def main(argv: Optional[List[str]] = None, settings: Optional[Settings] = None) -> int:
    """
    Executa um subcomando

    Args:
        argv: Argumentos (padrão: sys.argv)
        settings: Configurações (padrão: ambiente)

    Returns:
        Código de saída
    """
    settings = settings or get_settings()
    try:
        args = build_parser(settings).parse_args(argv)
    except SystemExit as e:
        # argparse encerra com 2 em erro de uso; aqui isso é especificação inválida
        return EXIT_OK if e.code in (0, None) else EXIT_INVALID

    try:
        spec = build_spec(args, settings)
        tracker = BenchmarkTracker(data_dir=settings.data_dir, settings=settings)

        if spec.kind == ExperimentKind.COLLISION_SCAN:
            survey = tracker.collision_survey(spec)
            emit_frame(survey, spec.format, spec.output, {"kind": spec.kind.value, "spec": spec.model_dump(mode="json")})
        else:
            table = tracker.run_experiment(spec)
            tracker.report(table)
            tracker.save_results(table, spec)

    except (ValidationError, InvalidInputError) as e:
        logger.error(f"Especificação inválida: {e}")
        return EXIT_INVALID
    except (ResultIOError, OSError) as e:
        logger.error(f"Erro de E/S: {e}")
        return EXIT_IO

    logger.info(f"{args.command} finalizado com sucesso")
    return EXIT_OK
