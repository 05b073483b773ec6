"""
Exceções do sistema de recuperação de spikes
"""

from typing import Optional, Sequence


class SuperResolutionError(Exception):
    """Erro base do sistema"""


class InvalidInputError(SuperResolutionError, ValueError):
    """Entrada viola uma pré-condição da operação"""


class RootFindingError(SuperResolutionError):
    """Falha no cálculo das raízes do polinômio de Prony"""

    def __init__(self, message: str, best_iterates: Optional[Sequence[complex]] = None):
        super().__init__(message)
        self.best_iterates = list(best_iterates) if best_iterates is not None else []


class DealiasingError(SuperResolutionError):
    """Histograma sem bins não vazios suficientes"""


class EspritRankError(SuperResolutionError):
    """Posto numérico da matriz de Hankel menor que n"""

    def __init__(self, message: str, rank: int):
        super().__init__(message)
        self.rank = rank


class ResultIOError(SuperResolutionError, OSError):
    """Falha de leitura/escrita de resultados"""

    def __init__(self, message: str, path: str):
        super().__init__(f"{message} ({path})")
        self.path = path
