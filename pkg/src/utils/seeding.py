"""
Derivação de sementes filhas
"""

from typing import Tuple

import numpy as np


def child_seed(master_seed: int, *keys: int) -> int:
    """
    Deriva uma semente independente de (semente mestre, chaves)

    Args:
        master_seed: Semente mestre do experimento
        keys: Índices (célula, tentativa, ...) que identificam a tarefa

    Returns:
        Inteiro não negativo de 63 bits, o mesmo para as mesmas chaves
    """
    sequence = np.random.SeedSequence(entropy=master_seed, spawn_key=tuple(int(k) for k in keys))
    return int(sequence.generate_state(1, dtype=np.uint64)[0] >> np.uint64(1))


def trial_seeds(master_seed: int, cell: int, trial: int) -> Tuple[int, int, int]:
    """Sementes de (sinal, ruído, layout) de uma tentativa"""
    return (
        child_seed(master_seed, cell, trial, 0),
        child_seed(master_seed, cell, trial, 1),
        child_seed(master_seed, cell, trial, 2),
    )
