"""
Modelos de dados para experimentos de benchmark
"""

from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Dict, List, Optional, Tuple

import math

import pandas as pd
from pydantic import BaseModel, Field, field_validator, model_validator

from .signal import NoiseMode


class ExperimentKind(str, Enum):
    SWEEP_DELTA = "sweep-delta"
    SWEEP_SRF = "sweep-srf"
    THRESHOLD = "threshold"
    COMPARE = "compare"
    COLLISION_SCAN = "collision-scan"
    SINGLE_RUN = "single-run"


class Method(str, Enum):
    PRONY = "prony"
    DPM = "dpm"
    ESPRIT = "esprit"


class OutputFormat(str, Enum):
    CSV = "csv"
    JSONL = "jsonl"


class PlotKind(str, Enum):
    LOGLOG_SCATTER = "loglog-scatter"
    THRESHOLD_MAP = "threshold-map"


# Esquema fixo das linhas de resultado (uma linha por nó)
COLUMNS = [
    "trial_id", "method", "n", "ell", "delta", "omega", "eps", "srf",
    "n_lambda", "n_bins", "node_index", "in_cluster", "abs_node_err",
    "abs_amp_err", "k_x", "k_alpha", "success", "status", "runtime_ns", "seed",
]


class ExperimentSpec(BaseModel):
    """Especificação de um experimento (validada)"""
    kind: ExperimentKind
    method: Method = Method.PRONY
    methods: List[Method] = Field(default_factory=list)
    n: int = Field(default=3, ge=1)
    ell: int = Field(default=2, ge=2)
    n_clusters: int = Field(default=1, ge=1)
    omega: Optional[float] = Field(default=None, gt=0)
    deltas: List[float] = Field(default_factory=list)
    omegas: List[float] = Field(default_factory=list)
    srfs: List[float] = Field(default_factory=list)
    epsilons: List[float] = Field(default_factory=list)
    eps_scale: float = Field(default=1e-2, gt=0)
    trials: int = Field(default=1, ge=1)
    seed: int = Field(default=0, ge=0)
    n_lambda: Optional[int] = Field(default=None, ge=2)
    n_bins: Optional[int] = Field(default=None, ge=1)
    refine: bool = False
    noise_mode: NoiseMode = NoiseMode.BOUNDARY
    amp_magnitude_range: Tuple[float, float] = (1.0 / 3.0, 1.0)
    output: Optional[str] = None
    format: OutputFormat = OutputFormat.CSV
    plot: Optional[str] = None
    workers: int = Field(default=1, ge=1)
    record_runtime: bool = True

    @field_validator("deltas", "omegas", "srfs", "epsilons")
    @classmethod
    def _valores_positivos(cls, values: List[float]) -> List[float]:
        if any(not (v > 0 and math.isfinite(v)) for v in values):
            raise ValueError(f"valores da grade devem ser positivos: {values}")
        return values

    @model_validator(mode="after")
    def _cluster_cabe(self) -> "ExperimentSpec":
        if self.ell * self.n_clusters > self.n:
            raise ValueError(f"ell={self.ell} x {self.n_clusters} clusters excede n={self.n}")
        low, high = self.amp_magnitude_range
        if not 0 < low <= high:
            raise ValueError(f"faixa de módulos inválida: {self.amp_magnitude_range}")
        return self


@dataclass
class GridCell:
    """Célula da grade de parâmetros (todos os métodos compartilham sinal e ruído)"""
    index: int
    delta: float
    omega: float
    eps: float
    methods: List[Method]

    @property
    def srf(self) -> float:
        return 1.0 / (self.omega * self.delta)

    def to_dict(self) -> Dict[str, Any]:
        """Converte para dicionário"""
        return {
            "index": self.index,
            "delta": self.delta,
            "omega": self.omega,
            "eps": self.eps,
            "methods": [m.value for m in self.methods],
        }


@dataclass
class TrialRecord:
    """Resultado de uma tentativa (um método, uma célula da grade)"""
    trial_id: int
    cell: int
    trial: int
    method: Method
    n: int
    ell: int
    delta: float
    omega: float
    eps: float
    seed: int
    status: str
    n_lambda: Optional[int] = None
    n_bins: Optional[int] = None
    runtime_ns: int = 0
    node_errors: List[float] = field(default_factory=list)
    amp_errors: List[float] = field(default_factory=list)
    k_x: List[float] = field(default_factory=list)
    k_alpha: List[float] = field(default_factory=list)
    in_cluster: List[bool] = field(default_factory=list)
    success: List[bool] = field(default_factory=list)

    @property
    def srf(self) -> float:
        return 1.0 / (self.omega * self.delta)

    def to_rows(self) -> List[Dict[str, Any]]:
        """Achata o registro em uma linha por nó"""
        nan = float("nan")

        def _at(values: List[Any], k: int, default: Any) -> Any:
            return values[k] if k < len(values) else default

        rows = []
        for k in range(self.n):
            rows.append({
                "trial_id": self.trial_id,
                "method": self.method.value,
                "n": self.n,
                "ell": self.ell,
                "delta": float(self.delta),
                "omega": float(self.omega),
                "eps": float(self.eps),
                "srf": float(self.srf),
                "n_lambda": self.n_lambda if self.n_lambda is not None else 0,
                "n_bins": self.n_bins if self.n_bins is not None else 0,
                "node_index": k,
                "in_cluster": bool(_at(self.in_cluster, k, False)),
                "abs_node_err": float(_at(self.node_errors, k, nan)),
                "abs_amp_err": float(_at(self.amp_errors, k, nan)),
                "k_x": float(_at(self.k_x, k, nan)),
                "k_alpha": float(_at(self.k_alpha, k, nan)),
                "success": bool(_at(self.success, k, False)),
                "status": self.status,
                "runtime_ns": int(self.runtime_ns),
                "seed": int(self.seed),
            })
        return rows


@dataclass
class ResultTable:
    """Tabela de resultados (linhas por nó) com metadados"""
    rows: List[Dict[str, Any]] = field(default_factory=list)
    metadata: Dict[str, Any] = field(default_factory=dict)

    def __len__(self) -> int:
        return len(self.rows)

    def extend(self, record: TrialRecord):
        self.rows.extend(record.to_rows())

    def to_dataframe(self) -> pd.DataFrame:
        """Converte para DataFrame com o esquema fixo"""
        return pd.DataFrame(self.rows, columns=COLUMNS)

    @classmethod
    def from_dataframe(cls, frame: pd.DataFrame, metadata: Optional[Dict[str, Any]] = None) -> "ResultTable":
        return cls.from_records(frame[COLUMNS].to_dict(orient="records"), metadata)

    @classmethod
    def from_records(cls, records: List[Dict[str, Any]], metadata: Optional[Dict[str, Any]] = None) -> "ResultTable":
        """Reconstrói a tabela a partir de dicionários com as colunas do esquema"""
        missing = [c for c in COLUMNS if records and c not in records[0]]
        if missing:
            raise ValueError(f"colunas ausentes: {missing}")
        return cls(rows=[_normalize_row(r) for r in records], metadata=dict(metadata or {}))


_INT_COLUMNS = ("trial_id", "n", "ell", "n_lambda", "n_bins", "node_index", "runtime_ns", "seed")
_BOOL_COLUMNS = ("in_cluster", "success")
_STR_COLUMNS = ("method", "status")


def _normalize_row(record: Dict[str, Any]) -> Dict[str, Any]:
    row = {}
    for column in COLUMNS:
        value = record[column]
        if column in _INT_COLUMNS:
            row[column] = int(value)
        elif column in _BOOL_COLUMNS:
            row[column] = bool(value)
        elif column in _STR_COLUMNS:
            row[column] = str(value)
        else:
            row[column] = float(value)
    return row
