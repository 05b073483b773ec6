"""
Serviço de relatórios: gravação de tabelas (CSV/JSONL), leitura de JSONL,
agregações e gráficos
"""

import json
import logging
import math
from pathlib import Path
from typing import Any, Dict, List, Optional, Union

import numpy as np
import pandas as pd
import plotly.graph_objects as go

from ..models.evaluation import LogLogFit
from ..models.experiment import COLUMNS, OutputFormat, PlotKind, ResultTable
from ..utils.errors import InvalidInputError, ResultIOError
from .metrics import fit_loglog_slope, threshold_boundary

logger = logging.getLogger(__name__)

FLOAT_FORMAT = "%.17g"
META_SUFFIX = ".meta.json"

PathLike = Union[str, Path]


def meta_path(path: PathLike) -> Path:
    """Caminho do arquivo lateral de metadados de uma saída"""
    path = Path(path)
    return path.with_name(path.name + META_SUFFIX)


def _json_value(value: Any) -> str:
    if isinstance(value, np.generic):
        value = value.item()
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, int):
        return str(value)
    if isinstance(value, float):
        if math.isnan(value):
            return "NaN"
        if math.isinf(value):
            return "Infinity" if value > 0 else "-Infinity"
        return FLOAT_FORMAT % value
    return json.dumps(value, ensure_ascii=False)


def _jsonl_line(row: Dict[str, Any], columns: List[str]) -> str:
    fields = ", ".join(f"{json.dumps(column)}: {_json_value(row[column])}" for column in columns)
    return "{" + fields + "}"


def emit(table: ResultTable, fmt: Union[OutputFormat, str], path: PathLike) -> Path:
    """
    Grava a tabela de resultados

    Args:
        table: Tabela a gravar
        fmt: csv ou jsonl
        path: Arquivo de destino

    Returns:
        Caminho gravado; os metadados vão para <path>.meta.json
    """
    return emit_frame(table.to_dataframe(), fmt, path, table.metadata)


def emit_frame(
    frame: pd.DataFrame,
    fmt: Union[OutputFormat, str],
    path: PathLike,
    metadata: Optional[Dict[str, Any]] = None,
) -> Path:
    """Grava um DataFrame qualquer em CSV/JSONL com floats de 17 dígitos"""
    fmt = OutputFormat(fmt)
    path = Path(path)
    columns = [str(c) for c in frame.columns]

    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        if fmt == OutputFormat.CSV:
            frame.to_csv(path, index=False, float_format=FLOAT_FORMAT)
        else:
            with open(path, "w", encoding="utf-8") as f:
                for row in frame.to_dict(orient="records"):
                    f.write(_jsonl_line(row, columns) + "\n")

        with open(meta_path(path), "w", encoding="utf-8") as f:
            json.dump(metadata or {}, f, ensure_ascii=False, indent=2, default=str)
    except OSError as e:
        raise ResultIOError(f"falha ao gravar resultados: {e}", str(path)) from e

    logger.info(f"{len(frame)} linhas gravadas em {path} ({fmt.value})")
    return path


def load_jsonl(path: PathLike) -> ResultTable:
    """Lê um arquivo JSONL gravado por emit (e seus metadados, se existirem)"""
    path = Path(path)
    try:
        with open(path, "r", encoding="utf-8") as f:
            records = [json.loads(line) for line in f if line.strip()]
        metadata: Dict[str, Any] = {}
        if meta_path(path).exists():
            with open(meta_path(path), "r", encoding="utf-8") as f:
                metadata = json.load(f)
    except OSError as e:
        raise ResultIOError(f"falha ao ler resultados: {e}", str(path)) from e
    except json.JSONDecodeError as e:
        raise ResultIOError(f"JSONL inválido: {e}", str(path)) from e

    try:
        return ResultTable.from_records(records, metadata)
    except (KeyError, ValueError) as e:
        raise ResultIOError(f"linhas fora do esquema: {e}", str(path)) from e


def trial_outcomes(table: ResultTable) -> pd.DataFrame:
    """
    Uma linha por tentativa com delta, eps, srf, método e sucesso

    Sucesso da tentativa = status success e todos os nós com sucesso.
    """
    frame = table.to_dataframe()
    if frame.empty:
        return pd.DataFrame(columns=["trial_id", "method", "delta", "omega", "eps", "srf", "success"])

    frame = frame.assign(
        nodes_ok=frame["success"].astype(bool),
        status_ok=frame["status"] == "success",
    )
    grouped = frame.groupby(["trial_id", "method"], sort=True)
    outcomes = grouped.agg(
        delta=("delta", "first"),
        omega=("omega", "first"),
        eps=("eps", "first"),
        srf=("srf", "first"),
        nodes_ok=("nodes_ok", "all"),
        status_ok=("status_ok", "all"),
    ).reset_index()
    outcomes["success"] = outcomes["nodes_ok"] & outcomes["status_ok"]
    return outcomes.drop(columns=["nodes_ok", "status_ok"])


def success_rate_grid(table: ResultTable) -> pd.DataFrame:
    """
    Agrega uma tabela de limiar na grade (delta, eps, taxa de sucesso)

    Returns:
        DataFrame com colunas delta, eps, success_rate e trials
    """
    outcomes = trial_outcomes(table)
    if outcomes.empty:
        return pd.DataFrame(columns=["delta", "eps", "success_rate", "trials"])

    grid = outcomes.groupby(["delta", "eps"], sort=True).agg(
        success_rate=("success", "mean"),
        trials=("trial_id", "count"),
    ).reset_index()
    grid["success_rate"] = grid["success_rate"].astype(float)
    return grid


def cluster_maxima(table: ResultTable, column: str, x: str = "delta") -> pd.DataFrame:
    """
    Máximo de uma coluna sobre os nós do cluster, por tentativa bem-sucedida

    Args:
        table: Tabela de resultados
        column: k_x, k_alpha, abs_node_err ou abs_amp_err
        x: Coluna usada como abscissa (delta ou srf)

    Returns:
        DataFrame com colunas trial_id, method, x e value
    """
    if column not in COLUMNS or x not in COLUMNS:
        raise InvalidInputError(f"coluna desconhecida: {column} / {x}")

    frame = table.to_dataframe()
    if frame.empty:
        return pd.DataFrame(columns=["trial_id", "method", x, "value"])

    mask = frame["in_cluster"].astype(bool) & (frame["status"] == "success")
    selected = frame[mask]
    maxima = selected.groupby(["trial_id", "method"], sort=True).agg(
        **{x: (x, "first"), "value": (column, "max")}
    ).reset_index()
    return maxima[(maxima["value"] > 0) & maxima["value"].map(math.isfinite)]


def summarize(table: ResultTable) -> pd.DataFrame:
    """
    Resumo por método e célula da grade

    Medianas de K_x/K_alpha para nós do cluster e isolados, erro médio
    absoluto dos nós do cluster, taxa de sucesso e mediana do tempo.
    """
    keys = ["method", "n", "ell", "delta", "omega", "eps"]
    frame = table.to_dataframe()
    if frame.empty:
        return pd.DataFrame(columns=keys)

    in_cluster = frame["in_cluster"].astype(bool)
    cluster = frame[in_cluster].groupby(keys)
    isolated = frame[~in_cluster].groupby(keys)

    summary = frame.groupby(keys).agg(
        trials=("trial_id", "nunique"),
        runtime_ns=("runtime_ns", "median"),
    )
    row_ok = frame["success"].astype(bool) & (frame["status"] == "success")
    trial_ok = row_ok.groupby([frame["trial_id"], frame["method"]]).transform("all")
    summary["success_rate"] = frame.assign(trial_ok=trial_ok).groupby(keys)["trial_ok"].mean().astype(float)
    summary["k_x_cluster"] = cluster["k_x"].median()
    summary["k_alpha_cluster"] = cluster["k_alpha"].median()
    summary["node_err_cluster"] = cluster["abs_node_err"].mean()
    summary["k_x_isolated"] = isolated["k_x"].median()
    summary["k_alpha_isolated"] = isolated["k_alpha"].median()
    return summary.reset_index()


def loglog_fit(table: ResultTable, column: str, x: str = "delta") -> LogLogFit:
    """Inclinação log-log do máximo do cluster de column contra x"""
    maxima = cluster_maxima(table, column, x)
    return fit_loglog_slope(zip(maxima[x].astype(float), maxima["value"].astype(float)))


def _x_axis(table: ResultTable) -> str:
    return "srf" if table.metadata.get("kind") == "sweep-srf" else "delta"


def _loglog_figure(table: ResultTable) -> go.Figure:
    x = _x_axis(table)
    figure = go.Figure()
    annotations = []

    for column, label in (("k_x", "K_x"), ("k_alpha", "K_alpha")):
        maxima = cluster_maxima(table, column, x)
        if len(maxima) < 3:
            raise InvalidInputError(
                f"tabela sem pontos suficientes para {label} (eps > 0 e status success são necessários)"
            )
        fit = fit_loglog_slope(zip(maxima[x].astype(float), maxima["value"].astype(float)))
        figure.add_trace(go.Scatter(x=maxima[x], y=maxima["value"], mode="markers", name=label))
        annotations.append(f"{label} {fit.annotation()}")

    figure.update_xaxes(type="log", title_text=x)
    figure.update_yaxes(type="log", title_text="fator de amplificação (máximo no cluster)")
    for i, text in enumerate(annotations):
        figure.add_annotation(
            text=text, xref="paper", yref="paper", x=0.02, y=0.98 - 0.06 * i, showarrow=False,
        )
    return figure


def _threshold_figure(table: ResultTable) -> go.Figure:
    grid = success_rate_grid(table)
    if grid["delta"].nunique() < 2 or grid["eps"].nunique() < 2:
        raise InvalidInputError("mapa de limiar exige pelo menos 2 valores de delta e 2 de eps")

    pivot = grid.pivot(index="eps", columns="delta", values="success_rate").sort_index()
    figure = go.Figure(go.Heatmap(
        x=pivot.columns.tolist(),
        y=pivot.index.tolist(),
        z=pivot.values,
        zmin=0.0,
        zmax=1.0,
        colorscale="Viridis",
        colorbar={"title": "taxa de sucesso"},
    ))

    boundary = _boundary_points(grid)
    if boundary:
        figure.add_trace(go.Scatter(
            x=[d for d, _ in boundary],
            y=[e for _, e in boundary],
            mode="lines+markers",
            name="fronteira 50%",
            line={"color": "white"},
        ))

    figure.update_xaxes(type="log", title_text="delta")
    figure.update_yaxes(type="log", title_text="eps")
    return figure


def _boundary_points(grid: pd.DataFrame) -> List:
    cells = grid[["delta", "eps", "success_rate"]].itertuples(index=False, name=None)
    try:
        fit = threshold_boundary(cells)
    except InvalidInputError as e:
        logger.warning(f"Fronteira de 50% não ajustada: {e}")
        return []
    logger.info(f"Inclinação da fronteira de 50%: {fit.slope:.3f}")
    return fit.boundary


def plot(table: ResultTable, kind: Union[PlotKind, str], path: Optional[PathLike] = None) -> go.Figure:
    """
    Gera o gráfico de uma tabela de resultados

    Args:
        table: Tabela não vazia
        kind: loglog-scatter ou threshold-map
        path: Destino (.html autocontido; outras extensões via kaleido, ex. .svg)

    Returns:
        A figura gerada
    """
    kind = PlotKind(kind)
    if len(table) == 0:
        raise InvalidInputError("tabela vazia não pode ser plotada")

    if kind == PlotKind.LOGLOG_SCATTER:
        figure = _loglog_figure(table)
    else:
        figure = _threshold_figure(table)

    if path is not None:
        path = Path(path)
        try:
            path.parent.mkdir(parents=True, exist_ok=True)
            if path.suffix.lower() in (".html", ".htm"):
                figure.write_html(str(path), include_plotlyjs=True, full_html=True)
            else:
                figure.write_image(str(path))
        except (OSError, ValueError) as e:
            raise ResultIOError(f"falha ao gravar gráfico: {e}", str(path)) from e
        logger.info(f"Gráfico {kind.value} gravado em {path}")

    return figure
