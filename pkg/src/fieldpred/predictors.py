"""Lazy predictors over a training table.

Three decision rules share the same match-scoring front end:

* ``delanga``: keep only the entries at the smallest matching distance,
  take the majority outcome, and break count ties by walking outward
  through successive distance levels;
* ``rasturnat``: every entry votes with its kernel-transformed distance,
  votes are summed per outcome, the largest field wins;
* ``nearest``: the minimal-distance entry decides (majority on ties),
  kept as a familiar baseline.

Scores are accumulated in fixed row order, and near-equal outcome scores
(within REL_TIE_TOL of the leader) count as ties resolved by label order.
The band is far above float accumulation noise and far below any genuine
score gap, which keeps winners stable under kernel scaling and under
reorderings of mathematically tied vote sets.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from .dataset import Query, TrainingTable, schema_from_dict, schema_to_dict
from .errors import PredictorError
from .kernels import Kernel, kernel_from_dict, kernel_to_dict, make_kernel
from .similarity import match_vectors

PREDICTOR_KINDS = ("delanga", "rasturnat", "nearest")

#: Relative width of the winner tie band: scores within this fraction of the
#: leading score are treated as exactly tied.
REL_TIE_TOL = 1e-12

MODEL_FILE_VERSION = 1


@dataclass(frozen=True, eq=False)
class DensityModel:
    """Per-entry total superposition scores and the compensation factors.

    tss[j] is entry j's field as seen by the whole table (self term
    included), sts their sum, stavg the per-entry average, and
    dcf[j] = stavg / tss[j] scales crowded entries down and isolated
    entries up.
    """

    tss: np.ndarray
    sts: float
    stavg: float
    dcf: np.ndarray

    def __post_init__(self):
        if np.any(self.tss <= 0) or self.sts <= 0:
            raise PredictorError("density scores must be positive")


@dataclass(frozen=True, eq=False)
class PredictionTrace:
    champion_distance: float | None = None
    champion_rows: tuple[int, ...] | None = None
    ets: np.ndarray | None = None


@dataclass(frozen=True, eq=False)
class Prediction:
    """Outcome scores, normalized likelihoods, the winner, and tie depth."""

    scores: dict[str, float]
    likelihoods: dict[str, float]
    winner: str
    tie_depth: int
    trace: PredictionTrace | None = None


@dataclass(frozen=True, eq=False)
class FittedModel:
    table: TrainingTable
    predictor_kind: str
    kernel: Kernel | None = None
    density: DensityModel | None = None
    trace_enabled: bool = False


def fit(
    table: TrainingTable,
    predictor_kind: str,
    kernel_kind: str | None = None,
    *,
    density: bool = False,
    mld_override: float | None = None,
    trace: bool = False,
) -> FittedModel:
    """Bind a predictor to a table; 'fitting' is bookkeeping, not training.

    ``kernel_kind`` is required for rasturnat and rejected otherwise, as are
    ``density`` and ``mld_override``.
    """
    if predictor_kind not in PREDICTOR_KINDS:
        raise PredictorError(f"unknown predictor kind {predictor_kind!r}")
    if predictor_kind != "rasturnat":
        if kernel_kind is not None:
            raise PredictorError("kernel is a rasturnat parameter; remove it for "
                                 f"{predictor_kind}")
        if density:
            raise PredictorError("density compensation is a rasturnat parameter")
        if mld_override is not None:
            raise PredictorError("mld is a rasturnat parameter")
        return FittedModel(table, predictor_kind, trace_enabled=trace)

    if kernel_kind is None:
        raise PredictorError("rasturnat requires a kernel kind")
    kernel = make_kernel(kernel_kind, table.n_entries, table.total_weight, mld_override)
    density_model = compute_density_model(table, kernel) if density else None
    return FittedModel(table, "rasturnat", kernel=kernel, density=density_model, trace_enabled=trace)


def predict(model: FittedModel, query: Query) -> Prediction:
    if model.predictor_kind == "delanga":
        return predict_delanga(model, query)
    if model.predictor_kind == "rasturnat":
        return predict_rasturnat(model, query)
    return predict_nearest(model, query)


def _select_winner(scores: np.ndarray) -> tuple[int, int]:
    """Index of the winning outcome plus a 0/1 tie flag (band rule)."""
    best = float(scores.max())
    tied = np.flatnonzero(scores >= best - best * REL_TIE_TOL)
    return int(tied[0]), (1 if tied.size > 1 else 0)


def _champion_counts(table: TrainingTable, dm: np.ndarray) -> tuple[float, np.ndarray, np.ndarray]:
    d_min = float(dm.min())
    champions = np.flatnonzero(dm == d_min)
    counts = np.bincount(
        table._outcome_idx[champions], minlength=len(table.schema.outcome_labels)
    )
    return d_min, champions, counts


def predict_delanga(model: FittedModel, query: Query) -> Prediction:
    """Majority over the minimal-distance entries, ties walked outward."""
    if model.predictor_kind != "delanga":
        raise PredictorError(f"model was fitted for {model.predictor_kind}, not delanga")
    table = model.table
    labels = table.schema.outcome_labels
    _, dm = match_vectors(query, table)
    d_min, champions, counts = _champion_counts(table, dm)

    best = counts.max()
    tied = np.flatnonzero(counts == best)
    if tied.size == 1:
        winner = labels[int(tied[0])]
        depth = 0
    else:
        levels, level_of = np.unique(dm, return_inverse=True)
        n_labels = len(labels)
        flat = np.bincount(
            level_of * n_labels + table._outcome_idx, minlength=levels.size * n_labels
        )
        winner, depth = backtrack_tie_break(flat.reshape(levels.size, n_labels), labels)

    size = float(champions.size)
    likelihoods = {label: float(counts[k] / size) for k, label in enumerate(labels)}
    scores = {label: float(counts[k]) for k, label in enumerate(labels)}
    trace = None
    if model.trace_enabled:
        trace = PredictionTrace(champion_distance=d_min, champion_rows=tuple(int(i) for i in champions))
    return Prediction(scores, likelihoods, winner, depth, trace)


def backtrack_tie_break(level_counts: Sequence[Sequence[int]], labels: Sequence[str]) -> tuple[str, int]:
    """Resolve a champion-level count tie by the levels beyond it.

    ``level_counts[l][k]`` is the number of outcome-k entries at distance
    level l (levels sorted by increasing distance; level 0 must hold a
    tie). Among the tied outcomes only, compare counts level by level,
    dropping outcomes that fall behind, until one remains or the levels
    run out; then the earliest surviving label wins. Returns the winner
    and the number of levels examined beyond level 0.
    """
    first = np.asarray(level_counts[0])
    best = first.max()
    tied = [int(k) for k in np.flatnonzero(first == best)]
    if len(tied) < 2:
        raise PredictorError("backtrack_tie_break requires a tie at level 0")
    depth = 0
    for level in range(1, len(level_counts)):
        depth += 1
        row = level_counts[level]
        sub_best = max(row[k] for k in tied)
        tied = [k for k in tied if row[k] == sub_best]
        if len(tied) == 1:
            return labels[tied[0]], depth
    return labels[min(tied)], depth


def predict_rasturnat(model: FittedModel, query: Query) -> Prediction:
    """Sum kernel-transformed entry scores per outcome; the largest field wins."""
    if model.predictor_kind != "rasturnat":
        raise PredictorError(f"model was fitted for {model.predictor_kind}, not rasturnat")
    table = model.table
    labels = table.schema.outcome_labels
    _, dm = match_vectors(query, table)
    ets = model.kernel.evaluate(dm)
    if model.density is not None:
        ets = ets * model.density.dcf
    # bincount accumulates in row order, matching a literal per-entry loop.
    tos = np.bincount(table._outcome_idx, weights=ets, minlength=len(labels))
    total = float(tos.sum())
    winner_idx, tie_depth = _select_winner(tos)
    scores = {label: float(tos[k]) for k, label in enumerate(labels)}
    likelihoods = {label: float(tos[k] / total) for k, label in enumerate(labels)}
    trace = PredictionTrace(ets=ets) if model.trace_enabled else None
    return Prediction(scores, likelihoods, labels[winner_idx], tie_depth, trace)


def predict_nearest(model: FittedModel, query: Query) -> Prediction:
    """Outcome of the closest entry; distance ties go to the set majority."""
    if model.predictor_kind != "nearest":
        raise PredictorError(f"model was fitted for {model.predictor_kind}, not nearest")
    table = model.table
    labels = table.schema.outcome_labels
    _, dm = match_vectors(query, table)
    d_min, champions, counts = _champion_counts(table, dm)
    best = counts.max()
    tied = np.flatnonzero(counts == best)
    winner = labels[int(tied[0])]
    size = float(champions.size)
    likelihoods = {label: float(counts[k] / size) for k, label in enumerate(labels)}
    scores = {label: float(counts[k]) for k, label in enumerate(labels)}
    trace = None
    if model.trace_enabled:
        trace = PredictionTrace(champion_distance=d_min, champion_rows=tuple(int(i) for i in champions))
    return Prediction(scores, likelihoods, winner, 1 if tied.size > 1 else 0, trace)


def compute_density_model(table: TrainingTable, kernel: Kernel, include_self: bool = True) -> DensityModel:
    """Score every entry against the whole table and derive dcf factors.

    O(M^2 * N); meant for tables where entry crowding actually matters,
    not for bulk experiments. The self term is included by default
    (``include_self=False`` exists for experimentation and needs M >= 2).
    """
    m = table.n_entries
    if not include_self and m < 2:
        raise PredictorError("excluding the self term needs at least two entries")
    tss = np.empty(m, dtype=np.float64)
    for j in range(m):
        _, dm = match_vectors(Query(table.values[j]), table)
        ets = kernel.evaluate(dm)
        total = math.fsum(ets)
        if not include_self:
            total -= float(ets[j])
        tss[j] = total
    sts = math.fsum(tss)
    stavg = sts / m
    # Algebraically stavg / tss, but dividing the fsum by m * tss keeps
    # dcf at exactly 1.0 when every entry carries the same field.
    dcf = sts / (m * tss)
    return DensityModel(tss=tss, sts=sts, stavg=stavg, dcf=dcf)


def model_to_dict(model: FittedModel) -> dict:
    table = model.table
    payload: dict = {
        "version": MODEL_FILE_VERSION,
        "predictor": model.predictor_kind,
        "trace": model.trace_enabled,
        "schema": schema_to_dict(table.schema),
        "values": [list(row) for row in table.values],
        "outcomes": list(table.outcomes),
        "kernel": kernel_to_dict(model.kernel) if model.kernel is not None else None,
        "density": None,
    }
    if model.density is not None:
        payload["density"] = {
            "tss": [float(x) for x in model.density.tss],
            "sts": model.density.sts,
            "stavg": model.density.stavg,
            "dcf": [float(x) for x in model.density.dcf],
        }
    return payload


def model_from_dict(payload: dict) -> FittedModel:
    if not isinstance(payload, dict):
        raise PredictorError("model document must be a JSON object")
    if payload.get("version") != MODEL_FILE_VERSION:
        raise PredictorError(f"unsupported model file version {payload.get('version')!r}")
    schema = schema_from_dict(payload["schema"])
    values = [
        [cell if isinstance(cell, str) else float(cell) for cell in row]
        for row in payload["values"]
    ]
    table = TrainingTable(schema, values, payload["outcomes"])
    kernel = None
    if payload.get("kernel") is not None:
        kernel = kernel_from_dict(payload["kernel"], table.n_entries, table.total_weight)
    density = None
    if payload.get("density") is not None:
        d = payload["density"]
        density = DensityModel(
            tss=np.asarray(d["tss"], dtype=np.float64),
            sts=float(d["sts"]),
            stavg=float(d["stavg"]),
            dcf=np.asarray(d["dcf"], dtype=np.float64),
        )
    return FittedModel(
        table,
        payload["predictor"],
        kernel=kernel,
        density=density,
        trace_enabled=bool(payload.get("trace", False)),
    )


def save_model(model: FittedModel, path) -> None:
    Path(path).write_text(json.dumps(model_to_dict(model), indent=2) + "\n", encoding="utf-8")


def load_model(path) -> FittedModel:
    """Read a model file back; no refitting happens here."""
    try:
        payload = json.loads(Path(path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise PredictorError(f"invalid model file: {exc}") from None
    return model_from_dict(payload)
