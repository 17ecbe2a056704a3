"""Synthetic ground-truth experiments: generation, oracles, convergence runs.

A synthetic specification fixes categorical attribute cardinalities, a
distribution over attribute tuples, and per-tuple conditional outcome
masses. Because the joint law is explicit, the Bayes-optimal accuracy is
computable in closed form and the regret of any predictor is measurable
exactly, trial by trial.

Sampling uses counter-based Philox streams keyed by (seed, stream_id):
any (spec, m, stream) triple regenerates the identical table regardless
of what else ran before, so experiments stay reproducible under
reordering and parallelism.
"""

from __future__ import annotations

import csv
import io
import itertools
import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Mapping, Sequence

import numpy as np

from .dataset import CATEGORICAL, AttributeSpec, Query, Schema, TrainingTable
from .errors import HarnessError
from .kernels import Kernel
from .predictors import REL_TIE_TOL, DensityModel, FittedModel, Prediction, fit, predict

SPEC_FILE_VERSION = 1

#: Stream id reserved for drawing a specification's own parameters
#: (never used for data, which keeps small consecutive stream ids safe).
DESIGN_STREAM = 2**63

#: Fixed seed for the standard three-ternary-attribute benchmark spec.
STANDARD_SPEC_SEED = 2024

#: Fixed seed for the non-convergence counterexample spec.
COUNTEREXAMPLE_SEED = 77

REPORT_HEADER = "m,predictor,kernel,trial,accuracy,bayes_accuracy,regret"


def _stream_rng(seed: int, stream_id: int) -> np.random.Generator:
    key = np.array([seed % 2**64, stream_id % 2**64], dtype=np.uint64)
    return np.random.Generator(np.random.Philox(key=key))


def all_tuples(cardinalities: Sequence[int]) -> list[tuple[str, ...]]:
    """Every attribute tuple, in canonical (first attribute slowest) order."""
    alphabets = [[str(v) for v in range(c)] for c in cardinalities]
    return list(itertools.product(*alphabets))


@dataclass(frozen=True, eq=False)
class SyntheticSpec:
    """Explicit joint law over attribute tuples and outcome labels.

    ``probs`` and ``conditionals`` are aligned with ``all_tuples(cardinalities)``;
    conditional rows are meaningful only where the tuple mass is positive.
    """

    cardinalities: tuple[int, ...]
    labels: tuple[str, ...]
    seed: int
    probs: np.ndarray
    conditionals: np.ndarray

    def __post_init__(self):
        cards = tuple(int(c) for c in self.cardinalities)
        object.__setattr__(self, "cardinalities", cards)
        object.__setattr__(self, "labels", tuple(self.labels))
        if not cards or any(c < 1 for c in cards):
            raise HarnessError("cardinalities must be positive integers")
        if not self.labels or len(set(self.labels)) != len(self.labels):
            raise HarnessError("labels must be nonempty and unique")
        k = int(np.prod(cards))
        probs = np.asarray(self.probs, dtype=np.float64)
        cond = np.asarray(self.conditionals, dtype=np.float64)
        if probs.shape != (k,):
            raise HarnessError(f"probs must have shape ({k},)")
        if cond.shape != (k, len(self.labels)):
            raise HarnessError(f"conditionals must have shape ({k}, {len(self.labels)})")
        if np.any(probs < 0) or np.any(cond < 0):
            raise HarnessError("masses must be nonnegative")
        if abs(math.fsum(probs) - 1.0) > 1e-12:
            raise HarnessError("tuple masses must sum to 1")
        live = probs > 0
        row_sums = cond[live].sum(axis=1)
        if np.any(np.abs(row_sums - 1.0) > 1e-12):
            raise HarnessError("conditional masses must sum to 1 for every reachable tuple")
        object.__setattr__(self, "probs", probs)
        object.__setattr__(self, "conditionals", cond)
        tuples = all_tuples(cards)
        object.__setattr__(self, "_tuples", tuples)
        object.__setattr__(self, "_index", {t: i for i, t in enumerate(tuples)})

    @property
    def tuples(self) -> list[tuple[str, ...]]:
        return list(self._tuples)

    def tuple_index(self, values: Sequence[str]) -> int:
        try:
            return self._index[tuple(values)]
        except KeyError:
            raise HarnessError(f"tuple {tuple(values)!r} is not a point of this spec") from None

    def schema(self) -> Schema:
        attrs = tuple(
            AttributeSpec(
                name=f"x{j}",
                kind=CATEGORICAL,
                categories=tuple(str(v) for v in range(c)),
            )
            for j, c in enumerate(self.cardinalities)
        )
        return Schema(attrs, self.labels)


def make_spec(
    cardinalities: Sequence[int],
    labels: Sequence[str],
    seed: int,
    attribute_distribution="uniform",
    conditionals: Mapping[tuple, Sequence[float]] | None = None,
) -> SyntheticSpec:
    """Assemble a SyntheticSpec from user-facing pieces.

    ``attribute_distribution`` is "uniform" or a mapping tuple -> mass;
    ``conditionals`` maps each reachable tuple to its outcome masses.
    A conditional for an unreachable tuple, or a missing one for a
    reachable tuple, is an error.
    """
    cards = tuple(int(c) for c in cardinalities)
    tuples = all_tuples(cards)
    index = {t: i for i, t in enumerate(tuples)}
    k = len(tuples)
    n_labels = len(tuple(labels))

    probs = np.zeros(k, dtype=np.float64)
    if isinstance(attribute_distribution, str):
        if attribute_distribution != "uniform":
            raise HarnessError(f"unknown distribution descriptor {attribute_distribution!r}")
        probs[:] = 1.0 / k
    else:
        for key, mass in dict(attribute_distribution).items():
            t = tuple(str(v) for v in key)
            if t not in index:
                raise HarnessError(f"distribution names unknown tuple {t!r}")
            probs[index[t]] = float(mass)

    if conditionals is None:
        raise HarnessError("conditionals are required")
    cond = np.full((k, n_labels), 1.0 / n_labels, dtype=np.float64)
    covered = np.zeros(k, dtype=bool)
    for key, masses in dict(conditionals).items():
        t = tuple(str(v) for v in key)
        if t not in index:
            raise HarnessError(f"conditionals name unknown tuple {t!r}")
        i = index[t]
        if probs[i] == 0.0:
            raise HarnessError(f"conditional given for unreachable tuple {t!r}")
        if len(masses) != n_labels:
            raise HarnessError(f"conditional for {t!r} must list {n_labels} masses")
        cond[i] = np.asarray(masses, dtype=np.float64)
        covered[i] = True
    missing = np.flatnonzero((probs > 0) & ~covered)
    if missing.size:
        raise HarnessError(f"missing conditional for reachable tuple {tuples[missing[0]]!r}")

    return SyntheticSpec(cards, tuple(labels), int(seed), probs, cond)


def _outcome_cdf(spec: SyntheticSpec) -> np.ndarray:
    cdf = np.cumsum(spec.conditionals, axis=1)
    cdf[:, -1] = 1.0
    return cdf


def generate_synthetic(spec: SyntheticSpec, m: int, stream_id: int) -> TrainingTable:
    """Draw m i.i.d. labeled rows on the stream (seed, stream_id)."""
    if m < 1:
        raise HarnessError("m must be at least 1")
    rng = _stream_rng(spec.seed, stream_id)
    idx = rng.choice(spec.probs.size, size=m, p=spec.probs)
    u = rng.random(m)
    cdf = _outcome_cdf(spec)
    outcomes = np.argmax(u[:, None] < cdf[idx], axis=1)
    tuples = spec.tuples
    values = [tuples[i] for i in idx]
    return TrainingTable(spec.schema(), values, outcomes.tolist())


def generate_point_test(spec: SyntheticSpec, tuple_values: Sequence[str], n: int, stream_id: int) -> TrainingTable:
    """A test table whose every row sits at one tuple, labels drawn from its conditional."""
    if n < 1:
        raise HarnessError("n must be at least 1")
    i = spec.tuple_index(tuple_values)
    if spec.probs[i] == 0.0:
        raise HarnessError(f"tuple {tuple(tuple_values)!r} has zero mass; no conditional is defined")
    rng = _stream_rng(spec.seed, stream_id)
    u = rng.random(n)
    cdf = _outcome_cdf(spec)[i]
    outcomes = np.argmax(u[:, None] < cdf[None, :], axis=1)
    values = [spec.tuples[i]] * n
    return TrainingTable(spec.schema(), values, outcomes.tolist())


def bayes_optimal(spec: SyntheticSpec) -> tuple[Callable[[Sequence[str]], str], float]:
    """The argmax-conditional classifier and its exact accuracy.

    Accuracy is sum over tuples of P(tuple) * max_k P(k | tuple); ties in
    a conditional go to the earliest label.
    """
    best = np.argmax(spec.conditionals, axis=1)
    accuracy = math.fsum(
        spec.probs[i] * float(spec.conditionals[i].max())
        for i in np.flatnonzero(spec.probs > 0)
    )

    def classify(values: Sequence[str]) -> str:
        return spec.labels[best[spec.tuple_index(values)]]

    return classify, accuracy


def evaluate_accuracy(model: FittedModel, test_table: TrainingTable) -> float:
    """Fraction of test rows whose winner matches the recorded label."""
    if test_table.n_entries < 1:
        raise HarnessError("empty test set")
    model_schema = model.table.schema
    test_schema = test_table.schema
    if [(a.name, a.kind) for a in model_schema.attributes] != [
        (a.name, a.kind) for a in test_schema.attributes
    ]:
        raise HarnessError("test table attributes do not match the model's schema")
    known = set(model_schema.outcome_labels)
    for label in test_schema.outcome_labels:
        if label not in known:
            raise HarnessError(f"test outcome label {label!r} is unknown to the model")
    correct = 0
    for row, outcome in zip(test_table.values, test_table.outcomes):
        prediction = predict(model, Query(row))
        if prediction.winner == test_schema.outcome_labels[outcome]:
            correct += 1
    return correct / test_table.n_entries


@dataclass(frozen=True)
class ConvergenceReportRow:
    m: int
    predictor: str
    kernel: str
    trial: int
    accuracy: float
    bayes_accuracy: float
    regret: float


def _check_arm(arm: Sequence) -> tuple[str, str | None]:
    predictor, kernel = (arm[0], arm[1]) if len(arm) == 2 else (arm[0], None)
    if predictor == "rasturnat":
        if kernel is None:
            raise HarnessError("rasturnat arm needs a kernel")
    elif kernel is not None:
        raise HarnessError(f"kernel named for {predictor} arm; kernel is a rasturnat parameter")
    return predictor, kernel


def run_convergence(
    spec: SyntheticSpec,
    arms: Sequence[Sequence],
    schedule: Sequence[int],
    trials: int,
    test_size: int,
    progress: Callable[[str], None] | None = None,
) -> list[ConvergenceReportRow]:
    """Accuracy/regret per (arm, m, trial), rows in exactly that order.

    Arms are (predictor, kernel_or_None) pairs. All arms see the same
    train/test draw for a given (m, trial), which is recreated from its
    own streams rather than cached, so the run order cannot matter.
    """
    if not arms:
        raise HarnessError("at least one arm is required")
    parsed = [_check_arm(arm) for arm in arms]
    schedule = [int(m) for m in schedule]
    if not schedule or any(m < 1 for m in schedule):
        raise HarnessError("schedule must list positive entry counts")
    if any(b <= a for a, b in zip(schedule, schedule[1:])):
        raise HarnessError("schedule must be strictly increasing")
    if trials < 1 or test_size < 1:
        raise HarnessError("trials and test_size must be positive")

    _, bayes = bayes_optimal(spec)
    rows: list[ConvergenceReportRow] = []
    for predictor, kernel in parsed:
        arm_name = predictor if kernel is None else f"{predictor}:{kernel}"
        if progress is not None:
            progress(arm_name)
        for m_index, m in enumerate(schedule):
            for trial in range(trials):
                train_stream = 2 * (trial * len(schedule) + m_index)
                train = generate_synthetic(spec, m, train_stream)
                test = generate_synthetic(spec, test_size, train_stream + 1)
                model = fit(train, predictor, kernel)
                accuracy = evaluate_accuracy(model, test)
                rows.append(
                    ConvergenceReportRow(
                        m=m,
                        predictor=predictor,
                        kernel=kernel or "",
                        trial=trial,
                        accuracy=accuracy,
                        bayes_accuracy=bayes,
                        regret=bayes - accuracy,
                    )
                )
    return rows


def report_to_csv(rows: Sequence[ConvergenceReportRow]) -> str:
    lines = [REPORT_HEADER]
    for r in rows:
        lines.append(
            f"{r.m},{r.predictor},{r.kernel},{r.trial},"
            f"{r.accuracy:.6f},{r.bayes_accuracy:.6f},{r.regret:.6f}"
        )
    return "\n".join(lines) + "\n"


def write_report(rows: Sequence[ConvergenceReportRow], path) -> None:
    Path(path).write_text(report_to_csv(rows), encoding="utf-8")


def read_report(path) -> list[ConvergenceReportRow]:
    text = Path(path).read_text(encoding="utf-8")
    reader = csv.DictReader(io.StringIO(text))
    rows = []
    for rec in reader:
        rows.append(
            ConvergenceReportRow(
                m=int(rec["m"]),
                predictor=rec["predictor"],
                kernel=rec["kernel"],
                trial=int(rec["trial"]),
                accuracy=float(rec["accuracy"]),
                bayes_accuracy=float(rec["bayes_accuracy"]),
                regret=float(rec["regret"]),
            )
        )
    return rows


def summarize_final_regret(rows: Sequence[ConvergenceReportRow]) -> list[tuple[str, int, float]]:
    """Mean regret at the largest m, per arm, in first-seen arm order."""
    if not rows:
        return []
    final_m = max(r.m for r in rows)
    order: list[str] = []
    regrets: dict[str, list[float]] = {}
    for r in rows:
        arm = r.predictor if not r.kernel else f"{r.predictor}:{r.kernel}"
        if arm not in regrets:
            order.append(arm)
            regrets[arm] = []
        if r.m == final_m:
            regrets[arm].append(r.regret)
    return [(arm, final_m, math.fsum(regrets[arm]) / len(regrets[arm])) for arm in order]


def expected_tos_rates(
    spec: SyntheticSpec, query_tuple: Sequence[str], weight_by_distance: Sequence[float]
) -> np.ndarray:
    """Per-label expected per-row vote at a query point.

    Entry i contributes weight w(d) in expectation, where d is the Hamming
    distance from the query tuple; the expected tos after m rows is m times
    this rate. Used to reason about asymptotic winners analytically.
    """
    q = tuple(str(v) for v in query_tuple)
    spec.tuple_index(q)
    rates = np.zeros(len(spec.labels), dtype=np.float64)
    for i, t in enumerate(spec.tuples):
        if spec.probs[i] == 0.0:
            continue
        d = sum(1 for a, b in zip(q, t) if a != b)
        rates += spec.probs[i] * spec.conditionals[i] * weight_by_distance[d]
    return rates


def spec_to_dict(spec: SyntheticSpec) -> dict:
    tuples = spec.tuples
    return {
        "version": SPEC_FILE_VERSION,
        "cardinalities": list(spec.cardinalities),
        "attribute_distribution": [
            {"tuple": list(tuples[i]), "mass": float(spec.probs[i])}
            for i in np.flatnonzero(spec.probs > 0)
        ],
        "conditionals": [
            {"tuple": list(tuples[i]), "masses": [float(x) for x in spec.conditionals[i]]}
            for i in np.flatnonzero(spec.probs > 0)
        ],
        "labels": list(spec.labels),
        "seed": spec.seed,
    }


def spec_from_dict(payload: dict) -> SyntheticSpec:
    if not isinstance(payload, dict):
        raise HarnessError("spec document must be a JSON object")
    if payload.get("version") != SPEC_FILE_VERSION:
        raise HarnessError(f"unsupported spec file version {payload.get('version')!r}")
    dist = payload["attribute_distribution"]
    if not isinstance(dist, str):
        dist = {tuple(rec["tuple"]): rec["mass"] for rec in dist}
    conditionals = {tuple(rec["tuple"]): rec["masses"] for rec in payload["conditionals"]}
    return make_spec(
        payload["cardinalities"],
        payload["labels"],
        payload.get("seed", 0),
        attribute_distribution=dist,
        conditionals=conditionals,
    )


def save_spec(spec: SyntheticSpec, path) -> None:
    Path(path).write_text(json.dumps(spec_to_dict(spec), indent=2) + "\n", encoding="utf-8")


def load_spec(path) -> SyntheticSpec:
    try:
        payload = json.loads(Path(path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise HarnessError(f"invalid spec file: {exc}") from None
    return spec_from_dict(payload)


def standard_spec(seed: int = STANDARD_SPEC_SEED) -> SyntheticSpec:
    """Three ternary attributes, uniform tuples, two labels.

    Each tuple's dominant conditional is drawn once from the seed's design
    stream, uniformly in [0.7, 0.95], with the favored label a fair coin;
    the Bayes accuracy is the mean of the 27 dominant masses.
    """
    rng = _stream_rng(seed, DESIGN_STREAM)
    cards = (3, 3, 3)
    tuples = all_tuples(cards)
    conditionals = {}
    for t in tuples:
        p_max = float(rng.uniform(0.7, 0.95))
        favored = int(rng.integers(0, 2))
        masses = [p_max, 1.0 - p_max] if favored == 0 else [1.0 - p_max, p_max]
        conditionals[t] = masses
    return make_spec(cards, ("A", "B"), seed, "uniform", conditionals)


def counterexample_spec(seed: int = COUNTEREXAMPLE_SEED) -> SyntheticSpec:
    """A law where a fixed-lead kernel is asymptotically wrong at one point.

    The tuple (0,0,0) is rare (mass 0.01) and favors label A at 0.9, but
    its six Hamming-1 neighbors carry thirty times that mass and favor B
    at 0.9. Any kernel whose almost-perfect vote stays a fixed fraction
    of the perfect vote (pow_2: one half) lets the neighbor crowd outvote
    the point evidence no matter how large the table grows, while a
    lead-certified kernel tracks the perfect matches and converges.
    """
    cards = (3, 3, 3)
    rare = ("0", "0", "0")
    tuples = all_tuples(cards)
    distribution = {}
    conditionals = {}
    for t in tuples:
        d = sum(1 for a, b in zip(rare, t) if a != b)
        if d == 0:
            distribution[t] = 0.01
            conditionals[t] = [0.9, 0.1]
        elif d == 1:
            distribution[t] = 0.05
            conditionals[t] = [0.1, 0.9]
        else:
            distribution[t] = 0.69 / 20
            conditionals[t] = [0.3, 0.7]
    return make_spec(cards, ("A", "B"), seed, distribution, conditionals)


def naive_reference_predict(
    table: TrainingTable,
    query: Query,
    kernel: Kernel,
    density: DensityModel | None = None,
) -> Prediction:
    """Field-superposition prediction as the most literal possible loop.

    Independent of the production path on purpose: per-cell match scores,
    per-entry sums, scalar kernel formulas, and a dict accumulator, all in
    plain Python. Used as the oracle the vectorized rasturnat is checked
    against.
    """
    labels = table.schema.outcome_labels
    tos = {label: 0.0 for label in labels}
    total_weight = table.total_weight
    for i in range(table.n_entries):
        score = 0.0
        for j, spec in enumerate(table.schema.attributes):
            q, t = query.values[j], table.values[i][j]
            if spec.kind == CATEGORICAL:
                cms = 1.0 if q == t else 0.0
            else:
                width = spec.range_width
                if width == 0.0:
                    cms = 1.0 if q == t else 0.0
                else:
                    cms = 1.0 - abs(q - t) / width
                    if cms < 0.0:
                        cms = 0.0
                    elif cms > 1.0:
                        cms = 1.0
            score += spec.weight * cms
        d = max(total_weight - score, 0.0)
        ets = _naive_kernel_value(kernel, d)
        if density is not None:
            ets = float(density.dcf[i]) * ets
        tos[labels[table.outcomes[i]]] += ets

    total = math.fsum(tos.values())
    best = max(tos.values())
    tied = [label for label in labels if tos[label] >= best - best * REL_TIE_TOL]
    winner = tied[0]
    likelihoods = {label: tos[label] / total for label in labels}
    return Prediction(dict(tos), likelihoods, winner, 1 if len(tied) > 1 else 0, None)


def _naive_kernel_value(kernel: Kernel, d: float) -> float:
    """Scalar kernel formulas written out independently of Kernel.evaluate."""
    kind = kernel.kind
    if kind == "pow_2":
        value = 2.0 ** (-d)
    elif kind == "pow_e":
        value = math.exp(-d)
    elif kind == "gauss":
        value = math.exp(-(d * d))
    elif kind == "bridge":
        value = kernel.mld ** (-d)
    elif kind == "spliced":
        if d == 0.0:
            value = kernel.mld * _naive_kernel_value(kernel.base, 1.0)
        else:
            value = _naive_kernel_value(kernel.base, d)
        return value * kernel.scale
    elif kind == "adj_pow_2":
        value = 1.0 / (2.0**d + kernel.adrez)
    elif kind == "inv_additive_residue":
        if kernel.grow_kind == "pow_2":
            g = 2.0**d
        elif kernel.grow_kind == "pow_e":
            g = math.exp(d)
        elif kernel.grow_kind == "square":
            g = d * d
        else:
            g = d
        value = 1.0 / (kernel.adrez + g)
    elif kind == "newton":
        value = 1.0 / (1.0 / kernel.mld + d * d)
    elif kind in ("decay_a", "decay_b"):
        power = 1 if kind == "decay_a" else 2
        whole = int(math.floor(d))
        h = 0.0
        for i in range(1, whole + 1):
            h += 1.0 / i**power
        h += (d - whole) / (whole + 1) ** power
        value = kernel.mld ** (-h)
    else:  # pragma: no cover
        raise HarnessError(f"unknown kernel kind {kind!r}")
    return value * kernel.scale
