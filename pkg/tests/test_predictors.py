import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fieldpred import (
    AttributeSpec,
    DensityModel,
    FittedModel,
    PredictorError,
    Query,
    Schema,
    TrainingTable,
    backtrack_tie_break,
    compute_density_model,
    fit,
    load_model,
    make_kernel,
    predict,
    save_model,
    with_scale,
)
from fieldpred.predictors import model_from_dict, model_to_dict

from .util import (
    brute_delanga,
    brute_one_nn,
    random_categorical_instance,
    random_continuous_instance,
)


def two_bit_table(rows_and_outcomes):
    schema = Schema(
        (AttributeSpec("a", "categorical"), AttributeSpec("b", "categorical")),
        ("A", "B"),
    )
    rows = [r for r, _ in rows_and_outcomes]
    outcomes = [{"A": 0, "B": 1}[o] for _, o in rows_and_outcomes]
    return TrainingTable(schema, rows, outcomes)


THREE_ROWS = [(("0", "0"), "A"), (("0", "1"), "B"), (("1", "1"), "B")]


class TestDelanga:
    def test_singleton_predictive_set(self):
        model = fit(two_bit_table(THREE_ROWS), "delanga", trace=True)
        p = predict(model, Query(("0", "0")))
        assert p.winner == "A"
        assert p.likelihoods == {"A": 1.0, "B": 0.0}
        assert p.tie_depth == 0
        assert p.trace.champion_rows == (0,)
        assert p.trace.champion_distance == 0.0

    def test_champion_tie_broken_at_next_level(self):
        table = two_bit_table(
            [(("0", "0"), "A"), (("0", "0"), "B"), (("0", "1"), "B")]
        )
        p = predict(fit(table, "delanga"), Query(("0", "0")))
        assert p.winner == "B"
        assert p.tie_depth == 1
        # Likelihoods still come from the champion set alone.
        assert p.likelihoods == {"A": 0.5, "B": 0.5}

    def test_unanimous_table_ignores_query(self):
        table = two_bit_table([(("0", "0"), "B"), (("1", "1"), "B")])
        model = fit(table, "delanga")
        for q in (("0", "0"), ("1", "0"), ("z", "z")):
            assert predict(model, Query(q)).winner == "B"

    def test_fully_tied_falls_back_to_label_order(self):
        table = two_bit_table([(("0", "0"), "A"), (("0", "0"), "B")])
        p = predict(fit(table, "delanga"), Query(("0", "0")))
        assert p.winner == "A"
        assert p.tie_depth == 0  # one level in total, none beyond the first


class TestBacktrack:
    def test_first_differing_level_decides(self):
        winner, depth = backtrack_tie_break([[1, 1], [0, 1]], ("A", "B"))
        assert (winner, depth) == ("B", 1)

    def test_identical_everywhere_gives_earliest_label(self):
        winner, depth = backtrack_tie_break([[2, 2], [1, 1], [3, 3]], ("A", "B"))
        assert (winner, depth) == ("A", 2)

    def test_only_tied_outcomes_compete_downstream(self):
        # C dominates level 1 but was not part of the level-0 tie.
        counts = [[2, 2, 0], [0, 1, 9]]
        winner, depth = backtrack_tie_break(counts, ("A", "B", "C"))
        assert (winner, depth) == ("B", 1)

    def test_requires_a_tie(self):
        with pytest.raises(PredictorError, match="tie"):
            backtrack_tie_break([[2, 1]], ("A", "B"))


class TestRasturnat:
    def test_pow_2_hand_example(self):
        model = fit(two_bit_table(THREE_ROWS), "rasturnat", "pow_2")
        p = predict(model, Query(("0", "0")))
        assert p.scores == {"A": 1.0, "B": 0.75}
        assert p.winner == "A"
        assert p.tie_depth == 0
        assert p.likelihoods["A"] == pytest.approx(1.0 / 1.75, rel=1e-15)

    def test_single_row_always_wins(self):
        table = two_bit_table([(("1", "0"), "B")])
        for kind in ("pow_2", "pow_e", "gauss", "newton"):
            model = fit(table, "rasturnat", kind)
            p = predict(model, Query(("0", "0")))
            assert p.winner == "B"
            assert p.likelihoods == {"A": 0.0, "B": 1.0}

    def test_identical_rows_tie_to_earlier_label(self):
        table = two_bit_table([(("0", "0"), "A"), (("0", "0"), "B")])
        p = predict(fit(table, "rasturnat", "bridge"), Query(("1", "1")))
        assert p.scores["A"] == p.scores["B"]
        assert p.winner == "A"
        assert p.tie_depth == 1

    def test_trace_exposes_per_entry_scores(self):
        model = fit(two_bit_table(THREE_ROWS), "rasturnat", "pow_2", trace=True)
        p = predict(model, Query(("0", "0")))
        assert list(p.trace.ets) == [1.0, 0.5, 0.25]


class TestNearest:
    def test_exact_row_wins(self):
        model = fit(two_bit_table(THREE_ROWS), "nearest")
        assert predict(model, Query(("1", "1"))).winner == "B"

    def test_equidistant_unanimous(self):
        table = two_bit_table([(("0", "1"), "A"), (("1", "0"), "A"), (("1", "1"), "B")])
        p = predict(fit(table, "nearest"), Query(("0", "0")))
        assert p.winner == "A"
        assert p.tie_depth == 0

    def test_equidistant_majority(self):
        table = two_bit_table(
            [(("0", "1"), "B"), (("1", "0"), "B"), (("0", "1"), "A"), (("1", "1"), "A")]
        )
        p = predict(fit(table, "nearest"), Query(("0", "0")))
        assert p.winner == "B"


class TestFit:
    def test_rasturnat_wires_the_table_lead(self):
        rng = np.random.default_rng(0)
        while True:
            table, _ = random_categorical_instance(rng)
            if table.n_entries == 10:
                break
        model = fit(table, "rasturnat", "bridge")
        assert model.kernel.mld == 10.0

    def test_density_model_shape(self):
        table = two_bit_table(THREE_ROWS)
        model = fit(table, "rasturnat", "newton", density=True)
        assert len(model.density.tss) == 3
        assert len(model.density.dcf) == 3

    def test_kernel_rejected_off_rasturnat(self):
        table = two_bit_table(THREE_ROWS)
        with pytest.raises(PredictorError, match="rasturnat parameter"):
            fit(table, "delanga", "bridge")
        with pytest.raises(PredictorError, match="rasturnat parameter"):
            fit(table, "nearest", density=True)
        with pytest.raises(PredictorError, match="rasturnat parameter"):
            fit(table, "delanga", mld_override=5.0)

    def test_rasturnat_requires_kernel(self):
        with pytest.raises(PredictorError, match="kernel"):
            fit(two_bit_table(THREE_ROWS), "rasturnat")

    def test_unknown_predictor(self):
        with pytest.raises(PredictorError, match="unknown predictor"):
            fit(two_bit_table(THREE_ROWS), "centroid")

    def test_wrong_dispatch_rejected(self):
        model = fit(two_bit_table(THREE_ROWS), "delanga")
        from fieldpred.predictors import predict_rasturnat

        with pytest.raises(PredictorError, match="fitted for"):
            predict_rasturnat(model, Query(("0", "0")))


class TestDensity:
    def test_uniform_table_dcf_exactly_one(self):
        table = two_bit_table([(("0", "0"), "A")] * 4)
        kernel = make_kernel("bridge", 4, table.total_weight)
        density = compute_density_model(table, kernel)
        assert list(density.dcf) == [1.0, 1.0, 1.0, 1.0]

    def test_symmetric_pair_worked_example(self):
        table = two_bit_table([(("0", "0"), "A"), (("1", "1"), "B")])
        kernel = make_kernel("bridge", 2, table.total_weight)
        density = compute_density_model(table, kernel)
        assert list(density.tss) == [1.25, 1.25]
        assert density.sts == 2.5
        assert density.stavg == 1.25
        assert list(density.dcf) == [1.0, 1.0]

    def test_isolated_row_compensated_up(self):
        schema = Schema(
            (AttributeSpec(f"a{j}", "categorical") for j in range(4)),
            ("A", "B"),
        )
        rows = [("0",) * 4, ("0",) * 4, ("1",) * 4]
        table = TrainingTable(schema, rows, [0, 0, 1])
        kernel = make_kernel("bridge", 3, table.total_weight)
        density = compute_density_model(table, kernel)
        assert density.dcf[2] > 1.0 > density.dcf[0]
        assert density.dcf[0] == density.dcf[1]

    def test_self_term_exclusion_flag(self):
        table = two_bit_table([(("0", "0"), "A"), (("1", "1"), "B")])
        kernel = make_kernel("bridge", 2, table.total_weight)
        full = compute_density_model(table, kernel)
        bare = compute_density_model(table, kernel, include_self=False)
        sepm = float(kernel.evaluate(0.0))
        assert list(bare.tss) == [t - sepm for t in full.tss]

    def test_exclusion_needs_two_rows(self):
        table = two_bit_table([(("0", "0"), "A")])
        kernel = make_kernel("bridge", 1, table.total_weight)
        with pytest.raises(PredictorError, match="two entries"):
            compute_density_model(table, kernel, include_self=False)

    def test_density_model_validates_positivity(self):
        with pytest.raises(PredictorError):
            DensityModel(
                tss=np.array([1.0, -0.5]),
                sts=0.5,
                stavg=0.25,
                dcf=np.array([0.25, -0.5]),
            )

    def test_density_changes_scores_not_validity(self):
        table = two_bit_table(THREE_ROWS + [(("0", "0"), "A")])
        plain = fit(table, "rasturnat", "newton")
        comp = fit(table, "rasturnat", "newton", density=True)
        q = Query(("0", "1"))
        a, b = predict(plain, q), predict(comp, q)
        assert a.scores != b.scores
        assert sum(b.likelihoods.values()) == pytest.approx(1.0, abs=1e-9)


@settings(max_examples=300, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_delanga_matches_exhaustive_oracle(seed):
    rng = np.random.default_rng(seed)
    table, query = random_categorical_instance(rng)
    p = predict(fit(table, "delanga"), query)
    assert p.winner == brute_delanga(table, query)


@settings(max_examples=200, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_distinct_distances_reduce_delanga_to_one_nn(seed):
    rng = np.random.default_rng(seed)
    table, query = random_continuous_instance(rng)
    d = predict(fit(table, "delanga"), query)
    n = predict(fit(table, "nearest"), query)
    assert d.winner == n.winner == brute_one_nn(table, query)
    assert d.tie_depth == 0


@settings(max_examples=200, deadline=None)
@given(st.integers(0, 2**32 - 1), st.sampled_from(["pow_2", "bridge", "newton", "gauss"]))
def test_prediction_invariants(seed, kind):
    rng = np.random.default_rng(seed)
    table, query = random_categorical_instance(rng)
    p = predict(fit(table, "rasturnat", kind), query)
    assert sum(p.likelihoods.values()) == pytest.approx(1.0, abs=1e-9)
    assert all(v >= 0.0 for v in p.scores.values())
    assert p.scores[p.winner] == max(p.scores.values())


@settings(max_examples=150, deadline=None)
@given(st.integers(0, 2**32 - 1), st.floats(1e-6, 1e6))
def test_scaling_leaves_predictions_unchanged(seed, factor):
    rng = np.random.default_rng(seed)
    table, query = random_categorical_instance(rng)
    base = fit(table, "rasturnat", "pow_2")
    scaled = FittedModel(table, "rasturnat", kernel=with_scale(base.kernel, factor))
    a, b = predict(base, query), predict(scaled, query)
    assert a.winner == b.winner
    for label in a.likelihoods:
        assert a.likelihoods[label] == pytest.approx(b.likelihoods[label], rel=1e-9)


@settings(max_examples=150, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_bridge_agrees_with_delanga(seed):
    rng = np.random.default_rng(seed)
    table, query = random_categorical_instance(rng)
    bridge = predict(fit(table, "rasturnat", "bridge"), query)
    delanga = predict(fit(table, "delanga"), query)
    assert bridge.winner == delanga.winner


@settings(max_examples=100, deadline=None)
@given(st.integers(0, 2**32 - 1), st.integers(2, 5))
def test_perfect_match_dominance(seed, extra):
    # With a certified kernel, outcome k holding strictly more exact matches
    # than any rival wins no matter what the rest of the table says.
    rng = np.random.default_rng(seed)
    table, query = random_categorical_instance(rng)
    labels = table.schema.outcome_labels
    k = int(rng.integers(len(labels)))
    rival = int(rng.integers(len(labels)))
    rows = list(table.values) + [query.values] * extra
    outcomes = list(table.outcomes) + [k] * extra
    if rival != k:
        rows += [query.values] * (extra - 1)
        outcomes += [rival] * (extra - 1)
    # Drop pre-existing exact matches so the implanted counts decide.
    keep = [i for i, r in enumerate(rows[: table.n_entries]) if r != query.values]
    rows = [rows[i] for i in keep] + rows[table.n_entries:]
    outcomes = [outcomes[i] for i in keep] + outcomes[table.n_entries:]
    stacked = TrainingTable(table.schema, rows, outcomes)
    model = fit(stacked, "rasturnat", "bridge")
    from fieldpred import certify_lead

    assert certify_lead(model.kernel, stacked.n_entries).certified
    assert predict(model, query).winner == labels[k]


@settings(max_examples=100, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_predictions_are_deterministic(seed):
    rng = np.random.default_rng(seed)
    table, query = random_categorical_instance(rng)
    model = fit(table, "rasturnat", "adj_pow_2" if table.n_entries > 1 else "pow_2")
    a, b = predict(model, query), predict(model, query)
    assert a.scores == b.scores
    assert a.likelihoods == b.likelihoods
    assert (a.winner, a.tie_depth) == (b.winner, b.tie_depth)


@settings(max_examples=100, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_density_aggregate_identity(seed):
    import math

    rng = np.random.default_rng(seed)
    table, _ = random_categorical_instance(rng)
    kernel = make_kernel("newton", table.n_entries, table.total_weight)
    density = compute_density_model(table, kernel)
    recovered = math.fsum(d * t for d, t in zip(density.dcf, density.tss))
    assert recovered == pytest.approx(density.sts, rel=1e-9)
    assert density.stavg == density.sts / table.n_entries


class TestModelFiles:
    def test_round_trip_preserves_predictions(self, tmp_path):
        rng = np.random.default_rng(42)
        table, query = random_categorical_instance(rng)
        model = fit(table, "rasturnat", "adj_pow_2", density=True)
        path = tmp_path / "model.json"
        save_model(model, path)
        loaded = load_model(path)
        a, b = predict(model, query), predict(loaded, query)
        assert a.scores == b.scores
        assert a.winner == b.winner
        assert np.array_equal(loaded.density.dcf, model.density.dcf)
        assert loaded.kernel.adrez == model.kernel.adrez

    def test_round_trip_spliced_kernel_descriptor(self, tmp_path):
        table = two_bit_table(THREE_ROWS)
        model = fit(table, "rasturnat", "spliced")
        path = tmp_path / "model.json"
        save_model(model, path)
        loaded = load_model(path)
        assert loaded.kernel.kind == "spliced"
        assert loaded.kernel.base.kind == "pow_2"
        assert loaded.kernel.mld == model.kernel.mld

    def test_delanga_model_has_no_kernel(self, tmp_path):
        model = fit(two_bit_table(THREE_ROWS), "delanga")
        payload = model_to_dict(model)
        assert payload["kernel"] is None
        restored = model_from_dict(payload)
        assert restored.kernel is None
        assert restored.predictor_kind == "delanga"

    def test_version_gate(self):
        payload = model_to_dict(fit(two_bit_table(THREE_ROWS), "delanga"))
        payload["version"] = 99
        with pytest.raises(PredictorError, match="version"):
            model_from_dict(payload)

    def test_invalid_json_reported(self, tmp_path):
        path = tmp_path / "model.json"
        path.write_text("{not json")
        with pytest.raises(PredictorError, match="invalid model file"):
            load_model(path)
