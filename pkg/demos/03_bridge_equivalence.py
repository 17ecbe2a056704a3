"""The bridge kernel makes the field predictor mimic proximity exactly.

With kernel mld^(-d) and mld = number of entries, one entry at distance d
outweighs the whole table at distance d+1. Summing such votes per outcome
is then just a lexicographic comparison of per-level counts, which is
precisely what delanga with backtracking ties computes.
"""

import numpy as np

from fieldpred import AttributeSpec, Query, Schema, TrainingTable, fit, predict

# A table engineered so the champion level is tied and the runner-up
# level has to decide.
schema = Schema(
    (AttributeSpec("a", "categorical"), AttributeSpec("b", "categorical")),
    ("A", "B"),
)
table = TrainingTable(
    schema,
    [("0", "0"), ("0", "0"), ("0", "1"), ("1", "0"), ("1", "1")],
    [0, 1, 1, 1, 0],
)
query = Query(("0", "0"))

proximity = predict(fit(table, "delanga"), query)
print("delanga:", proximity.winner,
      f"(tie at the champion level, resolved {proximity.tie_depth} level(s) down)")

field = predict(fit(table, "rasturnat", "bridge"), query)
print("bridge: ", field.winner, {k: round(v, 6) for k, v in field.scores.items()})
print()

# Now at scale: random categorical tables, both predictors, every query.
rng = np.random.default_rng(2718)
agree = 0
trials = 500
for _ in range(trials):
    n_attrs = int(rng.integers(1, 5))
    m = int(rng.integers(2, 25))
    rows = [tuple(str(rng.integers(0, 3)) for _ in range(n_attrs)) for _ in range(m)]
    outcomes = [int(rng.integers(0, 2)) for _ in range(m)]
    t = TrainingTable(
        Schema(tuple(AttributeSpec(f"x{j}", "categorical") for j in range(n_attrs)), ("A", "B")),
        rows,
        outcomes,
    )
    q = Query(tuple(str(rng.integers(0, 3)) for _ in range(n_attrs)))
    if predict(fit(t, "delanga"), q).winner == predict(fit(t, "rasturnat", "bridge"), q).winner:
        agree += 1
print(f"agreement on {agree}/{trials} random instances")
