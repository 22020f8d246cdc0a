"""Monte Carlo self-checks of the concentration bounds."""

import math

import numpy as np

from dmcvqkd.validate import BoundRow, run_all

TRIALS = 4000


def test_run_all_row_inventory():
    rows = run_all(seed=99, trials=TRIALS)
    labels = [(r.lemma, r.k, r.param) for r in rows]
    assert len(rows) == 14
    # chi-square tails at three exponents, both sides
    for x in (1.0, 2.0, 4.0):
        assert ("lemma1-upper", 100, x) in labels
        assert ("lemma1-lower", 100, x) in labels
    assert ("lemma2-interval", 100, 0.05) in labels
    assert ("lemma3-two-sided", 200, 2.0) in labels
    assert ("lemma3-one-sided", 200, 2.0) in labels
    assert ("lemma4-norm-upper", 500, 0.05) in labels
    assert ("lemma4-norm-lower", 500, 0.05) in labels
    assert ("lemma4-ip-lower", 500, 0.05) in labels
    assert ("pe-theorem", 500, 0.001) in labels


def test_run_all_bounds_hold():
    rows = run_all(seed=99, trials=TRIALS)
    for r in rows:
        if r.lemma == "lemma4-validity-edge":
            continue
        assert r.verdict == "ok", r
        var = max(r.claimed * (1 - r.claimed), 0.0)  # claims > 1 are vacuous
        slack = 3.0 * math.sqrt(var / r.trials)
        assert r.observed <= r.claimed + slack, r


def test_run_all_deterministic():
    a = run_all(seed=7, trials=1000)
    b = run_all(seed=7, trials=1000)
    assert [r.csv_row() for r in a] == [r.csv_row() for r in b]
    c = run_all(seed=8, trials=1000)
    obs_a = [r.observed for r in a if r.trials]
    obs_c = [r.observed for r in c if r.trials]
    assert obs_a != obs_c


def test_validity_edge_row():
    rows = run_all(seed=99, trials=1000)
    edge = [r for r in rows if r.lemma == "lemma4-validity-edge"]
    assert len(edge) == 1
    r = edge[0]
    # probing outside the stated validity range is reported, not tested
    assert r.verdict == "regime-error"
    assert r.trials == 0
    assert math.isnan(r.claimed) and math.isnan(r.observed)


def test_claimed_probabilities():
    rows = {(r.lemma, r.param): r for r in run_all(seed=99, trials=1000)}
    assert rows[("lemma1-upper", 2.0)].claimed == math.exp(-2.0)
    assert rows[("lemma2-interval", 0.05)].claimed == 0.1  # 2 eps
    assert rows[("lemma3-two-sided", 2.0)].claimed == 8.0 * math.exp(-2.0)
    assert rows[("lemma3-one-sided", 2.0)].claimed == 4.0 * math.exp(-2.0)
    assert rows[("lemma4-ip-lower", 0.05)].claimed == 0.2  # 4 eps
    assert rows[("pe-theorem", 0.001)].claimed == 0.001


def test_bound_row_csv_shape():
    rows = run_all(seed=99, trials=1000)
    for r in rows:
        assert len(r.csv_row()) == len(BoundRow.CSV_HEADER)
