import math

import numpy as np
import pytest

import percolab as pl
from percolab.connectivity import EventSpec
from percolab.estimate import (
    AllFailures,
    MCConfig,
    TooLarge,
    binomial_interval,
    fekete_check,
    fit_slope,
    oracle_coverage,
    random_small_events,
    rate_sequence,
)
from percolab.geometry import BoxRegion, FullSpace, direction


def test_binomial_interval_edges():
    lo, hi = binomial_interval(0, 100)
    assert lo == 0.0 and hi > 0.0
    lo, hi = binomial_interval(100, 100)
    assert hi == 1.0 and lo < 1.0
    lo, hi = binomial_interval(50, 100)
    assert lo < 0.5 < hi


def test_estimate_single_edge(square):
    model = pl.bernoulli(square, 0.5)
    ev = EventSpec(
        frozenset({(0, 0)}),
        frozenset({(1, 0)}),
        FullSpace(),
        BoxRegion((0, 0), 1),
        allowed_override=frozenset({(0, 0), (1, 0)}),
    )
    est = pl.estimate_probability(model, ev, MCConfig(100_000, 2))
    assert est.ci_lo <= 0.5 <= est.ci_hi


def test_zero_successes_interval(chain):
    model = pl.bernoulli(chain, 0.01)
    ev = pl.point_event(direction([1.0]), 6, chain, coarse=False)
    est = pl.estimate_probability(model, ev, MCConfig(100, 5))
    assert est.successes == 0
    assert est.p_hat == 0.0 and est.ci_lo == 0.0 and est.ci_hi > 0.0


def test_worker_count_invariance(square):
    model = pl.bernoulli(square, 0.3)
    ev = pl.q_event(direction([1.0, 0.0]), 1.0, direction([1.0, 0.0]), 5, square)
    runs = [
        pl.estimate_probability(model, ev, MCConfig(10_000, 11, workers=w))
        for w in (1, 2, 8)
    ]
    assert len({(r.successes, r.truncated_count) for r in runs}) == 1


def test_exact_probability_examples(chain, square):
    model = pl.bernoulli(chain, 0.4)
    ev = EventSpec(
        frozenset({(0,)}),
        frozenset({(3,)}),
        FullSpace(),
        BoxRegion((0,), 3),
        allowed_override=frozenset({(i,) for i in range(4)}),
    )
    assert pl.exact_probability(model, ev) == pytest.approx(0.4**3)

    m2 = pl.bernoulli(square, 0.5)
    ev2 = EventSpec(
        frozenset({(0, 0)}),
        frozenset({(1, 0)}),
        FullSpace(),
        BoxRegion((0, 0), 1),
        allowed_override=frozenset({(0, 0), (1, 0), (0, 1), (1, 1)}),
    )
    assert pl.exact_probability(m2, ev2) == pytest.approx(0.5 + 0.5 * 0.5**3)


def test_exact_probability_too_large(square):
    model = pl.bernoulli(square, 0.5)
    ev = pl.point_event(direction([1.0, 0.0]), 3, square)
    with pytest.raises(TooLarge):
        pl.exact_probability(model, ev)


def test_rate_sequence_exact_law(chain):
    model = pl.bernoulli(chain, 0.8)
    family = lambda N: pl.point_event(direction([1.0]), N, chain, coarse=False)
    seq = rate_sequence(model, family, [3, 5, 8], MCConfig(100_000, 13, ci_level=0.99))
    want = -math.log(0.8)
    for entry in seq.entries:
        assert entry.rate_lo <= want <= entry.rate_hi
    assert seq.slope_rate == pytest.approx(want, abs=0.02)
    assert seq.endpoint_rate == pytest.approx(want, abs=0.02)


def test_rate_sequence_constant_event(chain):
    model = pl.bernoulli(chain, 0.5)
    trivial = EventSpec(frozenset({(0,)}), frozenset({(0,)}), FullSpace(), BoxRegion((0,), 2))
    seq = rate_sequence(model, lambda N: trivial, [1, 2, 3], MCConfig(1000, 3))
    assert seq.slope_rate == pytest.approx(0.0, abs=1e-12)
    assert seq.endpoint_rate == pytest.approx(0.0, abs=1e-12)


def test_rate_sequence_all_failures(chain):
    model = pl.bernoulli(chain, 0.05)
    family = lambda N: pl.point_event(direction([1.0]), N, chain, coarse=False)
    with pytest.raises(AllFailures):
        rate_sequence(model, family, [6, 8], MCConfig(50, 7))


def test_rate_sequence_requires_increasing_N(chain):
    model = pl.bernoulli(chain, 0.5)
    family = lambda N: pl.point_event(direction([1.0]), N, chain, coarse=False)
    with pytest.raises(ValueError):
        rate_sequence(model, family, [5, 3], MCConfig(10, 1))


def test_fit_slope_recovers_line():
    slope, se = fit_slope([1, 2, 3, 4], [2.0, 4.0, 6.0, 8.0], [0.1] * 4)
    assert slope == pytest.approx(2.0)
    assert se > 0


def test_fekete_sqrt_defect_holds():
    n_max = 200
    a = [2 * n + math.sqrt(n) for n in range(1, n_max + 1)]
    rep = fekete_check(a, f=lambda m: math.sqrt(m), g=lambda m: 0, N0=1)
    assert rep.holds and not rep.violations
    assert rep.limit_estimate == pytest.approx(2.0, abs=1.0 / math.sqrt(n_max))
    assert rep.limit_estimate >= 2.0


def test_fekete_parity_violation_found():
    a = [n + (n % 2) * n / 2 for n in range(1, 61)]
    rep = fekete_check(a, f=lambda m: 0.0, g=lambda m: 0, N0=1)
    assert not rep.holds
    assert (1, 2, a[2], a[0] + a[1]) in rep.violations


def test_fekete_exact_additive():
    c = 0.7
    a = [c * n for n in range(1, 41)]
    rep = fekete_check(a, f=lambda m: 0.0, g=lambda m: 0, N0=1, c_minus=0.1, c_plus=2.0)
    assert rep.holds and rep.bounds_ok
    assert rep.limit_estimate == pytest.approx(c)


def test_fekete_excuses_within_halfwidths():
    a = [1.0, 2.0, 3.2]  # deficit 0.2 at the (1, 2) pairs
    rep = fekete_check(a, f=lambda m: 0.0, g=lambda m: 0, N0=1, halfwidths=[0.1, 0.1, 0.1])
    assert rep.holds
    assert len(rep.excused) == 2  # ordered pairs (1, 2) and (2, 1)
    rep2 = fekete_check(a, f=lambda m: 0.0, g=lambda m: 0, N0=1, halfwidths=[0.01, 0.01, 0.01])
    assert not rep2.holds


def test_oracle_coverage_small():
    report = oracle_coverage(8, seed=101, samples=20_000)
    assert report.count == 8
    assert report.hits >= 7


def test_random_small_events_budget():
    for model, event in random_small_events(20, seed=5):
        exact = pl.exact_probability(model, event, edge_limit=18)
        assert 0.0 <= exact <= 1.0


def test_indicator_counts_match_estimate(square):
    model = pl.bernoulli(square, 0.3)
    ev = pl.q_event(direction([1.0, 0.0]), 1.0, direction([1.0, 0.0]), 4, square)
    mc = MCConfig(20_000, 19)
    conn, trunc = pl.evaluate_indicators(model, ev, mc)
    est = pl.estimate_probability(model, ev, mc)
    assert int(conn.sum()) == est.successes
    assert int(trunc.sum()) == est.truncated_count
