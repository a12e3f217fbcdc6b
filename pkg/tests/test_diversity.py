
import numpy as np
import pytest
from hypothesis import given, strategies as st
from hypothesis.extra.numpy import arrays

from oracles import rao_double_loop
from patfolio.diversity import (
    diversity_record,
    gini_simpson,
    proportions,
    rao_stirling,
    round4,
    true_diversity,
    variety,
)
from patfolio.errors import DomainError, EmptyPortfolioError, ShapeError
from patfolio.taxonomy import ClassSimilarityMap


def random_sim(rng, n):
    a = np.triu(rng.random((n, n)), 1)
    return a + a.T + np.eye(n)


def test_proportions_simple():
    assert proportions([2, 2, 0, 0]).tolist() == [0.5, 0.5, 0, 0]
    assert proportions([1, 0, 0]).tolist() == [1, 0, 0]


def test_proportions_empty():
    with pytest.raises(EmptyPortfolioError):
        proportions([0, 0, 0])


@given(arrays(np.int64, st.integers(1, 40), elements=st.integers(0, 10_000)).filter(lambda a: a.sum() > 0))
def test_proportions_sum_to_one(counts):
    assert abs(proportions(counts).sum() - 1) <= 1e-12


def test_single_class_has_no_diversity():
    sim = np.array([[1, 0.2], [0.2, 1]])
    delta = rao_stirling([1.0, 0.0], sim)
    assert delta == 0
    assert true_diversity(delta) == 1


def test_two_classes_half_cosine():
    assert rao_stirling([0.5, 0.5], np.array([[1, 0.5], [0.5, 1]])) == 0.25


def test_random_eight_classes_match_double_loop():
    rng = np.random.default_rng(8)
    for _ in range(50):
        p = rng.random(8)
        p /= p.sum()
        sim = random_sim(rng, 8)
        assert abs(rao_stirling(p, sim) - rao_double_loop(p.tolist(), sim.tolist())) <= 1e-12


def test_true_diversity_values():
    assert true_diversity(0) == 1
    assert true_diversity(0.5) == 2
    assert true_diversity(rao_stirling([0.5, 0.5], np.array([[1, 0.5], [0.5, 1]]))) == pytest.approx(4 / 3, abs=1e-15)


@pytest.mark.parametrize("bad", [1.0, 1.5, -0.01])
def test_true_diversity_domain(bad):
    with pytest.raises(DomainError):
        true_diversity(bad)


def test_gini_simpson_values():
    assert gini_simpson([1, 0, 0]) == 0
    assert gini_simpson([0.5, 0.5]) == 0.5


def test_gini_simpson_is_rao_with_unit_distances():
    rng = np.random.default_rng(6)
    for n in range(1, 30):
        p = rng.random(n) * (rng.random(n) < 0.6)
        if p.sum() == 0:
            continue
        p /= p.sum()
        assert rao_stirling(p, np.eye(n)) == gini_simpson(p)
        assert abs(gini_simpson(p) - (1 - float(np.sum(p**2)))) <= 1e-12


def test_variety():
    assert variety([0, 0, 0]) == 0
    rng = np.random.default_rng(4)
    v = rng.integers(0, 5, 200) * (rng.random(200) < 0.2)
    assert variety(v) == sum(1 for x in v if x > 0)


def test_shape_mismatch():
    with pytest.raises(ShapeError):
        rao_stirling([0.5, 0.5], np.eye(3))


def test_lookup_by_code_with_missing_class(toy_map):
    # Y02E is absent from the map, so it sits at distance 1 from everything
    p = [0.5, 0.5]
    assert rao_stirling(p, toy_map, ["G06F", "Y02E"]) == 0.5
    assert rao_stirling(p, toy_map, ["G06F", "H04L"]) == pytest.approx(0.2, abs=1e-15)


def test_record_fields(toy_map):
    counts = np.array([0, 3, 0, 2, 1, 1])
    rec = diversity_record(counts, toy_map, n_patents=4)
    assert rec.variety == 4 and rec.n_patents == 4
    assert rec.true_diversity == pytest.approx(1 / (1 - rec.rao_delta), abs=1e-12)
    assert rec.rao_delta <= rec.gini_simpson


def test_round4_half_even():
    assert round4(0.88944999) == "0.8894"
    assert round4(0.5) == "0.5000"
    assert round4(0.12345) == "0.1235"  # 0.12345 is stored slightly above the tie
    assert round4(0.00005) == "0.0001"  # slightly above too
    assert round4(0.03125) == "0.0312"  # exact binary tie goes to even


# --- properties --------------------------------------------------------------

portfolio = st.integers(2, 12).flatmap(
    lambda n: st.tuples(
        arrays(np.int64, n, elements=st.integers(0, 50)).filter(lambda a: a.sum() > 0),
        arrays(np.float64, (n, n), elements=st.floats(0, 1)),
        st.permutations(list(range(n))),
    )
)


def _sym(a):
    s = np.triu(a, 1)
    return s + s.T + np.eye(len(a))


@given(portfolio)
def test_permutation_invariance(case):
    counts, raw, perm = case
    sim = _sym(raw)
    p = proportions(counts)
    perm = np.array(perm)
    assert rao_stirling(p[perm], sim[np.ix_(perm, perm)]) == rao_stirling(p, sim)


@given(portfolio, st.integers(1, 1000))
def test_scaling_invariance(case, k):
    counts, raw, _ = case
    sim = ClassSimilarityMap([f"A{i:02d}B" for i in range(len(counts))], _sym(raw))
    a = diversity_record(counts, sim, n_patents=1)
    b = diversity_record(counts * k, sim, n_patents=1)
    assert (a.variety, a.gini_simpson, a.rao_delta, a.true_diversity) == (
        b.variety, b.gini_simpson, b.rao_delta, b.true_diversity
    )


@given(portfolio)
def test_bounds_and_zero_iff_single_class(case):
    counts, raw, _ = case
    sim = np.minimum(_sym(raw), 0.999)
    np.fill_diagonal(sim, 1.0)
    p = proportions(counts)
    delta = rao_stirling(p, sim)
    assert 0 <= delta < 1
    assert delta <= gini_simpson(p)
    assert (delta == 0) == (variety(counts) == 1)


@given(portfolio, portfolio)
def test_monotone_link(a, b):
    da = rao_stirling(proportions(a[0]), _sym(a[1]))
    db = rao_stirling(proportions(b[0]), _sym(b[1]))
    assert (da < db) == (true_diversity(da) < true_diversity(db))
