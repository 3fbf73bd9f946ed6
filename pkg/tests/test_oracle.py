import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from connor.graph import from_edges, path_metrics
from connor.oracle import (CsdQuery, ParetoLabel, cost_bounds, dominates, exact_csd, pareto_frontier,
                           pareto_search, shortest_distance)

from conftest import brute_csd, brute_frontier, random_graph, small_graphs


def q(g, s, t, theta):
    return CsdQuery(g.index_of(s), g.index_of(t), theta)


def test_fig1_answers(fig1):
    assert exact_csd(fig1, q(fig1, "a", "c", 4)) == 6
    assert exact_csd(fig1, q(fig1, "a", "c", 11)) == 5
    assert exact_csd(fig1, q(fig1, "a", "c", 2)) is None
    assert cost_bounds(fig1, fig1.index_of("a"), fig1.index_of("c")) == (3, 11)
    assert pareto_frontier(fig1, fig1.index_of("a"), fig1.index_of("c")) == [(5, 11), (6, 3)]


def test_fig1_witness_path(fig1):
    res = pareto_search(fig1, fig1.index_of("a"))
    c = fig1.index_of("c")
    i = res.frontier[c].index((6, 3))
    path = res.path(c, i)
    assert [fig1.label(v) for v in path] == ["a", "b", "c"]
    assert path_metrics(fig1, path) == (6, 3)


def test_self_and_unreachable():
    g = from_edges(3, [(0, 1, 2, 2)])
    assert exact_csd(g, CsdQuery(0, 0, 0)) == 0
    assert exact_csd(g, CsdQuery(1, 0, 100)) is None
    assert exact_csd(g, CsdQuery(0, 1, -1)) is None
    assert cost_bounds(g, 0, 2) is None
    assert shortest_distance(g, 0, 1) == 2


def test_parallel_route_tradeoff():
    # 0->1->3 short but expensive, 0->2->3 long but cheap
    g = from_edges(4, [(0, 1, 1, 10), (1, 3, 1, 10), (0, 2, 5, 1), (2, 3, 5, 1)])
    assert exact_csd(g, CsdQuery(0, 3, 20)) == 2
    assert exact_csd(g, CsdQuery(0, 3, 19)) == 10
    assert exact_csd(g, CsdQuery(0, 3, 1)) is None


def test_dominates():
    assert dominates((1, 2), (1, 3)) and dominates((1, 2), (2, 2))
    assert not dominates((1, 2), (1, 2))
    assert not dominates((1, 3), (2, 2))


@settings(max_examples=200)
@given(small_graphs(), st.data())
def test_exact_csd_matches_brute_force(g, data):
    s = data.draw(st.integers(0, g.n - 1))
    t = data.draw(st.integers(0, g.n - 1))
    theta = data.draw(st.integers(0, 60))
    assert exact_csd(g, CsdQuery(s, t, theta)) == brute_csd(g, s, t, theta)


@settings(max_examples=200)
@given(small_graphs(zero_weights=True), st.data())
def test_frontier_matches_brute_force(g, data):
    s = data.draw(st.integers(0, g.n - 1))
    t = data.draw(st.integers(0, g.n - 1))
    if s == t:
        return
    assert pareto_frontier(g, s, t) == [ParetoLabel(*p) for p in brute_frontier(g, s, t)]


@settings(max_examples=100)
@given(small_graphs(), st.integers(0, 6))
def test_search_labels_are_realised_by_paths(g, s):
    s %= g.n
    for reverse in (False, True):
        res = pareto_search(g, s, reverse=reverse)
        for v, labels in enumerate(res.frontier):
            assert labels == sorted(labels)
            assert all(not dominates(a, b) for a in labels for b in labels)
            for i, lab in enumerate(labels):
                path = res.path(v, i)
                assert path_metrics(g, path) == tuple(lab)
                assert path[0 if not reverse else -1] == s


@pytest.mark.parametrize("seed", range(5))
def test_reverse_search_agrees_with_forward(seed):
    g = random_graph(25, 60, seed)
    back = pareto_search(g, 0, reverse=True)
    for u in range(g.n):
        assert back.frontier[u] == pareto_frontier(g, u, 0)


def test_overflow_aborts():
    big = 2**62
    g = from_edges(3, [(0, 1, big, 1), (1, 2, big, 1)])
    with pytest.raises(OverflowError):
        pareto_search(g, 0)


def test_cost_cap_prunes():
    g = from_edges(3, [(0, 1, 1, 5), (1, 2, 1, 5)])
    res = pareto_search(g, 0, cap=7)
    assert res.frontier[1] == [(1, 5)] and res.frontier[2] == []
