import itertools
import random

import networkx as nx
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from interlock_quality.exceptions import DisconnectedInput, InsufficientData, KeyMismatch, NoConvergence
from interlock_quality.graph import FirmGraph, FirmNode, from_edges, merge_nodes
from interlock_quality.metrics import (
    CentralityTable,
    betweenness,
    centralities,
    pagerank,
    rank_correlation_curve,
    spearman,
    spearman_values,
    topology_summary,
    transitivity,
)

import oracles


def clique(n):
    return from_edges(n, list(itertools.combinations(range(n), 2)))


def path(n):
    return from_edges(n, [(i, i + 1) for i in range(n - 1)])


def cycle(n):
    return from_edges(n, [(i, (i + 1) % n) for i in range(n)])


def star(leaves):
    return from_edges(leaves + 1, [(0, i) for i in range(1, leaves + 1)])


def with_attribute(g, name, values):
    nodes = tuple(FirmNode(n.node_id, n.member_firm_ids, n.board, n.guo_id, {name: float(v)})
                  for n, v in zip(g.nodes, values))
    return FirmGraph(nodes, g.adjacency)


# -- topology summary --------------------------------------------------------------------

def test_k4_summary():
    s = topology_summary(clique(4))
    assert (s.density, s.avg_degree, s.graph_clustering, s.avg_distance) == (1.0, 3.0, 1.0, 1.0)


def test_p4_summary():
    s = topology_summary(path(4))
    assert s.avg_degree == 1.5 and s.graph_clustering == 0.0
    assert s.avg_distance == pytest.approx(5 / 3, abs=1e-12)


@pytest.mark.parametrize("seed", range(5))
def test_summary_identities_and_distance_oracle(seed):
    rng = random.Random(seed)
    edges = oracles.random_graph(rng, 60, 0.08)
    g = from_edges(60, edges)
    s = topology_summary(g)
    assert s.density == pytest.approx(2 * s.edges / (s.nodes * (s.nodes - 1)))
    assert s.avg_degree == pytest.approx(2 * s.edges / s.nodes)
    G = nx.Graph(edges)
    G.add_nodes_from(range(60))
    if nx.is_connected(G):
        assert s.avg_distance == pytest.approx(oracles.average_distance(oracles.adjacency_sets(60, edges)))
        assert not s.on_giant_component


def test_disconnected_uses_giant_component_or_raises():
    g = from_edges(7, [(0, 1), (1, 2), (2, 3), (5, 6)])
    s = topology_summary(g)
    assert s.on_giant_component and s.avg_distance == pytest.approx(5 / 3)
    with pytest.raises(DisconnectedInput):
        topology_summary(g, exact=True)


def test_sampled_distance_within_three_stderr(golden_stages):
    g = golden_stages["step2"]
    exact = topology_summary(g)
    for seed in range(3):
        s = topology_summary(g, distance_sample=200, seed=seed)
        assert s.avg_distance_stderr > 0 and s.distance_sources == 200
        assert abs(s.avg_distance - exact.avg_distance) < 3 * s.avg_distance_stderr


def test_transitivity_flag_matches_networkx():
    rng = random.Random(3)
    edges = oracles.random_graph(rng, 40, 0.15)
    G = nx.Graph(edges)
    G.add_nodes_from(range(40))
    g = from_edges(40, edges)
    assert transitivity(g) == pytest.approx(nx.transitivity(G), abs=1e-12)
    assert topology_summary(g, clustering="transitivity").graph_clustering == pytest.approx(nx.transitivity(G))
    assert topology_summary(g).graph_clustering == pytest.approx(nx.average_clustering(G), abs=1e-12)


# -- pagerank -----------------------------------------------------------------------------

def test_cycle_uniform():
    np.testing.assert_allclose(pagerank(cycle(5)), 0.2, atol=1e-9)


def test_three_star_closed_form():
    c, leaf = oracles.star_pagerank(3)
    p = pagerank(star(3))
    assert p[0] == pytest.approx(c, abs=1e-6)
    np.testing.assert_allclose(p[1:], leaf, atol=1e-6)
    assert (c, leaf) == pytest.approx((0.479730, 0.173423), abs=1e-6)


@pytest.mark.parametrize("seed", range(8))
def test_pagerank_against_dense_iteration(seed):
    rng = random.Random(seed)
    n = rng.randint(5, 60)
    edges = oracles.random_graph(rng, n, rng.uniform(0.02, 0.3))
    g = from_edges(n, edges)
    p = pagerank(g)
    assert p.sum() == pytest.approx(1.0, abs=1e-6)
    assert (p >= (1 - 0.85) / n - 1e-12).all()
    np.testing.assert_allclose(p, oracles.pagerank_dense(oracles.adjacency_sets(n, edges)), atol=1e-8)


def test_pagerank_no_convergence_carries_iterate():
    with pytest.raises(NoConvergence) as err:
        pagerank(star(3), max_iter=2)
    assert err.value.scores.sum() == pytest.approx(1.0)
    with pytest.warns(RuntimeWarning):
        pagerank(star(3), max_iter=2, strict=False)


# -- betweenness --------------------------------------------------------------------------

def test_p3_center():
    np.testing.assert_array_equal(betweenness(path(3)), [0.0, 1.0, 0.0])


def test_c4_each_half():
    np.testing.assert_allclose(betweenness(cycle(4)), 0.5)


@pytest.mark.parametrize("seed", range(10))
def test_betweenness_matches_path_count_oracle(seed):
    rng = random.Random(100 + seed)
    n = rng.randint(3, 60)
    edges = oracles.random_graph(rng, n, rng.uniform(0.03, 0.3))
    g = from_edges(n, edges)
    np.testing.assert_allclose(betweenness(g), oracles.path_count_betweenness(oracles.adjacency_sets(n, edges)),
                               atol=1e-9, rtol=0)


def test_betweenness_threads_and_leaves(golden_stages):
    g = golden_stages["step2"]
    a = betweenness(g, threads=1)
    b = betweenness(g, threads=4)
    assert np.array_equal(a, b)
    assert (a >= 0).all()
    assert (a[g.degrees == 1] == 0).all()


def test_sampled_betweenness_is_scaled():
    g = clique(6)
    sampled = betweenness(g, sample_sources=3)
    np.testing.assert_allclose(sampled, 0.0)
    s = betweenness(star(30), sample_sources=31)
    assert s[0] == pytest.approx(30 * 29 / 2)


@st.composite
def relabelled(draw):
    n = draw(st.integers(2, 25))
    edges = draw(st.lists(st.tuples(st.integers(0, n - 1), st.integers(0, n - 1)), max_size=60))
    perm = draw(st.permutations(range(n)))
    return n, edges, perm


@settings(max_examples=60, deadline=None)
@given(relabelled())
def test_centralities_invariant_under_relabelling(case):
    n, edges, perm = case
    g = from_edges(n, edges)
    h = from_edges(n, [(perm[u], perm[v]) for u, v in edges])
    a, b = centralities(g), centralities(h)
    for name in ("degree", "pagerank", "betweenness"):
        x, y = a.as_dict()[name], b.as_dict()[name]
        np.testing.assert_allclose(y[list(perm)], x, atol=1e-9)


def test_centrality_csv(tmp_path):
    t = centralities(path(3))
    t.to_csv(tmp_path / "c.csv")
    lines = (tmp_path / "c.csv").read_text().splitlines()
    assert lines[0] == "node_id,degree,pagerank,betweenness"
    assert lines[2].startswith("1,2,") and lines[2].endswith(",1")


# -- spearman ------------------------------------------------------------------------------

def test_spearman_examples():
    assert spearman(list("abcd"), list("abcd")) == 1.0
    assert spearman(list("abcd"), list("dcba")) == -1.0
    assert spearman(list("abcd"), list("bacd")) == pytest.approx(0.8)
    with pytest.raises(KeyMismatch):
        spearman(list("abc"), list("abd"))


@settings(max_examples=100, deadline=None)
@given(st.lists(st.floats(-1e6, 1e6, allow_nan=False), min_size=3, max_size=40, unique=True),
       st.randoms(use_true_random=False))
def test_spearman_matches_textbook_without_ties(x, rnd):
    y = list(x)
    rnd.shuffle(y)
    assert spearman_values(x, y) == pytest.approx(oracles.spearman_no_ties(x, y), abs=1e-9)


def test_spearman_ties_average_ranks():
    from scipy.stats import spearmanr
    x = [1, 2, 2, 3, 5, 5, 5]
    y = [2, 1, 4, 4, 3, 6, 7]
    assert spearman_values(x, y) == pytest.approx(spearmanr(x, y).statistic)


# -- rank correlation curves ---------------------------------------------------------------

def test_identical_ranking_gives_one():
    g = with_attribute(path(30), "employees", np.arange(30))
    t = {"score": np.arange(30, dtype=float)}
    curve = rank_correlation_curve(g, t, "employees", [5, 10, 30])
    assert [rho for _, rho in curve.points["score"]] == [1.0, 1.0, 1.0]
    assert list(curve.rows())[0] == ("score", "employees", 5, 1.0)


def test_random_centrality_near_zero():
    rng = np.random.default_rng(11)
    n = 2000
    g = with_attribute(from_edges(n, []), "employees", rng.permutation(n))
    curve = rank_correlation_curve(g, {"noise": rng.random(n)}, "employees", [500])
    assert abs(curve.points["noise"][0][1]) < 0.2


def test_curve_needs_enough_values():
    g = with_attribute(path(5), "employees", [1, 2, 3, 4, 5])
    with pytest.raises(InsufficientData):
        rank_correlation_curve(g, {"d": np.ones(5)}, "employees", [10])


def test_curve_accepts_table(golden_stages):
    g = golden_stages["original"]
    t = centralities(g)
    assert isinstance(t, CentralityTable)
    curve = rank_correlation_curve(g, t, "employees", [50, 200])
    assert set(curve.points) == {"degree", "pagerank", "betweenness"}
    assert all(-1 <= rho <= 1 for pts in curve.points.values() for _, rho in pts)


def test_merged_graph_metrics_consistent():
    g = merge_nodes(clique(5), [[0, 1], [2], [3], [4]])
    s = topology_summary(g)
    assert s.nodes == 4 and s.edges == 6 and s.avg_distance == 1.0
