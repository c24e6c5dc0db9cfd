import itertools
from collections import deque

import numpy as np
import pytest

from templink.centrality import betweenness, pagerank
from templink.graphs import SocialGraph


def graph_from_pairs(n, pairs, weights=None):
    if weights is None:
        weights = [1.0] * len(pairs)
    return SocialGraph([f"n{i}" for i in range(n)],
                       [(a, b, w) for (a, b), w in zip(pairs, weights)])


def dense_pagerank_oracle(g, damping, iterations=20000):
    """Independent dense-matrix power iteration."""
    n = g.node_count
    P = np.zeros((n, n))
    for v in range(n):
        total = sum(g.adj[v].values())
        if total == 0:
            P[:, v] = 1.0 / n
            continue
        for u, w in g.adj[v].items():
            P[u, v] = w / total
    r = np.full(n, 1.0 / n)
    for _ in range(iterations):
        nxt = (1 - damping) / n + damping * P @ r
        if np.abs(nxt - r).sum() < 1e-14:
            break
        r = nxt
    return r


def brute_force_betweenness(g):
    """Enumerate all shortest paths per pair via BFS path counting."""
    n = g.node_count
    score = np.zeros(n)
    for s, t in itertools.combinations(range(n), 2):
        # BFS from s recording distances and all shortest paths to t
        dist = {s: 0}
        queue = deque([s])
        preds = {s: []}
        while queue:
            v = queue.popleft()
            for u in g.adj[v]:
                if u not in dist:
                    dist[u] = dist[v] + 1
                    preds[u] = [v]
                    queue.append(u)
                elif dist[u] == dist[v] + 1:
                    preds[u].append(v)
        if t not in dist:
            continue
        paths = []
        stack = [[t]]
        while stack:
            path = stack.pop()
            if path[-1] == s:
                paths.append(path)
                continue
            for p in preds[path[-1]]:
                stack.append(path + [p])
        for path in paths:
            for v in path[1:-1]:
                score[v] += 1.0 / len(paths)
    if n > 2:
        score /= (n - 1) * (n - 2) / 2.0
    return score


def test_pagerank_three_cycle_symmetry():
    g = graph_from_pairs(3, [(0, 1), (1, 2), (0, 2)])
    scores = pagerank(g, damping=0.85)
    for name in g.names:
        assert scores.by_name[name] == pytest.approx(1 / 3, abs=1e-12)


def test_pagerank_star_matches_dense_oracle():
    g = graph_from_pairs(4, [(0, 1), (0, 2), (0, 3)])
    scores = pagerank(g, damping=0.85, tol=1e-14)
    oracle = dense_pagerank_oracle(g, 0.85)
    for v in range(4):
        assert scores.by_name[g.names[v]] == pytest.approx(oracle[v], abs=1e-10)


def test_pagerank_respects_weights():
    # node 0 splits its mass 3:1 between nodes 1 and 2
    g = graph_from_pairs(3, [(0, 1), (0, 2)], weights=[3.0, 1.0])
    scores = pagerank(g, damping=0.85, tol=1e-14)
    oracle = dense_pagerank_oracle(g, 0.85)
    for v in range(3):
        assert scores.by_name[g.names[v]] == pytest.approx(oracle[v], abs=1e-10)
    assert scores.by_name["n1"] > scores.by_name["n2"]


def test_pagerank_sums_to_one_and_uniform_at_tiny_damping():
    rng = np.random.default_rng(5)
    pairs = [(a, b) for a, b in itertools.combinations(range(12), 2)
             if rng.random() < 0.3]
    g = graph_from_pairs(12, pairs)
    scores = pagerank(g, damping=0.85)
    assert sum(scores.by_name.values()) == pytest.approx(1.0, abs=1e-9)
    assert all(v > 0 for v in scores.by_name.values())
    nearly_uniform = pagerank(g, damping=1e-6)
    for v in nearly_uniform.by_name.values():
        assert abs(v - 1 / 12) < 1e-4


def test_pagerank_relabel_invariance():
    pairs = [(0, 1), (1, 2), (2, 3), (3, 0), (0, 2)]
    g1 = graph_from_pairs(4, pairs)
    relabel = {0: 2, 1: 0, 2: 3, 3: 1}
    g2 = SocialGraph([f"m{i}" for i in range(4)],
                     [(relabel[a], relabel[b], 1.0) for a, b in pairs])
    s1 = pagerank(g1, tol=1e-13)
    s2 = pagerank(g2, tol=1e-13)
    for old, new in relabel.items():
        assert s1.by_name[f"n{old}"] == pytest.approx(s2.by_name[f"m{new}"], abs=1e-10)


def test_betweenness_path_and_star():
    path = graph_from_pairs(3, [(0, 1), (1, 2)])
    scores = betweenness(path)
    assert scores.by_name["n1"] == pytest.approx(1.0)
    assert scores.by_name["n0"] == scores.by_name["n2"] == 0.0
    star = graph_from_pairs(5, [(0, i) for i in range(1, 5)])
    assert betweenness(star).by_name["n0"] == pytest.approx(1.0)


def test_betweenness_matches_brute_force_on_random_graphs():
    rng = np.random.default_rng(11)
    for trial in range(25):
        n = int(rng.integers(3, 20))
        pairs = [(a, b) for a, b in itertools.combinations(range(n), 2)
                 if rng.random() < 0.3]
        g = graph_from_pairs(n, pairs)
        got = betweenness(g)
        want = brute_force_betweenness(g)
        for v in range(n):
            assert got.by_name[g.names[v]] == pytest.approx(want[v], abs=1e-9)


def test_feature_value_imputes_mean():
    g = graph_from_pairs(3, [(0, 1), (1, 2)])
    pr = pagerank(g)
    present = pr.feature_value("n1")
    assert present == pr.by_name["n1"]
    absent = pr.feature_value("stranger")
    assert absent == pytest.approx(1 / 3, abs=1e-9)  # pagerank sums to 1
    bw = betweenness(g)
    assert bw.feature_value("stranger") == pytest.approx(
        sum(bw.by_name.values()) / 3, abs=1e-12)
