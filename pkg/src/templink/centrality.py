"""PageRank and betweenness centrality on the social network.

PageRank respects edge weights (each undirected edge acts as two directed
arcs with weight-proportional transition probabilities); betweenness uses
unweighted shortest paths (Brandes accumulation) with the standard
undirected normalization (n-1)(n-2)/2.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass

import numpy as np

from .exceptions import ConvergenceError


@dataclass
class CentralityScores:
    measure: str
    by_name: dict[str, float]
    imputed_mean: float

    def feature_value(self, name: str) -> float:
        """Score for a character; mean-imputed when absent from the graph."""
        return self.by_name.get(name, self.imputed_mean)


def _scores(measure, graph, values) -> CentralityScores:
    by_name = {graph.names[v]: float(values[v]) for v in range(graph.node_count)}
    return CentralityScores(measure, by_name, float(np.mean(values)))


def pagerank(graph, damping: float = 0.85, tol: float = 1e-10,
             max_iter: int = 1000) -> CentralityScores:
    """Weighted PageRank by power iteration; L1 change < tol at termination."""
    if not 0 < damping < 1:
        raise ValueError("damping must be in (0, 1)")
    n = graph.node_count
    if n == 0:
        raise ValueError("graph is empty")
    # column-stochastic transition structure in sparse triplet form
    rows, cols, probs = [], [], []
    dangling = np.zeros(n, dtype=bool)
    for v in range(n):
        out = graph.adj[v]
        total = sum(out.values())
        if total <= 0:
            dangling[v] = True
            continue
        for u, w in sorted(out.items()):
            rows.append(u)
            cols.append(v)
            probs.append(w / total)
    rows = np.array(rows, dtype=np.intp)
    cols = np.array(cols, dtype=np.intp)
    probs = np.array(probs, dtype=float)

    rank = np.full(n, 1.0 / n)
    base = (1.0 - damping) / n
    for _ in range(max_iter):
        spread = np.zeros(n)
        np.add.at(spread, rows, probs * rank[cols])
        nxt = base + damping * (spread + rank[dangling].sum() / n)
        if np.abs(nxt - rank).sum() < tol:
            return _scores("pagerank", graph, nxt)
        rank = nxt
    raise ConvergenceError(
        f"pagerank did not converge within {max_iter} iterations",
        last=_scores("pagerank", graph, rank))


def betweenness(graph) -> CentralityScores:
    """Brandes betweenness over unweighted shortest paths, normalized to [0,1]."""
    n = graph.node_count
    if n == 0:
        raise ValueError("graph is empty")
    acc = np.zeros(n)
    neighbors = [sorted(graph.adj[v]) for v in range(n)]
    for s in range(n):
        stack = []
        preds = [[] for _ in range(n)]
        sigma = np.zeros(n)
        sigma[s] = 1.0
        dist = np.full(n, -1)
        dist[s] = 0
        queue = deque([s])
        while queue:
            v = queue.popleft()
            stack.append(v)
            for u in neighbors[v]:
                if dist[u] < 0:
                    dist[u] = dist[v] + 1
                    queue.append(u)
                if dist[u] == dist[v] + 1:
                    sigma[u] += sigma[v]
                    preds[u].append(v)
        delta = np.zeros(n)
        while stack:
            w = stack.pop()
            for v in preds[w]:
                delta[v] += sigma[v] / sigma[w] * (1.0 + delta[w])
            if w != s:
                acc[w] += delta[w]
    # each unordered pair is accumulated from both endpoints; normalize by
    # 2 * (n-1)(n-2)/2
    if n > 2:
        acc /= (n - 1.0) * (n - 2.0)
    return _scores("betweenness", graph, acc)
