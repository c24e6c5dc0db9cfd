"""Leiden modularity optimization and partition bookkeeping.

The implementation follows the three-phase scheme (queue-based local moving,
refinement inside communities, graph aggregation) and is fully deterministic
for a fixed seed: node visit order comes from a seeded PRNG, gain ties keep
the current community or fall back to the lowest community label, and final
labels are renumbered canonically by smallest member id.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field

import numpy as np

from .exceptions import TemplinkError

_MIN_GAIN = 1e-12


@dataclass
class Partition:
    """Community assignment over dense node ids 0..n-1."""

    labels: list[int]

    @property
    def community_count(self) -> int:
        return max(self.labels) + 1 if self.labels else 0

    def members(self) -> list[list[int]]:
        out = [[] for _ in range(self.community_count)]
        for v, c in enumerate(self.labels):
            out[c].append(v)
        return out

    def renumbered(self) -> "Partition":
        """Canonical labels: communities ordered by their smallest member."""
        first_member = {}
        for v, c in enumerate(self.labels):
            first_member.setdefault(c, v)
        order = sorted(first_member, key=first_member.get)
        remap = {c: i for i, c in enumerate(order)}
        return Partition([remap[c] for c in self.labels])

    @staticmethod
    def singletons(n: int) -> "Partition":
        return Partition(list(range(n)))


@dataclass
class PartitionStats:
    """Unweighted per-community node and link counts."""

    sizes: list[int]
    internal: list[int]
    between: dict[tuple[int, int], int] = field(default_factory=dict)


def partition_stats(graph, partition: Partition) -> PartitionStats:
    """Exact n_i, m_i and m_ij counts for a partition of ``graph``."""
    labels = partition.labels
    if len(labels) != graph.node_count:
        raise TemplinkError("partition does not cover the graph")
    k = partition.community_count
    sizes = [0] * k
    for c in labels:
        sizes[c] += 1
    internal = [0] * k
    between: dict[tuple[int, int], int] = {}
    for a, b, _w in graph.edges:
        ca, cb = labels[a], labels[b]
        if ca == cb:
            internal[ca] += 1
        else:
            key = (min(ca, cb), max(ca, cb))
            between[key] = between.get(key, 0) + 1
    return PartitionStats(sizes, internal, between)


def modularity(graph, partition: Partition, resolution: float = 1.0) -> float:
    """Newman modularity with a resolution parameter, on edge weights."""
    labels = partition.labels
    if len(labels) != graph.node_count:
        raise TemplinkError("partition does not cover the graph")
    m2 = 2.0 * graph.total_weight
    if m2 == 0:
        return 0.0
    k = partition.community_count
    intra = [0.0] * k
    tot = [0.0] * k
    for a, b, w in graph.edges:
        if labels[a] == labels[b]:
            intra[labels[a]] += w
    for v in range(graph.node_count):
        tot[labels[v]] += graph.strength(v)
    q = 0.0
    for c in range(k):
        q += 2.0 * intra[c] / m2 - resolution * (tot[c] / m2) ** 2
    return q


class _Level:
    """Mutable working state for one aggregation level."""

    def __init__(self, n, adj, strengths, resolution, labels):
        self.n = n
        self.adj = adj  # list of (neighbor, weight) tuples per node
        self.strength = strengths
        self.m2 = float(sum(strengths))
        self.gamma = resolution
        self.labels = list(labels)
        self.comm_tot: dict[int, float] = {}
        for v, c in enumerate(self.labels):
            self.comm_tot[c] = self.comm_tot.get(c, 0.0) + strengths[v]

    def move_gain(self, v, target, link_weights):
        """Modularity gain of attaching detached node v to ``target``."""
        k_vc = link_weights.get(target, 0.0)
        return 2.0 * k_vc / self.m2 - self.gamma * 2.0 * self.strength[v] * \
            self.comm_tot.get(target, 0.0) / (self.m2 * self.m2)

    def detach(self, v):
        self.comm_tot[self.labels[v]] -= self.strength[v]

    def attach(self, v, c):
        self.labels[v] = c
        self.comm_tot[c] = self.comm_tot.get(c, 0.0) + self.strength[v]


def _local_move(level: _Level, rng) -> int:
    """Queue-based local moving; returns the number of moves made."""
    order = np.arange(level.n)
    rng.shuffle(order)
    queue = deque(int(v) for v in order)
    in_queue = [True] * level.n
    moves = 0
    while queue:
        v = queue.popleft()
        in_queue[v] = False
        current = level.labels[v]
        level.detach(v)
        link_weights = {}
        for u, w in level.adj[v]:
            if u != v:
                c = level.labels[u]
                link_weights[c] = link_weights.get(c, 0.0) + w
        best_comm = current
        best_gain = level.move_gain(v, current, link_weights)
        for c in sorted(link_weights):
            if c == current:
                continue
            gain = level.move_gain(v, c, link_weights)
            if gain > best_gain + _MIN_GAIN:
                best_gain, best_comm = gain, c
        level.attach(v, best_comm)
        if best_comm != current:
            moves += 1
            for u, _w in level.adj[v]:
                if u != v and level.labels[u] != best_comm and not in_queue[u]:
                    queue.append(u)
                    in_queue[u] = True
    return moves


def _refine(level: _Level, rng) -> list[int]:
    """Split every community into connected sub-communities.

    Starts from singletons and greedily merges singleton nodes into adjacent
    refined groups of the same community when the merge has positive gain,
    so every refined group is internally connected.
    """
    refined = list(range(level.n))
    sub_tot = list(level.strength)
    order = np.arange(level.n)
    rng.shuffle(order)
    for v in map(int, order):
        if sub_tot[refined[v]] != level.strength[v]:
            continue  # no longer a singleton in the refined partition
        weights = {}
        for u, w in level.adj[v]:
            if u == v or level.labels[u] != level.labels[v]:
                continue
            r = refined[u]
            weights[r] = weights.get(r, 0.0) + w
        best_r, best_gain = refined[v], 0.0
        for r in sorted(weights):
            if r == refined[v]:
                continue
            gain = 2.0 * weights[r] / level.m2 - level.gamma * 2.0 * \
                level.strength[v] * sub_tot[r] / (level.m2 * level.m2)
            if gain > best_gain + _MIN_GAIN:
                best_gain, best_r = gain, r
        if best_r != refined[v]:
            sub_tot[best_r] += level.strength[v]
            sub_tot[refined[v]] -= level.strength[v]
            refined[v] = best_r
    return refined


def _split_disconnected(n, adj, labels):
    """Relabel so every community is a connected piece of its old community.

    Splitting a disconnected community never decreases modularity, so this is
    a terminal improvement pass that makes the connectivity guarantee
    unconditional.
    """
    seen = [False] * n
    next_label = 0
    out = [0] * n
    for start in range(n):
        if seen[start]:
            continue
        seen[start] = True
        queue = deque([start])
        comp = [start]
        while queue:
            v = queue.popleft()
            for u, _w in adj[v]:
                if not seen[u] and labels[u] == labels[start]:
                    seen[u] = True
                    comp.append(u)
                    queue.append(u)
        for v in comp:
            out[v] = next_label
        next_label += 1
    return out


def leiden(graph, resolution: float = 1.0, seed: int = 0) -> Partition:
    """Leiden community detection on an undirected weighted graph.

    Deterministic for fixed (graph, resolution, seed); returned labels are
    canonical (renumbered by smallest member id).
    """
    if graph.node_count == 0:
        raise TemplinkError("cannot partition an empty graph")
    if resolution <= 0:
        raise ValueError("resolution must be positive")
    rng = np.random.default_rng(np.random.SeedSequence((0x1E1DE4, seed)))

    n0 = graph.node_count
    adj0 = [[] for _ in range(n0)]
    for a, b, w in graph.edges:
        adj0[a].append((b, w))
        adj0[b].append((a, w))
    strengths0 = [graph.strength(v) for v in range(n0)]
    if sum(strengths0) == 0:
        return Partition.singletons(n0)

    n, adj, strengths = n0, adj0, strengths0
    init_labels = list(range(n))
    coarse_of_orig = list(range(n0))
    membership = list(range(n0))

    while True:
        level = _Level(n, adj, strengths, resolution, init_labels)
        moves = _local_move(level, rng)
        for i in range(n0):
            membership[i] = level.labels[coarse_of_orig[i]]
        if moves == 0 or len(set(level.labels)) == 1:
            break

        refined = _refine(level, rng)
        refined_ids = sorted(set(refined))
        remap = {r: i for i, r in enumerate(refined_ids)}
        new_n = len(refined_ids)
        # aggregate on the refined partition; internal weight is dropped from
        # the edge list but preserved in node strengths, which is all the
        # move-gain arithmetic needs
        agg_edges: dict[tuple[int, int], float] = {}
        for v in range(n):
            rv = remap[refined[v]]
            for u, w in adj[v]:
                if u <= v:
                    continue
                ru = remap[refined[u]]
                if ru == rv:
                    continue
                key = (min(rv, ru), max(rv, ru))
                agg_edges[key] = agg_edges.get(key, 0.0) + w
        new_adj = [[] for _ in range(new_n)]
        for (a, b), w in agg_edges.items():
            new_adj[a].append((b, w))
            new_adj[b].append((a, w))
        new_strengths = [0.0] * new_n
        # chunks inherit the local-move community they sit inside
        new_labels = [0] * new_n
        for v in range(n):
            agg = remap[refined[v]]
            new_strengths[agg] += strengths[v]
            new_labels[agg] = level.labels[v]
        for i in range(n0):
            coarse_of_orig[i] = remap[refined[coarse_of_orig[i]]]
        if new_n == n:
            break  # refinement found nothing to merge; fixed point
        n, adj, strengths, init_labels = new_n, new_adj, new_strengths, new_labels

    dense = {c: i for i, c in enumerate(sorted(set(membership)))}
    labels = [dense[c] for c in membership]
    labels = _split_disconnected(n0, adj0, labels)
    return Partition(labels).renumbered()
