"""Structural link prediction indices for the kills network.

All four indices score an ordered candidate pair (i, j) against a temporal
snapshot.  Every index also has a death-aware variant that short-circuits to
a negative-infinity sentinel when either endpoint already has an incoming
link in the snapshot (is already dead).  The sentinel compares below every
finite score, so death-aware variants always classify such pairs negative.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .community import Partition, PartitionStats

NEG_INF = float("-inf")

INDEX_KINDS = ("alive", "pa", "aa", "community")


@dataclass(frozen=True)
class IndexKind:
    kind: str
    death_check: bool = False

    def __post_init__(self):
        if self.kind not in INDEX_KINDS:
            raise ValueError(f"kind must be one of {INDEX_KINDS}, got {self.kind!r}")

    @property
    def label(self) -> str:
        names = {
            "alive": "alive index",
            "pa": "preferential attachment",
            "aa": "Adamic-Adar",
            "community": "community index",
        }
        return names[self.kind] + (" †" if self.death_check else "")


def _either_dead(view, i, j) -> bool:
    return view.in_degree(i) > 0 or view.in_degree(j) > 0


def alive_index(view, i, j) -> float:
    """1 when both endpoints are still alive in the snapshot, else 0."""
    return 0.0 if _either_dead(view, i, j) else 1.0


def preferential_attachment(view, i, j, death_check: bool = False) -> float:
    """Product of out-degrees; death-aware variant returns -inf for dead ends."""
    if death_check and _either_dead(view, i, j):
        return NEG_INF
    return float(view.out_degree(i) * view.out_degree(j))


def adamic_adar(view, i, j, death_check: bool = False) -> float:
    """Sum of inverse log degree over common neighbors (undirected projection)."""
    if death_check and _either_dead(view, i, j):
        return NEG_INF
    common = view.neighbors(i, "undirected") & view.neighbors(j, "undirected")
    total = 0.0
    for x in common:
        k = len(view.neighbors(x, "undirected"))
        # a common neighbor of two distinct nodes has degree >= 2
        assert k >= 2, f"common neighbor {x} with undirected degree {k}"
        total += 1.0 / math.log(k)
    return total


def community_index(view, partition: Partition, stats: PartitionStats,
                    i, j, death_check: bool = False) -> float:
    """Intra-community link density if c_i == c_j, else inter-community density.

    Communities with fewer than two nodes have density 0 by convention, as do
    community pairs with no nodes to pair.
    """
    if death_check and _either_dead(view, i, j):
        return NEG_INF
    ci, cj = partition.labels[i], partition.labels[j]
    if ci == cj:
        n_i = stats.sizes[ci]
        possible = n_i * (n_i - 1) // 2
        if possible == 0:
            return 0.0
        return stats.internal[ci] / possible
    n_i, n_j = stats.sizes[ci], stats.sizes[cj]
    if n_i * n_j == 0:
        return 0.0
    m_ij = stats.between.get((min(ci, cj), max(ci, cj)), 0)
    return m_ij / (n_i * n_j)
