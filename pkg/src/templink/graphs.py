"""Data model and CSV ingestion for the kills network and the social network.

The kills network is a directed multigraph-free event list: every link is a
kill stamped with a global episode index, and no character ever has more than
one incoming link (a character can only die once).  The social network is an
undirected weighted co-occurrence graph.  Both graphs are immutable after
construction; all queries are read-only.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path

from .exceptions import IntegrityError, ParseError, UnknownNodeError

EPISODES_PER_SEASON = 10

_DIRECTIONS = ("in", "out", "undirected")


def global_episode(season: int, episode_in_season: int) -> int:
    """Map (season, within-season episode) to the global 1-based index."""
    return EPISODES_PER_SEASON * (season - 1) + episode_in_season


@dataclass(frozen=True)
class KillEvent:
    """One directed kill: ``killer`` removed ``victim`` in a given episode."""

    killer: int
    victim: int
    season: int
    episode: int  # global 1-based index across seasons


def _read_rows(path, expected_header):
    """Yield (line_number, row) for a CSV file after validating its header."""
    path = Path(path)
    with path.open(newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise ParseError(f"{path}: file is empty, expected header "
                             f"{','.join(expected_header)}")
        normalized = [h.strip().lower() for h in header]
        if normalized != list(expected_header):
            raise ParseError(f"{path}: expected header "
                             f"{','.join(expected_header)}, got {','.join(header)}")
        for lineno, row in enumerate(reader, start=2):
            if not row or all(not cell.strip() for cell in row):
                continue
            yield lineno, row


def load_aliases(path) -> dict:
    """Load a ``variant,canonical`` CSV into a resolution map."""
    aliases = {}
    for lineno, row in _read_rows(path, ("variant", "canonical")):
        if len(row) != 2:
            raise ParseError("expected 2 columns (variant,canonical)", line=lineno)
        variant, canonical = row[0].strip(), row[1].strip()
        if not variant or not canonical:
            raise ParseError("empty name in alias row", line=lineno)
        aliases[variant] = canonical
    return aliases


class _NameTable:
    """Bijective name <-> dense id registry with alias resolution."""

    def __init__(self, aliases=None):
        self._aliases = dict(aliases) if aliases else {}
        self.names: list[str] = []
        self._ids: dict[str, int] = {}

    def canonical(self, raw: str) -> str:
        name = raw.strip()
        return self._aliases.get(name, name)

    def intern(self, raw: str) -> int:
        name = self.canonical(raw)
        node = self._ids.get(name)
        if node is None:
            node = len(self.names)
            self.names.append(name)
            self._ids[name] = node
        return node

    def get(self, name: str):
        return self._ids.get(self.canonical(name))


class TemporalDigraph:
    """Directed kill events stamped with episode indices.

    Nodes are dense integer ids; ``names[id]`` gives the canonical character
    name.  Invariant: every node's in-degree over all links is 0 or 1.
    """

    def __init__(self, names: list[str], events: list[KillEvent]):
        self.names = list(names)
        self._ids = {name: i for i, name in enumerate(self.names)}
        if len(self._ids) != len(self.names):
            raise IntegrityError("duplicate character names after alias resolution")
        self.events = sorted(events, key=lambda e: (e.episode, e.killer, e.victim))
        n = len(self.names)
        self.out_adj: list[list[KillEvent]] = [[] for _ in range(n)]
        self.in_link: list[KillEvent | None] = [None] * n
        for ev in self.events:
            if not (0 <= ev.killer < n and 0 <= ev.victim < n):
                raise IntegrityError(f"event references unknown node: {ev}")
            if self.in_link[ev.victim] is not None:
                raise IntegrityError(
                    f"character {self.names[ev.victim]!r} dies more than once")
            self.out_adj[ev.killer].append(ev)
            self.in_link[ev.victim] = ev

    @property
    def node_count(self) -> int:
        return len(self.names)

    @property
    def link_count(self) -> int:
        return len(self.events)

    @property
    def max_episode(self) -> int:
        return max((ev.episode for ev in self.events), default=0)

    def id_of(self, name: str) -> int:
        node = self._ids.get(name)
        if node is None:
            raise UnknownNodeError(f"unknown character: {name!r}")
        return node

    def has_node(self, name: str) -> bool:
        return name in self._ids

    def before(self, episode: int) -> "DigraphView":
        """Snapshot exposing only links strictly before ``episode``."""
        if episode < 1:
            raise ValueError(f"episode cutoff must be >= 1, got {episode}")
        return DigraphView(self, episode)

    def full_view(self) -> "DigraphView":
        """View of the complete history (cutoff past the last episode)."""
        return DigraphView(self, self.max_episode + 1)

    def link_set(self) -> set[tuple[int, int]]:
        return {(ev.killer, ev.victim) for ev in self.events}


def snapshot_before(graph: TemporalDigraph, episode: int) -> "DigraphView":
    return graph.before(episode)


class DigraphView:
    """A :class:`TemporalDigraph` restricted to links with episode < cutoff."""

    def __init__(self, graph: TemporalDigraph, cutoff: int):
        self.graph = graph
        self.cutoff = cutoff

    @property
    def node_count(self) -> int:
        return self.graph.node_count

    @property
    def names(self) -> list[str]:
        return self.graph.names

    def links(self):
        for ev in self.graph.events:
            if ev.episode < self.cutoff:
                yield ev

    @property
    def link_count(self) -> int:
        return sum(1 for _ in self.links())

    def _check(self, v: int):
        if not (0 <= v < self.graph.node_count):
            raise UnknownNodeError(f"unknown node id: {v}")

    def in_degree(self, v: int) -> int:
        self._check(v)
        link = self.graph.in_link[v]
        return int(link is not None and link.episode < self.cutoff)

    def out_degree(self, v: int) -> int:
        self._check(v)
        return sum(1 for ev in self.graph.out_adj[v] if ev.episode < self.cutoff)

    def degree(self, v: int, direction: str = "out") -> int:
        if direction == "out":
            return self.out_degree(v)
        if direction == "in":
            return self.in_degree(v)
        if direction == "undirected":
            return len(self.neighbors(v, "undirected"))
        raise ValueError(f"direction must be one of {_DIRECTIONS}, got {direction!r}")

    def neighbors(self, v: int, direction: str = "out") -> set[int]:
        self._check(v)
        out = {ev.victim for ev in self.graph.out_adj[v] if ev.episode < self.cutoff}
        link = self.graph.in_link[v]
        has_in = link is not None and link.episode < self.cutoff
        if direction == "out":
            return out
        if direction == "in":
            return {link.killer} if has_in else set()
        if direction == "undirected":
            und = set(out)
            if has_in:
                und.add(link.killer)
            und.discard(v)  # self-kills do not make a node its own neighbour
            return und
        raise ValueError(f"direction must be one of {_DIRECTIONS}, got {direction!r}")

    def undirected_projection(self) -> "SocialGraph":
        """Simple undirected unit-weight projection (self-loops dropped)."""
        pairs = set()
        for ev in self.links():
            if ev.killer != ev.victim:
                pairs.add((min(ev.killer, ev.victim), max(ev.killer, ev.victim)))
        g = SocialGraph.__new__(SocialGraph)
        g.names = self.graph.names
        g._ids = self.graph._ids
        g.adj = {v: {} for v in range(self.graph.node_count)}
        g.edges = []
        for a, b in sorted(pairs):
            g.adj[a][b] = 1.0
            g.adj[b][a] = 1.0
            g.edges.append((a, b, 1.0))
        g.dropped_self_loops = 0
        return g


def add_isolated_nodes(graph: TemporalDigraph, count: int,
                       prefix: str = "isolated") -> TemporalDigraph:
    """Return a new graph with ``count`` extra degree-0 nodes appended."""
    if count < 0:
        raise ValueError("count must be >= 0")
    existing = set(graph.names)
    names = list(graph.names)
    i = 0
    while count > 0:
        candidate = f"{prefix}-{i}"
        if candidate not in existing:
            names.append(candidate)
            count -= 1
        i += 1
    return TemporalDigraph(names, graph.events)


class SocialGraph:
    """Undirected weighted character co-occurrence network."""

    def __init__(self, names: list[str], weighted_edges):
        self.names = list(names)
        self._ids = {name: i for i, name in enumerate(self.names)}
        if len(self._ids) != len(self.names):
            raise IntegrityError("duplicate character names in social graph")
        self.adj: dict[int, dict[int, float]] = {v: {} for v in range(len(self.names))}
        self.edges: list[tuple[int, int, float]] = []
        self.dropped_self_loops = 0
        merged: dict[tuple[int, int], float] = {}
        for a, b, w in weighted_edges:
            if a == b:
                self.dropped_self_loops += 1
                continue
            key = (min(a, b), max(a, b))
            merged[key] = merged.get(key, 0.0) + float(w)
        for (a, b), w in sorted(merged.items()):
            self.adj[a][b] = w
            self.adj[b][a] = w
            self.edges.append((a, b, w))

    @property
    def node_count(self) -> int:
        return len(self.names)

    @property
    def edge_count(self) -> int:
        return len(self.edges)

    @property
    def total_weight(self) -> float:
        return sum(w for _, _, w in self.edges)

    def id_of(self, name: str) -> int:
        node = self._ids.get(name)
        if node is None:
            raise UnknownNodeError(f"unknown character: {name!r}")
        return node

    def has_node(self, name: str) -> bool:
        return name in self._ids

    def _check(self, v: int):
        if not (0 <= v < len(self.names)):
            raise UnknownNodeError(f"unknown node id: {v}")

    def degree(self, v: int) -> int:
        self._check(v)
        return len(self.adj[v])

    def strength(self, v: int) -> float:
        """Weighted degree."""
        self._check(v)
        return sum(self.adj[v].values())

    def neighbors(self, v: int) -> set[int]:
        self._check(v)
        return set(self.adj[v])


def load_kills(path, aliases_path=None, roster_path=None) -> TemporalDigraph:
    """Load a ``season,episode,killer,victim`` CSV into a TemporalDigraph.

    ``episode`` is the within-season index (1..10); the global 1-based index
    is derived as ``10*(season-1) + episode``.  An optional roster file
    (header ``name``) pre-registers characters so that characters that never
    kill and never die are still part of the node set.
    """
    aliases = load_aliases(aliases_path) if aliases_path else None
    table = _NameTable(aliases)
    if roster_path:
        for lineno, row in _read_rows(roster_path, ("name",)):
            if len(row) != 1:
                raise ParseError("expected a single name column", line=lineno)
            if not row[0].strip():
                raise ParseError("empty character name", line=lineno)
            table.intern(row[0])
    events = []
    seen_victims = {}
    for lineno, row in _read_rows(path, ("season", "episode", "killer", "victim")):
        if len(row) != 4:
            raise ParseError(f"expected 4 columns, got {len(row)}", line=lineno)
        try:
            season = int(row[0])
            episode = int(row[1])
        except ValueError:
            raise ParseError(f"non-integer season/episode: "
                             f"{row[0]!r},{row[1]!r}", line=lineno)
        if season < 1:
            raise ParseError(f"season must be >= 1, got {season}", line=lineno)
        if not 1 <= episode <= EPISODES_PER_SEASON:
            raise ParseError(f"episode must be in 1..{EPISODES_PER_SEASON}, "
                             f"got {episode}", line=lineno)
        killer_name, victim_name = row[2].strip(), row[3].strip()
        if not killer_name or not victim_name:
            raise ParseError("empty killer or victim name", line=lineno)
        killer = table.intern(killer_name)
        victim = table.intern(victim_name)
        if victim in seen_victims:
            raise IntegrityError(
                f"line {lineno}: character {table.names[victim]!r} already died "
                f"on line {seen_victims[victim]}")
        seen_victims[victim] = lineno
        events.append(KillEvent(killer, victim, season, global_episode(season, episode)))
    return TemporalDigraph(table.names, events)


def load_social(path, aliases_path=None) -> SocialGraph:
    """Load a ``Source,Target,Weight`` CSV into a SocialGraph.

    Repeated pairs collapse into one edge with summed weight; self-loop rows
    are dropped (their count is kept on ``dropped_self_loops``).
    """
    aliases = load_aliases(aliases_path) if aliases_path else None
    table = _NameTable(aliases)
    raw_edges = []
    for lineno, row in _read_rows(path, ("source", "target", "weight")):
        if len(row) != 3:
            raise ParseError(f"expected 3 columns, got {len(row)}", line=lineno)
        source, target = row[0].strip(), row[1].strip()
        if not source or not target:
            raise ParseError("empty source or target name", line=lineno)
        try:
            weight = float(row[2])
        except ValueError:
            raise ParseError(f"non-numeric weight: {row[2]!r}", line=lineno)
        if weight <= 0:
            raise ParseError(f"weight must be positive, got {row[2]}", line=lineno)
        raw_edges.append((table.intern(source), table.intern(target), weight))
    return SocialGraph(table.names, raw_edges)
