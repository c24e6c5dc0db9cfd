"""node2vec embeddings for the social network.

Second-order biased random walks (return parameter p, in-out parameter q)
feed a from-scratch skip-gram model trained with negative sampling.  Link
vectors compose two node embeddings either by concatenation (direction
sensitive) or averaging (direction blind); characters without a trained
vector get a shared generic embedding (the mean of all trained vectors).
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .exceptions import TemplinkError

LINK_MODES = ("concat", "average")


@dataclass(frozen=True)
class Node2vecParams:
    p: float = 2.0
    q: float = 0.5
    dim: int = 16
    walks_per_node: int = 10
    walk_length: int = 80
    window: int = 10
    negatives: int = 5
    epochs: int = 5
    learning_rate: float = 0.025
    seed: int = 0
    weighted_walks: bool = True

    def with_seed(self, seed: int) -> "Node2vecParams":
        return replace(self, seed=seed)


def transition_weight(graph, prev: int, cur: int, nxt: int,
                      params: Node2vecParams) -> float:
    """Unnormalized probability weight of stepping cur -> nxt after prev."""
    if nxt not in graph.adj[cur]:
        raise TemplinkError(f"({cur}, {nxt}) is not an edge")
    weight = graph.adj[cur][nxt] if params.weighted_walks else 1.0
    if nxt == prev:
        return weight / params.p
    if nxt in graph.adj[prev]:
        return weight
    return weight / params.q


def _step_distribution(graph, prev, cur, params):
    nbrs = sorted(graph.adj[cur])
    if prev is None:
        weights = np.array(
            [graph.adj[cur][u] if params.weighted_walks else 1.0 for u in nbrs])
    else:
        weights = np.array(
            [transition_weight(graph, prev, cur, u, params) for u in nbrs])
    return nbrs, weights / weights.sum()


def generate_walks(graph, params: Node2vecParams) -> list[list[int]]:
    """walks_per_node biased walks from every node, deterministic per seed.

    Each walk draws from its own PRNG stream keyed by (seed, node, walk
    index), so the corpus does not depend on generation order.
    """
    walks = []
    for node in range(graph.node_count):
        for widx in range(params.walks_per_node):
            rng = np.random.default_rng(
                np.random.SeedSequence((params.seed, node, widx)))
            walk = [node]
            while len(walk) < params.walk_length:
                cur = walk[-1]
                if not graph.adj[cur]:
                    break
                prev = walk[-2] if len(walk) > 1 else None
                nbrs, probs = _step_distribution(graph, prev, cur, params)
                walk.append(nbrs[rng.choice(len(nbrs), p=probs)])
            walks.append(walk)
    return walks


@dataclass
class EmbeddingTable:
    vectors: dict[str, np.ndarray]
    generic: np.ndarray

    @property
    def dim(self) -> int:
        return self.generic.shape[0]

    def vector(self, name: str) -> np.ndarray:
        return self.vectors.get(name, self.generic)

    def link_vector(self, source: str, target: str, mode: str = "concat") -> np.ndarray:
        if mode == "concat":
            return np.concatenate([self.vector(source), self.vector(target)])
        if mode == "average":
            return (self.vector(source) + self.vector(target)) / 2.0
        raise ValueError(f"mode must be one of {LINK_MODES}, got {mode!r}")


def _skipgram_pairs(walks, window):
    centers, contexts = [], []
    for walk in walks:
        for i, center in enumerate(walk):
            lo = max(0, i - window)
            hi = min(len(walk), i + window + 1)
            for j in range(lo, hi):
                if j != i:
                    centers.append(center)
                    contexts.append(walk[j])
    return np.array(centers, dtype=np.intp), np.array(contexts, dtype=np.intp)


def train_embeddings(corpus: list[list[int]], params: Node2vecParams,
                     names: list[str] | None = None,
                     batch_size: int = 2048) -> tuple[EmbeddingTable, list[float]]:
    """Skip-gram with negative sampling over a walk corpus.

    Returns the trained table and the mean loss per epoch.  Minibatched SGD
    with a deterministic schedule: fixed seed gives a bitwise-identical table.
    ``names`` maps node ids to character names; ids are used when omitted.
    """
    if not corpus or all(len(w) == 0 for w in corpus):
        raise TemplinkError("walk corpus is empty")
    node_ids = sorted({v for walk in corpus for v in walk})
    vocab = {v: i for i, v in enumerate(node_ids)}
    nv = len(node_ids)

    counts = np.zeros(nv)
    for walk in corpus:
        for v in walk:
            counts[vocab[v]] += 1
    noise = counts ** 0.75
    noise /= noise.sum()

    centers, contexts = _skipgram_pairs(corpus, params.window)
    centers = np.array([vocab[v] for v in centers], dtype=np.intp)
    contexts = np.array([vocab[v] for v in contexts], dtype=np.intp)
    n_pairs = centers.shape[0]

    rng = np.random.default_rng(np.random.SeedSequence((0x5B17, params.seed)))
    w_in = (rng.random((nv, params.dim)) - 0.5) / params.dim
    w_out = np.zeros((nv, params.dim))

    total_batches = params.epochs * max(1, (n_pairs + batch_size - 1) // batch_size)
    batch_no = 0
    losses = []
    for _epoch in range(params.epochs):
        order = rng.permutation(n_pairs)
        epoch_loss = 0.0
        for start in range(0, n_pairs, batch_size):
            batch = order[start:start + batch_size]
            c, o = centers[batch], contexts[batch]
            neg = rng.choice(nv, size=(batch.shape[0], params.negatives), p=noise)
            lr = params.learning_rate * max(1e-4, 1.0 - batch_no / total_batches)
            batch_no += 1

            h = w_in[c]                       # (B, d)
            pos_score = np.einsum("bd,bd->b", h, w_out[o])
            neg_score = np.einsum("bd,bkd->bk", h, w_out[neg])
            pos_sig = 1.0 / (1.0 + np.exp(-pos_score))
            neg_sig = 1.0 / (1.0 + np.exp(-neg_score))

            epoch_loss += float(
                -np.log(np.clip(pos_sig, 1e-12, None)).sum()
                - np.log(np.clip(1.0 - neg_sig, 1e-12, None)).sum())

            g_pos = pos_sig - 1.0             # (B,)
            grad_h = g_pos[:, None] * w_out[o] + np.einsum(
                "bk,bkd->bd", neg_sig, w_out[neg])
            grad_out_pos = g_pos[:, None] * h
            grad_out_neg = neg_sig[..., None] * h[:, None, :]

            np.add.at(w_in, c, -lr * grad_h)
            np.add.at(w_out, o, -lr * grad_out_pos)
            np.add.at(w_out, neg.reshape(-1), -lr * grad_out_neg.reshape(-1, params.dim))
        losses.append(epoch_loss / n_pairs)

    generic = w_in.mean(axis=0)
    label = (lambda v: names[v]) if names is not None else (lambda v: v)
    vectors = {label(v): w_in[vocab[v]].copy() for v in node_ids}
    return EmbeddingTable(vectors, generic), losses


def embed_social_graph(graph, params: Node2vecParams) -> tuple[EmbeddingTable, list[float]]:
    """Walks plus skip-gram training in one call, keyed by character name."""
    walks = generate_walks(graph, params)
    return train_embeddings(walks, params, names=graph.names)
