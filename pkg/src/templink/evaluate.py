"""Temporal evaluation harnesses, negative sampling and metrics.

Two protocols share the same episode window (30..60 by default) and the same
balanced positives/negatives accounting:

* index protocol: for each episode t, the kills of t are scored on the
  snapshot before t; one pool of negatives is scored against the full
  history, and classification uses a strict score > 0 threshold.
* ML protocol: per episode a classifier is trained on the kills before t
  plus an equal number of sampled non-kills, and scores the kills of t; the
  negative pass trains on all kills and scores sampled non-kills disjoint
  from its training negatives.  Classification uses score >= 0.5.

Every random choice draws from a PRNG stream derived from (master seed, run
index, purpose tag, ...), so adding a sampling site never perturbs existing
ones and reports are bit-reproducible.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import ml
from .community import leiden, partition_stats
from .exceptions import TemplinkError
from .graphs import add_isolated_nodes
from .indices import (
    IndexKind,
    adamic_adar,
    alive_index,
    community_index,
    preferential_attachment,
)

# purpose tags for PRNG sub-streams
TAG_NEGATIVES = 1
TAG_AUC = 2
TAG_ML_TRAIN_NEG = 3
TAG_ML_TEST_NEG = 4
TAG_PARTITION = 5
TAG_MODEL = 6


def derive_rng(*path) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(tuple(int(x) for x in path)))


@dataclass
class ScoreSets:
    positives: list[float]
    negatives: list[float]


@dataclass
class EvalConfig:
    episode_start: int = 30
    episode_end: int = 60
    runs: int = 5
    seed: int = 7
    augment_isolated: int = 0

    def __post_init__(self):
        if self.episode_start > self.episode_end:
            raise ValueError("episode_start must be <= episode_end")
        if self.runs < 1:
            raise ValueError("runs must be >= 1")
        if self.augment_isolated < 0:
            raise ValueError("augment_isolated must be >= 0")


@dataclass
class EvalReport:
    method: str
    auc: list[float]
    auc_exact: list[float]
    precision: list[float]
    recall: list[float]
    positives: int
    std_convention: str = "population"

    def _mean(self, xs):
        return float(np.mean(xs))

    def _std(self, xs):
        return float(np.std(xs))  # population std over exactly `runs` values

    @property
    def auc_mean(self):
        return self._mean(self.auc)

    @property
    def auc_std(self):
        return self._std(self.auc)

    @property
    def auc_exact_mean(self):
        return self._mean(self.auc_exact)

    @property
    def auc_exact_std(self):
        return self._std(self.auc_exact)

    @property
    def precision_mean(self):
        return self._mean(self.precision)

    @property
    def precision_std(self):
        return self._std(self.precision)

    @property
    def recall_mean(self):
        return self._mean(self.recall)

    @property
    def recall_std(self):
        return self._std(self.recall)

    def as_row(self) -> dict:
        return {
            "method": self.method,
            "auc_mean": self.auc_mean,
            "auc_std": self.auc_std,
            "precision_mean": self.precision_mean,
            "precision_std": self.precision_std,
            "recall_mean": self.recall_mean,
            "recall_std": self.recall_std,
            "auc_exact_mean": self.auc_exact_mean,
            "auc_exact_std": self.auc_exact_std,
        }


def sample_negatives(graph, count: int, exclude: set, rng) -> list[tuple[int, int]]:
    """``count`` distinct ordered non-link pairs, uniform over the universe."""
    n = graph.node_count
    links = graph.link_set()
    blocked = links | set(exclude)
    universe = n * (n - 1) - len({p for p in blocked if p[0] != p[1]})
    if count > universe:
        raise TemplinkError(
            f"cannot sample {count} negative pairs from a universe of {universe}")
    picked: list[tuple[int, int]] = []
    seen = set()
    while len(picked) < count:
        i = int(rng.integers(n))
        j = int(rng.integers(n))
        if i == j:
            continue
        pair = (i, j)
        if pair in blocked or pair in seen:
            continue
        seen.add(pair)
        picked.append(pair)
    return picked


def auc_sampled(s: ScoreSets, rng) -> float:
    """(b + e/2) / |S_P| over |S_P| uniformly drawn (positive, negative) pairs."""
    if not s.positives or not s.negatives:
        raise TemplinkError("both score lists must be non-empty")
    n = len(s.positives)
    pos = np.asarray(s.positives)
    neg = np.asarray(s.negatives)
    p = pos[rng.integers(len(pos), size=n)]
    q = neg[rng.integers(len(neg), size=n)]
    b = int(np.sum(p > q))
    e = int(np.sum(p == q))
    return (b + e / 2.0) / n


def auc_exact(s: ScoreSets) -> float:
    """Mann-Whitney statistic over all positive x negative score pairs."""
    if not s.positives or not s.negatives:
        raise TemplinkError("both score lists must be non-empty")
    pos = np.asarray(s.positives)[:, None]
    neg = np.asarray(s.negatives)[None, :]
    wins = np.sum(pos > neg)
    ties = np.sum(pos == neg)
    return float((wins + ties / 2.0) / (pos.shape[0] * neg.shape[1]))


def precision_recall(s: ScoreSets, threshold: float,
                     strict: bool) -> tuple[float, float]:
    """Counts with the 0/0 -> 0 convention; recall is TP / |S_P|."""
    classify = (lambda x: x > threshold) if strict else (lambda x: x >= threshold)
    tp = sum(1 for x in s.positives if classify(x))
    fp = sum(1 for x in s.negatives if classify(x))
    precision = tp / (tp + fp) if tp + fp else 0.0
    recall = tp / len(s.positives) if s.positives else 0.0
    return precision, recall


def _episode_positives(graph, cfg):
    by_episode = []
    for t in range(cfg.episode_start, cfg.episode_end + 1):
        kills = [ev for ev in graph.events if ev.episode == t]
        if kills:
            by_episode.append((t, kills))
    return by_episode


class _IndexScorer:
    """Scores pairs for one IndexKind, caching per-view community structure."""

    def __init__(self, kind: IndexKind, partition_seed: int):
        self.kind = kind
        self.partition_seed = partition_seed
        self._cache = {}

    def _community_state(self, view):
        key = view.cutoff
        if key not in self._cache:
            proj = view.undirected_projection()
            part = leiden(proj, 1.0, seed=self.partition_seed)
            self._cache[key] = (part, partition_stats(proj, part))
        return self._cache[key]

    def score(self, view, i, j) -> float:
        k = self.kind
        if k.kind == "alive":
            return alive_index(view, i, j)
        if k.kind == "pa":
            return preferential_attachment(view, i, j, k.death_check)
        if k.kind == "aa":
            return adamic_adar(view, i, j, k.death_check)
        part, stats = self._community_state(view)
        return community_index(view, part, stats, i, j, k.death_check)


def evaluate_index(graph, kind: IndexKind, cfg: EvalConfig,
                   audit=None) -> EvalReport:
    """Run the index protocol; positives are deterministic, negatives re-drawn
    per run against the full-history snapshot."""
    if cfg.augment_isolated:
        graph = add_isolated_nodes(graph, cfg.augment_isolated)
    scorer = _IndexScorer(kind, partition_seed=cfg.seed)
    positives = []
    for t, kills in _episode_positives(graph, cfg):
        view = graph.before(t)
        if audit is not None:
            audit(view, t)
        for ev in kills:
            positives.append(scorer.score(view, ev.killer, ev.victim))
    if not positives:
        raise TemplinkError("no positive test links in the evaluation window")

    full = graph.full_view()
    auc, auc_ex, precision, recall = [], [], [], []
    for run in range(cfg.runs):
        rng = derive_rng(cfg.seed, run, TAG_NEGATIVES)
        pairs = sample_negatives(graph, len(positives), set(), rng)
        negatives = [scorer.score(full, i, j) for i, j in pairs]
        sets = ScoreSets(positives, negatives)
        auc.append(auc_sampled(sets, derive_rng(cfg.seed, run, TAG_AUC)))
        auc_ex.append(auc_exact(sets))
        p, r = precision_recall(sets, 0.0, strict=True)
        precision.append(p)
        recall.append(r)
    return EvalReport(kind.label, auc, auc_ex, precision, recall, len(positives))


def evaluate_ml(graph, model_kind: str, feature_mode: str, cfg: EvalConfig,
                aux: ml.FeatureContext, audit=None) -> EvalReport:
    """Run the ML protocol for one (classifier, feature family) combination."""
    if cfg.augment_isolated:
        graph = add_isolated_nodes(graph, cfg.augment_isolated)
    by_episode = _episode_positives(graph, cfg)
    if not by_episode:
        raise TemplinkError("no positive test links in the evaluation window")
    n_positive = sum(len(kills) for _, kills in by_episode)
    full = graph.full_view()
    all_kills = [(ev.killer, ev.victim) for ev in graph.events]

    auc, auc_ex, precision, recall = [], [], [], []
    for run in range(cfg.runs):
        s_p: list[float] = []
        for t, kills in by_episode:
            view = graph.before(t)
            if audit is not None:
                audit(view, t)
            train_pos = [(ev.killer, ev.victim)
                         for ev in graph.events if ev.episode < t]
            if not train_pos:
                raise TemplinkError(
                    f"episode {t}: no prior kills to train on")
            rng = derive_rng(cfg.seed, run, TAG_ML_TRAIN_NEG, t)
            train_neg = sample_negatives(graph, len(train_pos), set(), rng)
            X = np.array([ml.build_features(i, j, view, aux, feature_mode)
                          for i, j in train_pos + train_neg])
            y = np.array([1] * len(train_pos) + [0] * len(train_neg))
            model = ml.train(model_kind, X, y,
                             seed=_model_seed(cfg.seed, run, t))
            X_test = np.array([ml.build_features(ev.killer, ev.victim, view,
                                                 aux, feature_mode)
                               for ev in kills])
            s_p.extend(ml.score_many(model, X_test).tolist())

        # negative pass: train on the whole history, test on unseen non-kills
        rng = derive_rng(cfg.seed, run, TAG_ML_TRAIN_NEG, 0)
        train_neg = sample_negatives(graph, len(all_kills), set(), rng)
        X = np.array([ml.build_features(i, j, full, aux, feature_mode)
                      for i, j in all_kills + train_neg])
        y = np.array([1] * len(all_kills) + [0] * len(train_neg))
        model = ml.train(model_kind, X, y, seed=_model_seed(cfg.seed, run, 0))
        rng = derive_rng(cfg.seed, run, TAG_ML_TEST_NEG)
        test_neg = sample_negatives(graph, n_positive, set(train_neg), rng)
        X_test = np.array([ml.build_features(i, j, full, aux, feature_mode)
                           for i, j in test_neg])
        s_n = ml.score_many(model, X_test).tolist()

        sets = ScoreSets(s_p, s_n)
        auc.append(auc_sampled(sets, derive_rng(cfg.seed, run, TAG_AUC)))
        auc_ex.append(auc_exact(sets))
        p, r = precision_recall(sets, 0.5, strict=False)
        precision.append(p)
        recall.append(r)
    label = {"knn": "KNN", "logreg": "logistic regression", "svm": "SVM"}[model_kind]
    return EvalReport(f"{label} ({feature_mode})", auc, auc_ex,
                      precision, recall, n_positive)


def _model_seed(seed, run, t) -> int:
    return (seed * 1_000_003 + run * 10_007 + t) % (2 ** 31)
