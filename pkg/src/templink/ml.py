"""Feature assembly and from-scratch classifiers emitting [0, 1] scores.

Three feature families: the two endpoint out-degrees (basic), out-degrees
plus centralities and community one-hots from the social network
(handcrafted), and node2vec link embeddings.  Classifiers are a 5-NN voter,
L2-regularized logistic regression fitted by full-batch gradient descent
with backtracking line search, and a linear SVM fitted by epoch-based
subgradient descent; all three score through the same z-scoring fitted on
the training set only.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .exceptions import TemplinkError

FEATURE_MODES = ("basic", "handcrafted", "node2vec_concat", "node2vec_average")
MODEL_KINDS = ("knn", "logreg", "svm")

KNN_K = 5
LOGREG_L2 = 1.0
SVM_C = 1.0
SVM_EPOCHS = 120


@dataclass
class FeatureContext:
    """Social-network side information consumed by the feature builders."""

    pagerank: object = None          # CentralityScores
    betweenness: object = None       # CentralityScores
    community_of: dict | None = None  # name -> social community label
    community_count: int = 0          # real communities; one dummy is appended
    embeddings: object = None         # EmbeddingTable


def _one_hot(index, width):
    v = np.zeros(width)
    v[index] = 1.0
    return v


def feature_length(mode: str, aux: FeatureContext) -> int:
    if mode == "basic":
        return 2
    if mode == "handcrafted":
        return 6 + 2 * (aux.community_count + 1)
    if mode == "node2vec_concat":
        return 2 * aux.embeddings.dim
    if mode == "node2vec_average":
        return aux.embeddings.dim
    raise ValueError(f"mode must be one of {FEATURE_MODES}, got {mode!r}")


def build_features(killer: int, victim: int, view, aux: FeatureContext,
                   mode: str) -> np.ndarray:
    """Feature vector for the ordered pair under a temporal snapshot."""
    if mode == "basic":
        return np.array([view.out_degree(killer), view.out_degree(victim)],
                        dtype=float)
    if mode == "handcrafted":
        kn, vn = view.names[killer], view.names[victim]
        width = aux.community_count + 1
        dummy = aux.community_count
        return np.concatenate([
            [view.out_degree(killer), view.out_degree(victim)],
            [aux.pagerank.feature_value(kn), aux.pagerank.feature_value(vn)],
            [aux.betweenness.feature_value(kn), aux.betweenness.feature_value(vn)],
            _one_hot(aux.community_of.get(kn, dummy), width),
            _one_hot(aux.community_of.get(vn, dummy), width),
        ])
    if mode in ("node2vec_concat", "node2vec_average"):
        kn, vn = view.names[killer], view.names[victim]
        return aux.embeddings.link_vector(kn, vn, mode.removeprefix("node2vec_"))
    raise ValueError(f"mode must be one of {FEATURE_MODES}, got {mode!r}")


@dataclass
class Standardizer:
    mean: np.ndarray
    scale: np.ndarray

    @staticmethod
    def fit(X: np.ndarray) -> "Standardizer":
        mean = X.mean(axis=0)
        scale = X.std(axis=0)
        scale[scale == 0.0] = 1.0  # zero-variance columns pass through
        return Standardizer(mean, scale)

    def transform(self, X: np.ndarray) -> np.ndarray:
        return (X - self.mean) / self.scale


def _sigmoid(z):
    return 1.0 / (1.0 + np.exp(-np.clip(z, -500, 500)))


def logreg_objective(wb: np.ndarray, X: np.ndarray, y_pm: np.ndarray,
                     l2: float = LOGREG_L2):
    """Regularized mean log-loss and its gradient; bias is unpenalized."""
    n = X.shape[0]
    w, b = wb[:-1], wb[-1]
    z = X @ w + b
    yz = y_pm * z
    # log(1 + exp(-yz)) computed stably
    loss = np.logaddexp(0.0, -yz).mean() + 0.5 * l2 * (w @ w) / n
    s = _sigmoid(-yz)
    grad_w = -(X.T @ (y_pm * s)) / n + l2 * w / n
    grad_b = -(y_pm * s).mean()
    return loss, np.append(grad_w, grad_b)


def _fit_logreg(X, y_pm, max_iter=10_000, grad_tol=1e-8):
    wb = np.zeros(X.shape[1] + 1)
    loss, grad = logreg_objective(wb, X, y_pm)
    for _ in range(max_iter):
        gnorm = np.linalg.norm(grad)
        if gnorm < grad_tol:
            break
        step = 1.0
        # backtracking line search on the Armijo condition
        while step > 1e-16:
            cand = wb - step * grad
            cand_loss, cand_grad = logreg_objective(cand, X, y_pm)
            if cand_loss <= loss - 1e-4 * step * gnorm * gnorm:
                wb, loss, grad = cand, cand_loss, cand_grad
                break
            step *= 0.5
        else:
            break
    return wb


def svm_objective(w, b, X, y_pm, c=SVM_C):
    margins = y_pm * (X @ w + b)
    hinge = np.maximum(0.0, 1.0 - margins).mean()
    return 0.5 * (w @ w) / (c * X.shape[0]) + hinge


def _fit_svm(X, y_pm, seed, epochs=SVM_EPOCHS, c=SVM_C, batch_size=32):
    """Pegasos-style minibatch subgradient descent; keeps the best iterate."""
    n, d = X.shape
    lam = 1.0 / (c * n)
    rng = np.random.default_rng(np.random.SeedSequence((0x5F31, seed)))
    w = np.zeros(d)
    b = 0.0
    best = (svm_objective(w, b, X, y_pm, c), w.copy(), b)
    history = [best[0]]
    t = 0
    for _epoch in range(epochs):
        order = rng.permutation(n)
        for start in range(0, n, batch_size):
            t += 1
            eta = 1.0 / (lam * t)
            batch = order[start:start + batch_size]
            Xb, yb = X[batch], y_pm[batch]
            violating = yb * (Xb @ w + b) < 1.0
            w *= 1.0 - eta * lam
            if violating.any():
                scale = eta / batch.shape[0]
                w += scale * (Xb[violating].T @ yb[violating])
                b += scale * yb[violating].sum()
        obj = svm_objective(w, b, X, y_pm, c)
        if obj < best[0]:
            best = (obj, w.copy(), b)
        history.append(best[0])
    _, w, b = best
    return w, b, history


@dataclass
class TrainedModel:
    kind: str
    standardizer: Standardizer
    weights: np.ndarray | None = None
    bias: float = 0.0
    train_x: np.ndarray | None = None  # knn only
    train_y: np.ndarray | None = None
    objective_history: list | None = None

    @property
    def feature_count(self) -> int:
        return self.standardizer.mean.shape[0]


def train(kind: str, X: np.ndarray, y: np.ndarray, seed: int = 0) -> TrainedModel:
    """Fit a classifier on raw features; z-scoring is fitted here."""
    if kind not in MODEL_KINDS:
        raise ValueError(f"kind must be one of {MODEL_KINDS}, got {kind!r}")
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=int)
    if X.ndim != 2 or X.shape[0] != y.shape[0]:
        raise TemplinkError("feature matrix and labels disagree")
    classes = set(y.tolist())
    if classes != {0, 1}:
        raise TemplinkError(f"training set must contain both classes, got {classes}")
    std = Standardizer.fit(X)
    Xs = std.transform(X)
    y_pm = 2.0 * y - 1.0
    if kind == "knn":
        return TrainedModel("knn", std, train_x=Xs, train_y=y)
    if kind == "logreg":
        wb = _fit_logreg(Xs, y_pm)
        return TrainedModel("logreg", std, weights=wb[:-1], bias=float(wb[-1]))
    w, b, history = _fit_svm(Xs, y_pm, seed)
    return TrainedModel("svm", std, weights=w, bias=float(b),
                        objective_history=history)


def score(model: TrainedModel, x: np.ndarray) -> float:
    """Probability-like score in [0, 1] for one raw feature vector."""
    x = np.asarray(x, dtype=float)
    if x.shape != (model.feature_count,):
        raise TemplinkError(
            f"expected {model.feature_count} features, got {x.shape}")
    xs = model.standardizer.transform(x[None, :])[0]
    if model.kind == "knn":
        d = np.linalg.norm(model.train_x - xs, axis=1)
        nearest = np.argsort(d, kind="stable")[:KNN_K]  # ties -> lower index
        return float(model.train_y[nearest].mean())
    return float(_sigmoid(model.weights @ xs + model.bias))


def score_many(model: TrainedModel, X: np.ndarray) -> np.ndarray:
    X = np.asarray(X, dtype=float)
    xs = model.standardizer.transform(X)
    if model.kind == "knn":
        d = np.linalg.norm(model.train_x[None, :, :] - xs[:, None, :], axis=2)
        nearest = np.argsort(d, axis=1, kind="stable")[:, :KNN_K]
        return model.train_y[nearest].mean(axis=1)
    return _sigmoid(xs @ model.weights + model.bias)
