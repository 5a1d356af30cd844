"""L2-regularized multinomial logistic regression, trained from scratch.

Deterministic full-batch gradient descent with backtracking line search
(halving, Armijo constant 1e-4). The objective is

    L(W, b) = ||W||^2 / (2C) + sum_i -log softmax(W x_i + b)[y_i]

with the bias unpenalized, so C keeps its conventional meaning: larger C,
weaker regularization. Logits are max-shifted before exponentiation.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .evaluation import accuracy, mean_rank, stratified_kfold

ARMIJO = 1e-4
MODEL_MAGIC = "finhyp-logreg v1"


@dataclass
class TrainConfig:
    c_grid: tuple[float, ...] = (0.001, 0.01, 0.1, 1.0, 10.0, 100.0)
    max_iter: int = 1000
    grad_tol: float = 1e-6
    folds: int = 5
    seed: int = 0

    def __post_init__(self):
        self.c_grid = tuple(float(c) for c in self.c_grid)
        if not self.c_grid:
            raise ValueError("empty C grid")
        if any(c <= 0 for c in self.c_grid):
            raise ValueError("C values must be positive")
        if self.folds < 2:
            raise ValueError("folds must be >= 2")
        if self.grad_tol <= 0:
            raise ValueError("grad_tol must be positive")


@dataclass
class LogRegModel:
    weights: np.ndarray  # (K, D)
    bias: np.ndarray  # (K,)
    c: float
    labels: tuple[str, ...]

    def __post_init__(self):
        self.weights = np.asarray(self.weights, dtype=np.float64)
        self.bias = np.asarray(self.bias, dtype=np.float64)
        self.labels = tuple(self.labels)
        k = len(self.labels)
        if self.weights.ndim != 2 or self.weights.shape[0] != k:
            raise ValueError("weight matrix must be K x D")
        if self.bias.shape != (k,):
            raise ValueError("bias must have length K")
        if not (np.all(np.isfinite(self.weights)) and np.all(np.isfinite(self.bias))):
            raise ValueError("non-finite model parameters")
        if self.c <= 0:
            raise ValueError("C must be positive")

    @property
    def dim(self) -> int:
        return self.weights.shape[1]


def _softmax(logits: np.ndarray) -> np.ndarray:
    z = logits - logits.max(axis=-1, keepdims=True)
    e = np.exp(z)
    p = e / e.sum(axis=-1, keepdims=True)
    return p / p.sum(axis=-1, keepdims=True)


def _check_xy(X, y, n_classes):
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.int64)
    if X.ndim != 2 or X.shape[0] < 1:
        raise ValueError("X must be a non-empty 2-D matrix")
    if not np.all(np.isfinite(X)):
        raise ValueError("non-finite feature values")
    if y.shape != (X.shape[0],):
        raise ValueError("y must align with X rows")
    if y.min() < 0 or y.max() >= n_classes:
        raise ValueError(f"label index outside [0, {n_classes})")
    return X, y


def loss_value(W, b, X, y, c) -> float:
    z = X @ W.T + b
    zmax = z.max(axis=1)
    logsum = np.log(np.exp(z - zmax[:, None]).sum(axis=1)) + zmax
    data = float(np.sum(logsum - z[np.arange(len(y)), y]))
    return data + 0.5 / c * float(np.sum(W * W))


def loss_and_grad(W, b, X, y, c):
    """Objective value with its analytic gradient (see module docstring)."""
    z = X @ W.T + b
    zmax = z.max(axis=1)
    e = np.exp(z - zmax[:, None])
    s = e.sum(axis=1)
    loss = float(np.sum(np.log(s) + zmax - z[np.arange(len(y)), y]))
    loss += 0.5 / c * float(np.sum(W * W))
    g = e / s[:, None]
    g[np.arange(len(y)), y] -= 1.0
    grad_w = g.T @ X + W / c
    grad_b = g.sum(axis=0)
    return loss, grad_w, grad_b


def train(X, y, labels, c: float, cfg: TrainConfig | None = None) -> LogRegModel:
    """Minimize the regularized log-loss from a zero start.

    Stops when the gradient infinity-norm drops to cfg.grad_tol or after
    cfg.max_iter iterations. Identical inputs produce bitwise-identical
    parameters; the Armijo backtracking guarantees the objective never
    increases between iterations.
    """
    if cfg is None:
        cfg = TrainConfig()
    labels = tuple(labels)
    if c <= 0:
        raise ValueError("C must be positive")
    X, y = _check_xy(X, y, len(labels))
    k, d = len(labels), X.shape[1]
    W = np.zeros((k, d))
    b = np.zeros(k)
    loss, gw, gb = loss_and_grad(W, b, X, y, c)
    step = 1.0
    for _ in range(cfg.max_iter):
        gmax = max(np.abs(gw).max(), np.abs(gb).max())
        if gmax <= cfg.grad_tol:
            break
        gsq = float(np.sum(gw * gw) + np.sum(gb * gb))
        step = min(step * 2.0, 1e6)
        while True:
            W2 = W - step * gw
            b2 = b - step * gb
            if loss_value(W2, b2, X, y, c) <= loss - ARMIJO * step * gsq:
                break
            step *= 0.5
            if step < 1e-20:
                # gradient no longer yields a descent step at float precision
                return LogRegModel(W, b, c, labels)
        W, b = W2, b2
        loss, gw, gb = loss_and_grad(W, b, X, y, c)
    return LogRegModel(W, b, c, labels)


def predict_proba(model: LogRegModel, x) -> np.ndarray:
    """softmax(Wx + b); rows sum to 1 and never contain NaN."""
    x = np.asarray(x, dtype=np.float64)
    if x.shape[-1] != model.dim:
        raise ValueError(f"feature length {x.shape[-1]} != model dim {model.dim}")
    return _softmax(x @ model.weights.T + model.bias)


def rank_labels(probs, top: int = 3) -> list[int]:
    """Label indices sorted by descending probability, truncated to top.

    Stable sort, so exact probability ties keep label-set order.
    """
    probs = np.asarray(probs)
    order = np.argsort(-probs, kind="stable")
    return [int(i) for i in order[: min(top, len(probs))]]


def predict_top3(model: LogRegModel, x):
    """(label, probability) pairs for the top-3 ranked classes of one row."""
    p = predict_proba(model, x)
    return [(model.labels[i], float(p[i])) for i in rank_labels(p)]


@dataclass
class GridRow:
    c: float
    mean_rank: float
    accuracy: float
    fold_mean_ranks: tuple[float, ...]
    fold_accuracies: tuple[float, ...]


@dataclass
class GridSearchResult:
    best_c: float
    rows: list[GridRow]
    model: LogRegModel
    folds: list[np.ndarray]
    # out-of-fold top-3 predictions per C, aligned with the input rows
    oof_predictions: dict[float, list[list[int]]] = field(repr=False, default_factory=dict)


def grid_search(X, y, labels, cfg: TrainConfig) -> GridSearchResult:
    """Pick C by stratified k-fold CV, then refit on the full data.

    Every C is scored on the same folds; mean rank decides, accuracy breaks
    ties, then the smaller C. Rows come back in grid order.
    """
    labels = tuple(labels)
    X, y = _check_xy(X, y, len(labels))
    folds = stratified_kfold(y.tolist(), cfg.folds, cfg.seed)
    all_idx = np.arange(len(y))
    rows: list[GridRow] = []
    oof: dict[float, list[list[int]]] = {}
    for c in cfg.c_grid:
        preds: list[list[int] | None] = [None] * len(y)
        fold_mrs = []
        fold_accs = []
        for test_idx in folds:
            train_mask = np.ones(len(y), dtype=bool)
            train_mask[test_idx] = False
            train_idx = all_idx[train_mask]
            m = train(X[train_idx], y[train_idx], labels, c, cfg)
            p = predict_proba(m, X[test_idx])
            fold_preds = [rank_labels(p[i]) for i in range(len(test_idx))]
            for j, row_i in enumerate(test_idx):
                preds[int(row_i)] = fold_preds[j]
            gold = y[test_idx].tolist()
            fold_mrs.append(mean_rank(fold_preds, gold))
            fold_accs.append(accuracy(fold_preds, gold))
        rows.append(
            GridRow(
                c=c,
                mean_rank=float(np.mean(fold_mrs)),
                accuracy=float(np.mean(fold_accs)),
                fold_mean_ranks=tuple(fold_mrs),
                fold_accuracies=tuple(fold_accs),
            )
        )
        oof[c] = preds  # type: ignore[assignment]
    best = min(rows, key=lambda r: (r.mean_rank, -r.accuracy, r.c))
    model = train(X, y, labels, best.c, cfg)
    return GridSearchResult(best.c, rows, model, folds, oof)


def save_model(model: LogRegModel, path) -> None:
    """Versioned plain-text persistence; floats via repr so a reload
    reproduces identical predictions."""
    lines = [MODEL_MAGIC]
    lines.append(f"C {repr(float(model.c))}")
    lines.append(f"dim {model.dim}")
    lines.append(f"classes {len(model.labels)}")
    for lab in model.labels:
        lines.append(f"label {lab}")
    lines.append("W")
    for row in model.weights:
        lines.append(" ".join(repr(float(v)) for v in row))
    lines.append("b")
    lines.append(" ".join(repr(float(v)) for v in model.bias))
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")


def load_model(path) -> LogRegModel:
    with open(path, encoding="utf-8") as fh:
        lines = fh.read().splitlines()
    if not lines or lines[0] != MODEL_MAGIC:
        raise ValueError(f"not a model file (expected header {MODEL_MAGIC!r})")
    try:
        c = float(lines[1].split(" ", 1)[1])
        dim = int(lines[2].split(" ", 1)[1])
        k = int(lines[3].split(" ", 1)[1])
        labels = []
        pos = 4
        for _ in range(k):
            if not lines[pos].startswith("label "):
                raise ValueError(f"model file corrupt at line {pos + 1}")
            labels.append(lines[pos][len("label ") :])
            pos += 1
        if lines[pos] != "W":
            raise ValueError("model file corrupt: missing W section")
        pos += 1
        weights = np.array(
            [[float(v) for v in lines[pos + i].split()] for i in range(k)]
        )
        pos += k
        if lines[pos] != "b":
            raise ValueError("model file corrupt: missing b section")
        bias = np.array([float(v) for v in lines[pos + 1].split()])
    except (IndexError, ValueError) as exc:
        if isinstance(exc, ValueError) and "corrupt" in str(exc):
            raise
        raise ValueError(f"model file corrupt: {exc}") from exc
    if weights.shape != (k, dim) or bias.shape != (k,):
        raise ValueError("model file corrupt: shape mismatch")
    return LogRegModel(weights, bias, c, tuple(labels))
