"""Tree learners: a weighted binary decision tree and the filter-tree
reduction from cost-sensitive multiclass to weighted binary classification.

The binary learner is a small CART-style tree: greedy top-down induction
on axis-aligned threshold splits, minimizing weighted Gini impurity, with
weighted-majority leaves.  It is deterministic — features are scanned in
index order, candidate thresholds in sorted order, and only strictly
better splits replace the incumbent.

The filter tree arranges the ``k`` actions as the leaves of a balanced
binary tournament (consecutive index pairs, odd leftovers get a bye).
Training proceeds bottom-up.  Each internal node sees, per example, the
two actions its children route to, and trains a binary classifier to pick
the lower-loss side, weighting the example by the absolute loss
difference (zero-weight examples are skipped — they carry no signal).
The trained node then filters: only the child action its classifier picks
survives to the parent's comparison.  Prediction walks classifiers from
the root to a leaf, so its cost grows with the logarithm of the number of
actions rather than linearly.
"""

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .core import CostVectorExample, stack_cost_examples
from .errors import InputError


@dataclass(frozen=True)
class BinaryTreeConfig:
    max_depth: int = 8
    min_samples_leaf: int = 2

    def __post_init__(self):
        if self.max_depth < 1 or self.min_samples_leaf < 1:
            raise InputError("max_depth and min_samples_leaf must be positive")


@dataclass
class _TreeNode:
    label: int | None = None  # leaf prediction when not None
    feature: int = -1
    threshold: float = 0.0
    left: "_TreeNode | None" = None
    right: "_TreeNode | None" = None


class BinaryTreeClassifier:
    """A fitted weighted decision tree over labels {0, 1}."""

    def __init__(self, root: _TreeNode, d: int):
        self._root = root
        self.d = d

    def predict_one(self, x) -> int:
        node = self._root
        while node.label is None:
            node = node.left if x[node.feature] <= node.threshold else node.right
        return node.label

    def predict(self, X: np.ndarray) -> np.ndarray:
        X = np.asarray(X, dtype=float)
        return np.array([self.predict_one(row) for row in X], dtype=int)

    @classmethod
    def constant(cls, label: int, d: int) -> "BinaryTreeClassifier":
        return cls(_TreeNode(label=int(label)), d)


def _weighted_majority(y: np.ndarray, w: np.ndarray) -> int:
    w1 = w[y == 1].sum()
    w0 = w.sum() - w1
    return 1 if w1 > w0 else 0


def _gini(w0: float, w1: float) -> float:
    total = w0 + w1
    if total <= 0.0:
        return 0.0
    p0 = w0 / total
    p1 = w1 / total
    return 1.0 - (p0 * p0 + p1 * p1)


def _best_split(X: np.ndarray, y: np.ndarray, w: np.ndarray, min_leaf: int):
    """Lowest weighted-impurity axis split, or None when nothing improves.

    Ties keep the first candidate in (feature, threshold) scan order.
    """
    n, d = X.shape
    total1 = w[y == 1].sum()
    total0 = w.sum() - total1
    parent = _gini(total0, total1) * (total0 + total1)
    best = None
    best_score = parent - 1e-12
    for j in range(d):
        order = np.argsort(X[:, j], kind="stable")
        col = X[order, j]
        w_ord = w[order]
        w1_ord = w_ord * (y[order] == 1)
        cum_w = np.cumsum(w_ord)
        cum_w1 = np.cumsum(w1_ord)
        # Split between consecutive distinct values only.
        boundaries = np.nonzero(col[:-1] < col[1:])[0]
        for i in boundaries:
            n_left = i + 1
            if n_left < min_leaf or n - n_left < min_leaf:
                continue
            left1 = cum_w1[i]
            left0 = cum_w[i] - left1
            right1 = total1 - left1
            right0 = total0 - left0
            score = _gini(left0, left1) * (left0 + left1) + _gini(right0, right1) * (
                right0 + right1
            )
            if score < best_score:
                best_score = score
                best = (j, (col[i] + col[i + 1]) / 2.0)
    return best


def _grow(X, y, w, depth: int, config: BinaryTreeConfig) -> _TreeNode:
    if (
        depth >= config.max_depth
        or len(X) < 2 * config.min_samples_leaf
        or len(np.unique(y)) < 2
    ):
        return _TreeNode(label=_weighted_majority(y, w))
    split = _best_split(X, y, w, config.min_samples_leaf)
    if split is None:
        return _TreeNode(label=_weighted_majority(y, w))
    j, thr = split
    mask = X[:, j] <= thr
    return _TreeNode(
        feature=j,
        threshold=thr,
        left=_grow(X[mask], y[mask], w[mask], depth + 1, config),
        right=_grow(X[~mask], y[~mask], w[~mask], depth + 1, config),
    )


def binary_tree_learn(examples, config: BinaryTreeConfig | None = None) -> BinaryTreeClassifier:
    """Fit a weighted binary decision tree.

    ``examples`` is a sequence of ``(context, label, weight)`` triples with
    labels in {0, 1} and weights >= 0, or an ``(X, y, w)`` array triple.
    Zero-weight rows are dropped before induction; the total weight must
    be positive.
    """
    config = config or BinaryTreeConfig()
    if (
        isinstance(examples, tuple)
        and len(examples) == 3
        and np.ndim(examples[0]) == 2
    ):
        X, y, w = examples
        X = np.asarray(X, dtype=float)
        y = np.asarray(y, dtype=int)
        w = np.asarray(w, dtype=float)
    else:
        if len(examples) == 0:
            raise InputError("examples must be nonempty")
        X = np.stack([np.asarray(e[0], dtype=float) for e in examples])
        y = np.array([e[1] for e in examples], dtype=int)
        w = np.array([e[2] for e in examples], dtype=float)
    if len(X) == 0:
        raise InputError("examples must be nonempty")
    if not np.all((y == 0) | (y == 1)):
        raise InputError("labels must be 0 or 1")
    if w.min() < 0:
        raise InputError("weights must be nonnegative")
    keep = w > 0
    if not keep.any():
        raise InputError("total example weight must be positive")
    root = _grow(X[keep], y[keep], w[keep], 0, config)
    return BinaryTreeClassifier(root, X.shape[1])


# ---------------------------------------------------------------------------
# Filter tree
# ---------------------------------------------------------------------------


@dataclass
class _FilterNode:
    """Either a leaf holding one action or an internal classifier node."""

    action: int | None = None
    classifier: BinaryTreeClassifier | None = None
    left: "_FilterNode | None" = None
    right: "_FilterNode | None" = None

    @property
    def is_leaf(self) -> bool:
        return self.action is not None


class FilterTreeModel:
    """A trained tournament of binary classifiers over ``k`` actions."""

    def __init__(self, root: _FilterNode, k: int):
        self.root = root
        self.k = k

    @property
    def depth(self) -> int:
        def walk(node: _FilterNode) -> int:
            if node.is_leaf:
                return 0
            return 1 + max(walk(node.left), walk(node.right))

        return walk(self.root)

    def leaf_actions(self) -> list[int]:
        out: list[int] = []

        def walk(node: _FilterNode):
            if node.is_leaf:
                out.append(node.action)
            else:
                walk(node.left)
                walk(node.right)

        walk(self.root)
        return out


def filter_tree_train(
    examples: Sequence[CostVectorExample], tconfig: BinaryTreeConfig | None = None
) -> FilterTreeModel:
    """Train a filter tree bottom-up from complete cost vectors."""
    tconfig = tconfig or BinaryTreeConfig()
    X, L = stack_cost_examples(examples)
    k = L.shape[1]
    if k < 2:
        raise InputError(f"filter tree needs k >= 2 actions, got {k}")

    # Each level pairs adjacent nodes; an odd node gets a bye upward.
    # `routes[i]` tracks, per node, the action that survives for example i.
    level = [_FilterNode(action=a) for a in range(k)]
    routes = [np.full(len(X), a) for a in range(k)]
    while len(level) > 1:
        next_level: list[_FilterNode] = []
        next_routes: list[np.ndarray] = []
        for j in range(0, len(level) - 1, 2):
            left, right = level[j], level[j + 1]
            aL, aR = routes[j], routes[j + 1]
            idx = np.arange(len(X))
            lossL = L[idx, aL]
            lossR = L[idx, aR]
            weights = np.abs(lossL - lossR)
            labels = (lossR < lossL).astype(int)  # 1 means the right side wins
            if weights.max() > 0:
                clf = binary_tree_learn((X[weights > 0], labels[weights > 0],
                                         weights[weights > 0]), tconfig)
            else:
                clf = BinaryTreeClassifier.constant(0, X.shape[1])
            picks = clf.predict(X)
            next_level.append(_FilterNode(classifier=clf, left=left, right=right))
            next_routes.append(np.where(picks == 0, aL, aR))
        if len(level) % 2 == 1:
            next_level.append(level[-1])
            next_routes.append(routes[-1])
        level = next_level
        routes = next_routes
    return FilterTreeModel(level[0], k)


def filter_tree_predict(model: FilterTreeModel, x) -> int:
    """Walk classifiers root-to-leaf and return the winning action."""
    x = np.asarray(x, dtype=float)
    node = model.root
    while not node.is_leaf:
        node = node.left if node.classifier.predict_one(x) == 0 else node.right
    return int(node.action)


def filter_tree_predict_matrix(model: FilterTreeModel, X: np.ndarray) -> np.ndarray:
    """Predicted actions for every row of ``X``."""
    X = np.asarray(X, dtype=float)
    return np.array([filter_tree_predict(model, row) for row in X], dtype=int)
