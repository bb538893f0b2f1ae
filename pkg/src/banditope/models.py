"""Per-action linear payoff models fit by ridge regression, and propensity models.

The payoff model is a bare dot product per action, ``predicted(x, a) =
weights[a] . x``.  Fitting solves the regularized normal equations exactly
by factorization; nothing iterative.  Two fitting modes exist:

* :func:`fit_ridge_per_action` consumes logged bandit data, using for each
  action only the records whose logged action matches (partial-label
  discipline).
* :func:`fit_ridge_full` consumes complete loss matrices, using every
  example for every action.
"""

import numpy as np

from .core import LoggedDataset, as_context
from .errors import InputError, SingularSystemError


class PayoffModel:
    """Per-action linear payoff predictor.

    Parameters
    ----------
    weights : (k, d) array
        One weight vector per action.
    lam : float
        Ridge strength used at fit time (informational).
    """

    def __init__(self, weights, lam: float = 0.0):
        W = np.asarray(weights, dtype=float)
        if W.ndim != 2:
            raise InputError(f"model weights must be (k, d), got shape {W.shape}")
        if not np.all(np.isfinite(W)):
            raise InputError("model weights must be finite")
        self.weights = W
        self.lam = float(lam)

    @property
    def k(self) -> int:
        return self.weights.shape[0]

    @property
    def d(self) -> int:
        return self.weights.shape[1]

    def predict(self, x, a: int) -> float:
        """Predicted payoff of action ``a`` on context ``x``."""
        x = as_context(x)
        if x.shape[0] != self.d:
            raise InputError(f"context has dimension {x.shape[0]}, model expects {self.d}")
        if not (0 <= a < self.k):
            raise InputError(f"action {a} out of range [0, {self.k})")
        return float(self.weights[a] @ x)

    def predict_matrix(self, X: np.ndarray) -> np.ndarray:
        """Predicted payoffs for every (row, action) pair, shape ``(n, k)``."""
        X = np.asarray(X, dtype=float)
        if X.ndim != 2 or X.shape[1] != self.d:
            raise InputError(f"contexts must be (n, {self.d}), got shape {X.shape}")
        return X @ self.weights.T

    @classmethod
    def zero(cls, k: int, d: int) -> "PayoffModel":
        """The all-zeros model; turns the doubly robust estimator into plain
        importance weighting."""
        return cls(np.zeros((k, d)))


def predict_payoff(model: PayoffModel, x, a: int) -> float:
    """Functional alias for :meth:`PayoffModel.predict`."""
    return model.predict(x, a)


def ridge_solve(X: np.ndarray, y: np.ndarray, lam: float) -> np.ndarray:
    """Minimize ``sum((w.x - y)^2) + lam * ||w||^2`` exactly.

    Solves the d x d normal system by factorization.  With ``lam == 0`` the
    system must be nonsingular, otherwise :class:`SingularSystemError` is
    raised.  An empty design matrix yields the zero vector.
    """
    if lam < 0:
        raise InputError(f"ridge strength must be >= 0, got {lam}")
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float)
    if X.ndim != 2:
        raise InputError("design matrix must be 2-D")
    d = X.shape[1]
    if len(X) == 0:
        return np.zeros(d)
    A = X.T @ X + lam * np.eye(d)
    b = X.T @ y
    if lam == 0.0 and np.linalg.matrix_rank(A) < d:
        raise SingularSystemError("normal matrix is singular and lam=0; increase lam")
    try:
        return np.linalg.solve(A, b)
    except np.linalg.LinAlgError as exc:
        raise SingularSystemError(str(exc)) from exc


def fit_ridge_per_action(data: LoggedDataset, lam: float) -> PayoffModel:
    """Fit one ridge regression per action from logged bandit data.

    The weight vector for action ``a`` is fit only on records whose logged
    action equals ``a``; actions that never occur get a zero weight vector.
    """
    if lam < 0:
        raise InputError(f"ridge strength must be >= 0, got {lam}")
    W = np.zeros((data.k, data.d))
    for a in range(data.k):
        mask = data.actions == a
        if mask.any():
            W[a] = ridge_solve(data.contexts[mask], data.payoffs[mask], lam)
    return PayoffModel(W, lam)


def fit_ridge_full(X: np.ndarray, losses: np.ndarray, lam: float) -> PayoffModel:
    """Fit one ridge regression per action from fully labeled loss matrices.

    ``X`` is ``(n, d)`` and ``losses`` is ``(n, k)``; every example
    contributes to every action's fit.  The shared normal matrix is
    factored once.
    """
    if lam < 0:
        raise InputError(f"ridge strength must be >= 0, got {lam}")
    X = np.asarray(X, dtype=float)
    L = np.asarray(losses, dtype=float)
    if X.ndim != 2 or len(X) == 0:
        raise InputError("X must be a nonempty (n, d) array")
    if L.ndim != 2 or len(L) != len(X):
        raise InputError("losses must be (n, k) aligned with X")
    d = X.shape[1]
    A = X.T @ X + lam * np.eye(d)
    if lam == 0.0 and np.linalg.matrix_rank(A) < d:
        raise SingularSystemError("normal matrix is singular and lam=0; increase lam")
    W = np.linalg.solve(A, X.T @ L).T
    return PayoffModel(W, lam)


class PropensityModel:
    """Modeled action probabilities of the logging policy.

    Two table-free kinds exist: ``uniform`` (1/k for every action) and
    ``table`` (an explicit per-context lookup, rows aligned with some
    context indexing).  Logged data usually carries its propensity per
    record instead, in which case no model object is needed.
    """

    def __init__(self, kind: str, k: int, table: np.ndarray | None = None):
        if k < 1:
            raise InputError(f"k must be >= 1, got {k}")
        if kind not in ("uniform", "table"):
            raise InputError(f"unknown propensity model kind {kind!r}")
        if kind == "table":
            table = np.asarray(table, dtype=float)
            if table.ndim != 2 or table.shape[1] != k:
                raise InputError("table must be (n_contexts, k)")
            if table.min() <= 0.0 or table.max() > 1.0:
                raise InputError("table entries must lie in (0, 1]")
        self.kind = kind
        self.k = int(k)
        self.table = table

    def prob(self, a: int, context_index: int | None = None) -> float:
        """Modeled probability of action ``a``; table kind needs the row index."""
        if not (0 <= a < self.k):
            raise InputError(f"action {a} out of range [0, {self.k})")
        if self.kind == "uniform":
            return 1.0 / self.k
        if context_index is None:
            raise InputError("table propensity model needs a context index")
        return float(self.table[context_index, a])


def uniform_propensity(k: int) -> PropensityModel:
    """Uniform logging model: every action has probability ``1/k``."""
    return PropensityModel("uniform", k)
