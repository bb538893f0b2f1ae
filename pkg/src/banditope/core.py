"""Domain types shared by the whole package.

Contexts are plain 1-D numpy arrays of finite floats.  A logged interaction
records the context, the chosen action, the observed payoff and the
probability with which the logging policy chose that action.  Payoffs are a
generic scalar: the estimators are linear, so reward-maximization problems
feed rewards (higher is better) and classification pipelines feed losses
(lower is better) through the same code path.

Actions are 0-based everywhere.  All argmax ties break toward the lowest
action index, which keeps every operation deterministic.
"""

import math
from dataclasses import dataclass
from typing import Iterator, Sequence

import numpy as np

from .errors import InputError, PropensityError


def as_context(x) -> np.ndarray:
    """Coerce ``x`` to a 1-D float array and validate finiteness."""
    arr = np.asarray(x, dtype=float)
    if arr.ndim != 1:
        raise InputError(f"context must be 1-D, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise InputError("context entries must be finite")
    return arr


@dataclass(frozen=True)
class LoggedRecord:
    """One bandit interaction: (context, action, payoff, propensity).

    Parameters
    ----------
    context : numpy.ndarray
        Feature vector of the interaction.
    action : int
        0-based index of the action the logging policy chose.
    payoff : float
        The observed scalar outcome for the chosen action.
    propensity : float
        Probability, in (0, 1], with which the logging policy chose
        ``action``.  Stored per record so history-dependent logging data
        stays representable.
    """

    context: np.ndarray
    action: int
    payoff: float
    propensity: float

    def __post_init__(self):
        object.__setattr__(self, "context", as_context(self.context))
        if self.action < 0:
            raise InputError(f"action must be >= 0, got {self.action}")
        if not math.isfinite(self.payoff):
            raise InputError("payoff must be finite")
        if not (0.0 < self.propensity <= 1.0):
            raise PropensityError(f"propensity must be in (0, 1], got {self.propensity}")


class LoggedDataset:
    """A column-oriented batch of :class:`LoggedRecord` with fixed ``k``.

    Parameters
    ----------
    contexts : (n, d) array
    actions : (n,) int array, entries in ``[0, k)``
    payoffs : (n,) array
    propensities : (n,) array, entries in ``(0, 1]``
    k : int
        Number of actions.
    """

    def __init__(self, contexts, actions, payoffs, propensities, k: int):
        X = np.asarray(contexts, dtype=float)
        a = np.asarray(actions, dtype=int)
        r = np.asarray(payoffs, dtype=float)
        p = np.asarray(propensities, dtype=float)
        if X.ndim != 2 or len(X) == 0:
            raise InputError("contexts must be a nonempty (n, d) array")
        n = len(X)
        if a.shape != (n,) or r.shape != (n,) or p.shape != (n,):
            raise InputError("actions, payoffs and propensities must all have length n")
        if not np.all(np.isfinite(X)) or not np.all(np.isfinite(r)):
            raise InputError("contexts and payoffs must be finite")
        if k < 1:
            raise InputError("k must be >= 1")
        if a.min() < 0 or a.max() >= k:
            raise InputError(f"actions must lie in [0, {k})")
        if p.min() <= 0.0 or p.max() > 1.0:
            raise PropensityError("propensities must lie in (0, 1]")
        self.contexts = X
        self.actions = a
        self.payoffs = r
        self.propensities = p
        self.k = int(k)

    @classmethod
    def from_records(cls, records: Sequence[LoggedRecord], k: int) -> "LoggedDataset":
        if len(records) == 0:
            raise InputError("records must be nonempty")
        X = np.stack([rec.context for rec in records])
        return cls(
            X,
            [rec.action for rec in records],
            [rec.payoff for rec in records],
            [rec.propensity for rec in records],
            k,
        )

    @property
    def n(self) -> int:
        return len(self.contexts)

    @property
    def d(self) -> int:
        return self.contexts.shape[1]

    def record(self, i: int) -> LoggedRecord:
        return LoggedRecord(
            self.contexts[i],
            int(self.actions[i]),
            float(self.payoffs[i]),
            float(self.propensities[i]),
        )

    def __len__(self) -> int:
        return self.n

    def __iter__(self) -> Iterator[LoggedRecord]:
        return (self.record(i) for i in range(self.n))


@dataclass(frozen=True)
class Policy:
    """Deterministic linear argmax policy.

    Holds one weight vector per action, stacked as a ``(k, d)`` matrix.
    The chosen action is ``argmax_a x . weights[a]`` with ties broken
    toward the lowest action index.
    """

    weights: np.ndarray

    def __post_init__(self):
        W = np.asarray(self.weights, dtype=float)
        if W.ndim != 2:
            raise InputError(f"policy weights must be (k, d), got shape {W.shape}")
        if not np.all(np.isfinite(W)):
            raise InputError("policy weights must be finite")
        object.__setattr__(self, "weights", W)

    @property
    def k(self) -> int:
        return self.weights.shape[0]

    @property
    def d(self) -> int:
        return self.weights.shape[1]

    def apply(self, x) -> int:
        """Chosen action for a single context."""
        x = as_context(x)
        if x.shape[0] != self.d:
            raise InputError(f"context has dimension {x.shape[0]}, policy expects {self.d}")
        # np.argmax returns the first maximizer, i.e. the lowest index.
        return int(np.argmax(self.weights @ x))

    def apply_matrix(self, X: np.ndarray) -> np.ndarray:
        """Chosen actions for every row of ``X``, shape ``(n,)``."""
        X = np.asarray(X, dtype=float)
        if X.ndim != 2 or X.shape[1] != self.d:
            raise InputError(f"contexts must be (n, {self.d}), got shape {X.shape}")
        return np.argmax(X @ self.weights.T, axis=1)


def policy_apply(policy: Policy, x) -> int:
    """Action chosen by ``policy`` on context ``x`` (lowest index on ties)."""
    return policy.apply(x)


@dataclass(frozen=True)
class MulticlassExample:
    """A fully labeled classification example."""

    context: np.ndarray
    label: int

    def __post_init__(self):
        object.__setattr__(self, "context", as_context(self.context))
        if self.label < 0:
            raise InputError(f"label must be >= 0, got {self.label}")


@dataclass(frozen=True)
class CostVectorExample:
    """A context with a complete per-action loss vector.

    Losses may be negative or exceed 1 when they were imputed by an
    off-policy estimator rather than observed.
    """

    context: np.ndarray
    losses: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "context", as_context(self.context))
        losses = np.asarray(self.losses, dtype=float)
        if losses.ndim != 1 or len(losses) == 0:
            raise InputError("losses must be a nonempty 1-D vector")
        if not np.all(np.isfinite(losses)):
            raise InputError("losses must be finite")
        object.__setattr__(self, "losses", losses)


def stack_cost_examples(examples: Sequence[CostVectorExample]) -> tuple[np.ndarray, np.ndarray]:
    """Stack examples into ``(X, L)`` arrays of shapes ``(n, d)`` and ``(n, k)``."""
    if len(examples) == 0:
        raise InputError("examples must be nonempty")
    X = np.stack([ex.context for ex in examples])
    L = np.stack([ex.losses for ex in examples])
    return X, L


def true_policy_value(examples: Sequence[CostVectorExample], policy: Policy) -> float:
    """Mean loss of the policy's chosen actions on fully labeled data.

    This is the ground-truth policy value when every per-action loss is
    known.  Summation is compensated, so the result is the correctly
    rounded mean of the per-example terms.
    """
    X, L = stack_cost_examples(examples)
    chosen = policy.apply_matrix(X)
    return math.fsum(L[np.arange(len(L)), chosen]) / len(L)
