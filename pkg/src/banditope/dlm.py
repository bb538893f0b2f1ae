"""Cost-sensitive linear policy training by approximate loss-gradient steps.

The "towards-better" update compares the currently predicted action
``a2 = argmax_a x . theta_a`` with the loss-adjusted choice
``a1 = argmax_a (x . theta_a - epsilon * loss_a)`` and moves weight mass
from ``a2`` toward ``a1``.  Training runs full-batch: every example's
update is computed against the iteration's starting weights, the deltas
are accumulated, and the sum is applied once with the decaying step size
``eta(t) = t^-0.3 / 2``.  Because the policy loss is not convex in the
weights, training restarts from several random perturbations and keeps
the restart whose final policy has the lowest mean training loss.

Losses are arbitrary reals, so imputed (possibly negative) cost vectors
train through the same path as true 0/1 losses.
"""

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .core import CostVectorExample, Policy, stack_cost_examples
from .errors import InputError


def default_learning_rate(t: int) -> float:
    """Decaying step size for batched iteration ``t`` (1-based)."""
    return t**-0.3 / 2.0


@dataclass(frozen=True)
class DlmConfig:
    """Training hyperparameters.

    ``epsilon`` scales the loss inside the towards-better argmax;
    ``perturbation_scale`` bounds the uniform initial weights of each
    restart; iteration stops once the infinity-norm of a weight update
    falls below ``convergence_tol`` or ``max_iterations`` is hit.
    """

    epsilon: float = 0.1
    learning_rate: Callable[[int], float] = field(default=default_learning_rate)
    restarts: int = 20
    max_iterations: int = 1000
    convergence_tol: float = 1e-6
    perturbation_scale: float = 0.01

    def __post_init__(self):
        for name in ("epsilon", "restarts", "max_iterations", "convergence_tol",
                     "perturbation_scale"):
            if getattr(self, name) <= 0:
                raise InputError(f"{name} must be positive")


def select_pair(theta: np.ndarray, x: np.ndarray, losses: np.ndarray, epsilon: float):
    """The towards-better pair ``(a1, a2)`` for one example (lowest-index ties)."""
    scores = theta @ x
    a1 = int(np.argmax(scores - epsilon * losses))
    a2 = int(np.argmax(scores))
    return a1, a2


def dlm_update(
    theta: np.ndarray, ex: CostVectorExample, eta: float, epsilon: float
) -> np.ndarray:
    """One towards-better step on a single example; returns new weights."""
    if eta <= 0 or epsilon <= 0:
        raise InputError("eta and epsilon must be positive")
    theta = np.asarray(theta, dtype=float)
    if theta.ndim != 2 or theta.shape[1] != len(ex.context):
        raise InputError(
            f"theta must be (k, {len(ex.context)}), got shape {theta.shape}"
        )
    if theta.shape[0] != len(ex.losses):
        raise InputError("theta rows must match the number of losses")
    a1, a2 = select_pair(theta, ex.context, ex.losses, epsilon)
    out = theta.copy()
    if a1 != a2:
        out[a1] += eta * ex.context
        out[a2] -= eta * ex.context
    return out


def _batch_delta(X: np.ndarray, a1: np.ndarray, a2: np.ndarray, k: int) -> np.ndarray:
    """Sum of per-example towards-better deltas, one row per action.

    Contributions to each (action, coordinate) are sorted by value before
    summation, so the result is bitwise invariant under any permutation of
    the examples.
    """
    delta = np.zeros((k, X.shape[1]))
    changed = a1 != a2
    for a in range(k):
        plus = X[changed & (a1 == a)]
        minus = X[changed & (a2 == a)]
        if len(plus) == 0 and len(minus) == 0:
            continue
        contrib = np.sort(np.concatenate([plus, -minus]), axis=0)
        delta[a] = contrib.sum(axis=0)
    return delta


def _training_loss(L: np.ndarray, scores: np.ndarray) -> float:
    chosen = np.argmax(scores, axis=1)
    return math.fsum(L[np.arange(len(L)), chosen]) / len(L)


def _run_restart(
    X: np.ndarray, L: np.ndarray, config: DlmConfig, stream: np.random.Generator
) -> tuple[np.ndarray, float]:
    """One restart: perturbed init, full-batch iteration, final training loss."""
    k = L.shape[1]
    theta = stream.uniform(
        -config.perturbation_scale, config.perturbation_scale, size=(k, X.shape[1])
    )
    for t in range(1, config.max_iterations + 1):
        scores = X @ theta.T
        a2 = np.argmax(scores, axis=1)
        a1 = np.argmax(scores - config.epsilon * L, axis=1)
        if np.array_equal(a1, a2):
            break
        step = config.learning_rate(t) * _batch_delta(X, a1, a2, k)
        theta = theta + step
        if np.abs(step).max() < config.convergence_tol:
            break
    return theta, _training_loss(L, X @ theta.T)


def dlm_train(
    examples: Sequence[CostVectorExample],
    config: DlmConfig,
    rng: np.random.Generator,
) -> Policy:
    """Train a linear argmax policy on complete cost vectors.

    Runs ``config.restarts`` independent restarts, each from uniformly
    perturbed initial weights drawn from its own child stream of ``rng``,
    and returns the restart whose final policy scores the lowest mean
    loss on the training cost vectors (earliest restart on ties).
    """
    X, L = stack_cost_examples(examples)
    best_loss = math.inf
    best_weights = None
    for stream in rng.spawn(config.restarts):
        theta, loss = _run_restart(X, L, config, stream)
        if loss < best_loss:
            best_loss = loss
            best_weights = theta
    return Policy(best_weights)
