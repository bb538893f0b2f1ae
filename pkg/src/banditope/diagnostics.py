"""Closed-form bias and variance of the estimators on known environments.

Everything here needs the *true* reward means and logging probabilities,
so these diagnostics are deliberately only defined on a
:class:`~banditope.oracle.FiniteInstance`, never on logged data alone —
plugging estimates where the formulas require truth would silently
invalidate them.

Two model deviations drive the expressions, both evaluated at the
policy's action:

* ``delta_add(a, x) = predicted(x, a) - true_mean(x, a)`` — additive
  payoff-model error;
* ``delta_mult(a, x) = 1 - p(a|x) / propensity(a|x)`` — multiplicative
  propensity-model error.

The doubly robust bias is ``E_x[delta_add * delta_mult]``; the direct
method's is ``E_x[delta_add]`` and importance weighting's is
``-E_x[true_mean * delta_mult]`` (IPS is DR with the zero model, whose
additive deviation is the negated true mean).  The variance of a single term splits
into a reward-noise term, a context-variation term and an importance
penalty; for DM only the context term survives.  Bias values are
reported signed, with absolute values applied only where a display or a
test wants magnitudes.
"""

import math
from dataclasses import dataclass

import numpy as np

from .core import Policy
from .errors import InputError
from .models import PayoffModel
from .oracle import FiniteInstance, _check_kind


@dataclass(frozen=True)
class ModelDeviations:
    """Tabled deviations of a payoff/propensity model pair from the truth.

    ``add_table[i, a]`` is the additive payoff-model deviation and
    ``mult_table[i, a]`` the multiplicative propensity deviation for
    context index ``i`` of the instance the table was built from.
    """

    add_table: np.ndarray
    mult_table: np.ndarray

    @classmethod
    def from_instance(cls, instance: FiniteInstance, model: PayoffModel) -> "ModelDeviations":
        add = model.predict_matrix(instance.contexts) - instance.expected_rewards()
        ratio = np.zeros_like(add)
        np.divide(
            instance.logging,
            instance.logged_propensities,
            out=ratio,
            where=instance.logged_propensities > 0,
        )
        mult = 1.0 - ratio
        if not (np.all(np.isfinite(add)) and np.all(np.isfinite(mult))):
            raise InputError("deviations must be finite wherever propensities are positive")
        return cls(add_table=add, mult_table=mult)

    def delta_add(self, action: int, context_index: int) -> float:
        return float(self.add_table[context_index, action])

    def delta_mult(self, action: int, context_index: int) -> float:
        return float(self.mult_table[context_index, action])


@dataclass(frozen=True)
class VarianceDecomposition:
    """Three-term variance split of an estimator over ``n`` records.

    ``total = (reward_noise + context_term + importance_penalty) / n``.
    The direct method has no reward-noise or importance-penalty
    component.
    """

    reward_noise: float
    context_term: float
    importance_penalty: float
    total: float


def _at_policy(instance: FiniteInstance, policy: Policy, model: PayoffModel):
    """Per-context quantities evaluated at the policy's chosen action."""
    idx = np.arange(instance.m)
    pi = policy.apply_matrix(instance.contexts)
    dev = ModelDeviations.from_instance(instance, model)
    return {
        "probs": instance.context_probs,
        "rho": instance.expected_rewards()[idx, pi],
        "rho_var": instance.reward_variances()[idx, pi],
        "delta": dev.add_table[idx, pi],
        "delta_mult": dev.mult_table[idx, pi],
        "p": instance.logging[idx, pi],
        "p_hat": instance.logged_propensities[idx, pi],
    }


def theoretical_bias(
    instance: FiniteInstance, policy: Policy, model: PayoffModel, kind: str
) -> float:
    """Signed bias of a single estimator term on a stationary instance."""
    kind = _check_kind(kind)
    q = _at_policy(instance, policy, model)
    if kind == "dm":
        integrand = q["delta"]
    elif kind == "ips":
        # The zero-model special case of DR: its additive deviation is the
        # negated true mean, so the signed bias is -E[rho * delta_mult].
        integrand = -q["rho"] * q["delta_mult"]
    else:
        integrand = q["delta"] * q["delta_mult"]
    return math.fsum(q["probs"] * integrand)


def _mean_and_variance(probs: np.ndarray, values: np.ndarray) -> tuple[float, float]:
    mean = math.fsum(probs * values)
    second = math.fsum(probs * values * values)
    return mean, max(second - mean * mean, 0.0)


def theoretical_variance(
    instance: FiniteInstance, policy: Policy, model: PayoffModel, n: int, kind: str
) -> VarianceDecomposition:
    """Three-term variance of the estimator over ``n`` IID records.

    The importance penalty is computed as ``coef^2 * p (1 - p) /
    propensity^2`` (``coef`` is the additive deviation for DR and the true
    mean payoff for IPS), which equals the ``(1 - p) / p`` form wherever
    ``p > 0`` and stays finite when the policy's action is never logged.
    """
    kind = _check_kind(kind)
    if n < 1:
        raise InputError(f"n must be >= 1, got {n}")
    q = _at_policy(instance, policy, model)
    probs = q["probs"]

    if kind == "dm":
        _, context_term = _mean_and_variance(probs, q["rho"] + q["delta"])
        reward_noise = 0.0
        penalty = 0.0
    else:
        # p / propensity^2, zero where the policy's action is never logged
        # (the instance guarantees propensity > 0 wherever p > 0).
        inv_sq = np.zeros(instance.m)
        np.divide(q["p"], q["p_hat"] ** 2, out=inv_sq, where=q["p"] > 0)
        reward_noise = math.fsum(probs * q["rho_var"] * inv_sq)
        coef = q["delta"] if kind == "dr" else -q["rho"]
        _, context_term = _mean_and_variance(probs, q["rho"] + coef * q["delta_mult"])
        penalty = math.fsum(probs * coef**2 * (1.0 - q["p"]) * inv_sq)

    total = (reward_noise + context_term + penalty) / n
    return VarianceDecomposition(
        reward_noise=reward_noise,
        context_term=context_term,
        importance_penalty=penalty,
        total=total,
    )
