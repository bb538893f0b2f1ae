"""Turning multiclass data into partially labeled bandit data, and back.

A k-class example becomes a cost-sensitive example with the 0/1 loss
vector ``loss[a] = 1 if a != label else 0``.  Hiding all but one uniformly
chosen component produces a logged bandit record with known propensity
``1/k``.  Imputation reverses the hiding in expectation: the unrevealed
entries of each record's loss vector are filled with an off-policy
estimate, giving complete (possibly negative) cost vectors a fully
supervised learner can consume.
"""

from typing import Sequence

import numpy as np

from .core import CostVectorExample, LoggedDataset, LoggedRecord, MulticlassExample
from .errors import InputError, PropensityError
from .models import PayoffModel

IMPUTE_METHODS = ("ips", "dr")


def to_cost_sensitive(ex: MulticlassExample, k: int) -> CostVectorExample:
    """0/1 cost vector for a labeled example: zero at the label, one elsewhere."""
    if not (0 <= ex.label < k):
        raise InputError(f"label {ex.label} out of range [0, {k})")
    losses = np.ones(k)
    losses[ex.label] = 0.0
    return CostVectorExample(ex.context, losses)


def reveal_one(ex: CostVectorExample, rng: np.random.Generator) -> LoggedRecord:
    """Reveal a single uniformly chosen loss component as a bandit record."""
    k = len(ex.losses)
    action = int(rng.integers(k))
    return LoggedRecord(
        context=ex.context,
        action=action,
        payoff=float(ex.losses[action]),
        propensity=1.0 / k,
    )


def reveal_dataset(
    examples: Sequence[CostVectorExample], rng: np.random.Generator
) -> LoggedDataset:
    """Apply :func:`reveal_one` to every example, as one logged dataset."""
    if len(examples) == 0:
        raise InputError("examples must be nonempty")
    k = len(examples[0].losses)
    return LoggedDataset.from_records([reveal_one(ex, rng) for ex in examples], k)


def impute_costs(
    records: Sequence[LoggedRecord],
    k: int,
    method: str,
    model: PayoffModel | None = None,
) -> list[CostVectorExample]:
    """Fill complete loss vectors from singly revealed records.

    ``ips`` places ``payoff / propensity`` at the revealed action and zero
    elsewhere.  ``dr`` starts from the model's prediction for every action
    and adds the importance-weighted residual at the revealed action; with
    the zero model it coincides with ``ips``.  Either way the imputed
    vector averages to the true loss vector over the uniform reveal.
    """
    method = method.lower()
    if method not in IMPUTE_METHODS:
        raise InputError(f"method must be one of {IMPUTE_METHODS}, got {method!r}")
    if method == "dr" and model is None:
        raise InputError("dr imputation needs a payoff model")
    if len(records) == 0:
        return []
    for rec in records:
        if rec.propensity <= 0:
            raise PropensityError(f"propensity must be positive, got {rec.propensity}")
        if not (0 <= rec.action < k):
            raise InputError(f"action {rec.action} out of range [0, {k})")
    idx = np.arange(len(records))
    actions = np.array([rec.action for rec in records])
    payoffs = np.array([rec.payoff for rec in records])
    props = np.array([rec.propensity for rec in records])
    if method == "ips":
        imputed = np.zeros((len(records), k))
        imputed[idx, actions] = payoffs / props
    else:
        imputed = model.predict_matrix(np.stack([rec.context for rec in records]))
        if imputed.shape[1] != k:
            raise InputError(f"model predicts {imputed.shape[1]} actions, expected {k}")
        imputed[idx, actions] += (payoffs - imputed[idx, actions]) / props
    return [CostVectorExample(rec.context, row) for rec, row in zip(records, imputed)]
