"""The three policy-value estimators: direct method, inverse propensity
scoring, and doubly robust.

Each estimator averages one term per logged record:

* direct method (DM): ``model(x, policy(x))`` — trusts the payoff model,
  ignores the logged action, payoff and propensity entirely;
* inverse propensity scoring (IPS): ``payoff * match / propensity`` where
  ``match`` indicates the policy agrees with the logged action;
* doubly robust (DR): ``(payoff - model(x, a)) * match / propensity +
  model(x, policy(x))`` — the model as a baseline with an
  importance-weighted correction on the residual.

IPS is DR with the all-zeros model.  Reports keep the per-record terms so
callers can audit and recombine them; the value is always the compensated
(correctly rounded) mean of the terms.
"""

import math
from dataclasses import dataclass

import numpy as np

from .core import LoggedDataset, LoggedRecord, Policy
from .errors import InputError, PropensityError
from .models import PayoffModel


@dataclass(frozen=True)
class EstimateReport:
    """A policy-value estimate with its per-record term breakdown."""

    value: float
    terms: np.ndarray
    n: int


def _report(terms: np.ndarray) -> EstimateReport:
    return EstimateReport(value=math.fsum(terms) / len(terms), terms=terms, n=len(terms))


def _floored(propensities: np.ndarray, floor: float | None) -> np.ndarray:
    if floor is None:
        return propensities
    if not (0.0 < floor <= 1.0):
        raise InputError(f"propensity floor must be in (0, 1], got {floor}")
    return np.maximum(propensities, floor)


def dr_term(record: LoggedRecord, model: PayoffModel, policy: Policy) -> float:
    """Doubly robust term for a single logged record."""
    if record.propensity <= 0:
        raise PropensityError(f"propensity must be positive, got {record.propensity}")
    pi = policy.apply(record.context)
    baseline = model.predict(record.context, pi)
    if record.action != pi:
        return baseline
    residual = record.payoff - model.predict(record.context, record.action)
    return residual / record.propensity + baseline


def estimate_dr(
    data: LoggedDataset,
    model: PayoffModel,
    policy: Policy,
    propensity_floor: float | None = None,
) -> EstimateReport:
    """Doubly robust estimate of the policy value on logged data."""
    pi = policy.apply_matrix(data.contexts)
    predicted = model.predict_matrix(data.contexts)
    idx = np.arange(data.n)
    baseline = predicted[idx, pi]
    at_logged = predicted[idx, data.actions]
    match = (data.actions == pi).astype(float)
    props = _floored(data.propensities, propensity_floor)
    terms = (data.payoffs - at_logged) * match / props + baseline
    return _report(terms)


def estimate_ips(
    data: LoggedDataset,
    policy: Policy,
    propensity_floor: float | None = None,
) -> EstimateReport:
    """Importance-weighted estimate of the policy value on logged data."""
    pi = policy.apply_matrix(data.contexts)
    match = (data.actions == pi).astype(float)
    props = _floored(data.propensities, propensity_floor)
    terms = data.payoffs * match / props
    return _report(terms)


def estimate_dm(data, model: PayoffModel, policy: Policy) -> EstimateReport:
    """Direct-method estimate: mean model prediction at the policy's actions.

    ``data`` may be a :class:`LoggedDataset` or any ``(n, d)`` array of
    contexts; logged actions, payoffs and propensities are ignored.
    """
    if isinstance(data, LoggedDataset):
        X = data.contexts
    else:
        X = np.asarray(data, dtype=float)
        if X.ndim == 1:
            X = X[None, :]
    if len(X) == 0:
        raise InputError("need at least one context")
    pi = policy.apply_matrix(X)
    terms = model.predict_matrix(X)[np.arange(len(X)), pi]
    return _report(terms)
