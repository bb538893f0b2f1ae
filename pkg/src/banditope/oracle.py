"""Exact moments of the estimators on small, fully specified environments.

A :class:`FiniteInstance` enumerates everything: the context distribution,
a finite reward distribution per (context, action), the true logging
probabilities and the modeled (logged) propensities.  On such an instance
the expectation and variance of a single estimator term can be computed by
direct summation over all (context, action, reward) outcomes, with no
sampling and no appeal to the closed-form expressions under test.  That
makes this module the independent ground truth for unbiasedness and for
the bias/variance formulas in :mod:`banditope.diagnostics`.

Reward distributions are restricted to finite support (at most
``MAX_ATOMS`` values per context-action pair) and the total outcome count
is capped so enumeration stays exact and sub-second.

Instances can be loaded from a small text format (see
:func:`load_instance_file`).
"""

import math
from dataclasses import dataclass

import numpy as np

from .core import LoggedDataset, Policy
from .errors import InputError, ParseError
from .models import PayoffModel

MAX_ATOMS = 8
MAX_OUTCOMES = 100_000

_KINDS = ("dm", "ips", "dr")


def _check_kind(kind: str) -> str:
    kind = kind.lower()
    if kind not in _KINDS:
        raise InputError(f"kind must be one of {_KINDS}, got {kind!r}")
    return kind


@dataclass(frozen=True)
class FiniteInstance:
    """A fully enumerated contextual-bandit environment.

    Parameters
    ----------
    contexts : (m, d) array
        The support of the context distribution.
    context_probs : (m,) array
        Probability of each context; sums to 1.
    k : int
        Number of actions.
    reward_values, reward_probs : (m, k, A) arrays
        Finite reward distribution per (context, action): up to ``A``
        atoms with their probabilities (rows padded with probability 0).
        Deterministic rewards use a single atom.
    logging : (m, k) array
        True logging probabilities ``p(a | x)``; rows sum to 1.
    logged_propensities : (m, k) array
        Modeled propensities; positive wherever ``logging`` is positive.
    """

    contexts: np.ndarray
    context_probs: np.ndarray
    k: int
    reward_values: np.ndarray
    reward_probs: np.ndarray
    logging: np.ndarray
    logged_propensities: np.ndarray

    def __post_init__(self):
        X = np.asarray(self.contexts, dtype=float)
        cp = np.asarray(self.context_probs, dtype=float)
        rv = np.asarray(self.reward_values, dtype=float)
        rp = np.asarray(self.reward_probs, dtype=float)
        p = np.asarray(self.logging, dtype=float)
        ph = np.asarray(self.logged_propensities, dtype=float)
        if X.ndim != 2 or len(X) == 0:
            raise InputError("contexts must be a nonempty (m, d) array")
        m = len(X)
        k = int(self.k)
        if cp.shape != (m,) or cp.min() < 0:
            raise InputError("context_probs must be (m,) and nonnegative")
        if abs(math.fsum(cp) - 1.0) > 1e-12:
            raise InputError("context probabilities must sum to 1")
        if rv.ndim != 3 or rv.shape[:2] != (m, k) or rp.shape != rv.shape:
            raise InputError("reward arrays must be (m, k, atoms)")
        if rv.shape[2] > MAX_ATOMS:
            raise InputError(f"at most {MAX_ATOMS} reward atoms per (context, action)")
        if m * k * rv.shape[2] > MAX_OUTCOMES:
            raise InputError(f"instance exceeds {MAX_OUTCOMES} enumerable outcomes")
        if not np.all(np.isfinite(rv)) or rp.min() < 0:
            raise InputError("reward atoms must be finite with nonnegative probabilities")
        if np.max(np.abs(rp.sum(axis=2) - 1.0)) > 1e-12:
            raise InputError("reward atom probabilities must sum to 1 per (context, action)")
        if p.shape != (m, k) or ph.shape != (m, k):
            raise InputError("logging and logged_propensities must be (m, k)")
        if p.min() < 0 or np.max(np.abs(p.sum(axis=1) - 1.0)) > 1e-12:
            raise InputError("logging rows must be distributions over actions")
        if np.any((p > 0) & (ph <= 0)) or ph.max() > 1.0 or ph.min() < 0.0:
            raise InputError("propensities must be in [0, 1] and positive wherever logging is")
        for name, arr in (
            ("contexts", X), ("context_probs", cp), ("reward_values", rv),
            ("reward_probs", rp), ("logging", p), ("logged_propensities", ph),
        ):
            object.__setattr__(self, name, arr)

    @classmethod
    def deterministic(cls, contexts, context_probs, rewards, logging, logged_propensities=None):
        """Build an instance whose rewards are a fixed ``(m, k)`` table."""
        rewards = np.asarray(rewards, dtype=float)
        if logged_propensities is None:
            logged_propensities = logging
        return cls(
            contexts=contexts,
            context_probs=context_probs,
            k=rewards.shape[1],
            reward_values=rewards[:, :, None],
            reward_probs=np.ones(rewards.shape + (1,)),
            logging=logging,
            logged_propensities=logged_propensities,
        )

    @property
    def m(self) -> int:
        return len(self.contexts)

    @property
    def d(self) -> int:
        return self.contexts.shape[1]

    def expected_rewards(self) -> np.ndarray:
        """True mean reward per (context, action), shape ``(m, k)``."""
        return np.einsum("mka,mka->mk", self.reward_values, self.reward_probs)

    def reward_variances(self) -> np.ndarray:
        """True reward variance per (context, action), shape ``(m, k)``."""
        second = np.einsum("mka,mka->mk", self.reward_values**2, self.reward_probs)
        return np.maximum(second - self.expected_rewards() ** 2, 0.0)

    def policy_value(self, policy: Policy) -> float:
        """Exact value of the policy under this environment."""
        pi = policy.apply_matrix(self.contexts)
        rho = self.expected_rewards()
        return math.fsum(self.context_probs * rho[np.arange(self.m), pi])


def _term_table(instance: FiniteInstance, policy: Policy, model: PayoffModel, kind: str):
    """Per-outcome estimator terms and their probabilities.

    Returns ``(weights, terms)`` of shape ``(m, k, atoms)``: the joint
    probability of each (context, action, reward) outcome and the value a
    single estimator term takes on it.
    """
    kind = _check_kind(kind)
    m, k, atoms = instance.reward_values.shape
    pi = policy.apply_matrix(instance.contexts)
    rhohat = model.predict_matrix(instance.contexts)

    weights = (
        instance.context_probs[:, None, None]
        * instance.logging[:, :, None]
        * instance.reward_probs
    )
    if kind == "dm":
        terms = np.broadcast_to(rhohat[np.arange(m), pi][:, None, None], (m, k, atoms)).copy()
        return weights, terms

    match = np.zeros((m, k))
    match[np.arange(m), pi] = 1.0
    # Divide only where the outcome is reachable; unreachable cells keep 0.
    inv_prop = np.zeros((m, k))
    np.divide(match, instance.logged_propensities, out=inv_prop, where=instance.logging > 0)
    if kind == "ips":
        terms = instance.reward_values * inv_prop[:, :, None]
    else:
        residual = instance.reward_values - rhohat[:, :, None]
        baseline = rhohat[np.arange(m), pi][:, None, None]
        terms = residual * inv_prop[:, :, None] + baseline
    return weights, terms


def enumerate_expected_value(
    instance: FiniteInstance, policy: Policy, model: PayoffModel, kind: str
) -> float:
    """Exact expectation of a single estimator term, by full enumeration."""
    weights, terms = _term_table(instance, policy, model, kind)
    return math.fsum((weights * terms).ravel())


def enumerate_variance(
    instance: FiniteInstance, policy: Policy, model: PayoffModel, kind: str
) -> float:
    """Exact variance of a single estimator term, via E[T^2] - E[T]^2."""
    weights, terms = _term_table(instance, policy, model, kind)
    first = math.fsum((weights * terms).ravel())
    second = math.fsum((weights * terms * terms).ravel())
    # Clamp the roundoff-scale negatives that exact-zero variances produce.
    return max(second - first * first, 0.0)


def enumerate_dataset_moments(
    instance: FiniteInstance, policy: Policy, model: PayoffModel, kind: str, n: int
) -> tuple[float, float]:
    """Mean and variance of the size-``n`` dataset estimate (IID scaling)."""
    if n < 1:
        raise InputError(f"n must be >= 1, got {n}")
    return (
        enumerate_expected_value(instance, policy, model, kind),
        enumerate_variance(instance, policy, model, kind) / n,
    )


def sample_logged_dataset(
    instance: FiniteInstance, n: int, rng: np.random.Generator
) -> LoggedDataset:
    """Draw ``n`` logged records from the instance's generative process.

    Contexts follow the context distribution, actions the true logging
    probabilities, rewards the per-(context, action) atom distributions;
    each record carries the modeled propensity of its action.
    """
    if n < 1:
        raise InputError(f"n must be >= 1, got {n}")
    m, k, atoms = instance.reward_values.shape
    ctx_idx = rng.choice(m, size=n, p=instance.context_probs)
    # Inverse-CDF draws along rows keep this fully vectorized; the clip
    # guards against cumulative sums rounding to just under 1.
    cum_actions = np.cumsum(instance.logging[ctx_idx], axis=1)
    actions = np.minimum((rng.random((n, 1)) > cum_actions).sum(axis=1), k - 1)
    cum_atoms = np.cumsum(instance.reward_probs[ctx_idx, actions], axis=1)
    atom_idx = np.minimum((rng.random((n, 1)) > cum_atoms).sum(axis=1), atoms - 1)
    payoffs = instance.reward_values[ctx_idx, actions, atom_idx]
    props = instance.logged_propensities[ctx_idx, actions]
    return LoggedDataset(instance.contexts[ctx_idx], actions, payoffs, props, k)


# ---------------------------------------------------------------------------
# Instance text format
#
#   k 2
#   context <prob> : <d feature values>       (one line per context, in order)
#   logging <k probabilities>                 (i-th line belongs to context i)
#   propensity <k modeled probabilities>      (same alignment)
#   reward <ctx> <action> : v[@p] v[@p] ...   (atoms; @p omitted means prob 1)
#   policy <d weights>                        (one line per action)
#   model <d weights>                         (one line per action)
#
# '#' starts a comment; blank lines are ignored.
# ---------------------------------------------------------------------------


def load_instance_file(path) -> tuple[FiniteInstance, Policy, PayoffModel]:
    """Parse an instance file, returning the environment, policy and model."""
    k = None
    ctx_probs: list[float] = []
    ctx_rows: list[list[float]] = []
    logging_rows: list[list[float]] = []
    prop_rows: list[list[float]] = []
    policy_rows: list[list[float]] = []
    model_rows: list[list[float]] = []
    reward_entries: dict[tuple[int, int], list[tuple[float, float]]] = {}

    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            try:
                key, rest = line.split(None, 1)
            except ValueError:
                raise ParseError(f"expected 'key values', got {line!r}", lineno)
            try:
                if key == "k":
                    k = int(rest)
                elif key == "context":
                    prob, _, feats = rest.partition(":")
                    ctx_probs.append(float(prob))
                    ctx_rows.append([float(t) for t in feats.split()])
                elif key == "logging":
                    logging_rows.append([float(t) for t in rest.split()])
                elif key == "propensity":
                    prop_rows.append([float(t) for t in rest.split()])
                elif key == "policy":
                    policy_rows.append([float(t) for t in rest.split()])
                elif key == "model":
                    model_rows.append([float(t) for t in rest.split()])
                elif key == "reward":
                    head, _, atoms_part = rest.partition(":")
                    ci_s, a_s = head.split()
                    atoms = []
                    for tok in atoms_part.split():
                        v, _, p = tok.partition("@")
                        atoms.append((float(v), float(p) if p else 1.0))
                    if not atoms:
                        raise ValueError("reward line needs at least one atom")
                    reward_entries[(int(ci_s), int(a_s))] = atoms
                else:
                    raise ValueError(f"unknown key {key!r}")
            except ParseError:
                raise
            except ValueError as exc:
                raise ParseError(str(exc), lineno) from exc

    if k is None:
        raise ParseError("missing 'k' line")
    m = len(ctx_rows)
    if m == 0:
        raise ParseError("no 'context' lines")
    for name, rows, want in (
        ("logging", logging_rows, m),
        ("propensity", prop_rows, m),
        ("policy", policy_rows, k),
        ("model", model_rows, k),
    ):
        if len(rows) != want:
            raise ParseError(f"expected {want} '{name}' lines, found {len(rows)}")

    n_atoms = max((len(v) for v in reward_entries.values()), default=0)
    missing = [(i, a) for i in range(m) for a in range(k) if (i, a) not in reward_entries]
    if missing:
        raise ParseError(f"missing 'reward' lines for (context, action) pairs {missing}")
    values = np.zeros((m, k, n_atoms))
    probs = np.zeros((m, k, n_atoms))
    for (i, a), atoms in reward_entries.items():
        if not (0 <= i < m and 0 <= a < k):
            raise ParseError(f"reward index ({i}, {a}) out of range")
        for j, (v, p) in enumerate(atoms):
            values[i, a, j] = v
            probs[i, a, j] = p

    instance = FiniteInstance(
        contexts=np.array(ctx_rows, dtype=float),
        context_probs=np.array(ctx_probs, dtype=float),
        k=k,
        reward_values=values,
        reward_probs=probs,
        logging=np.array(logging_rows, dtype=float),
        logged_propensities=np.array(prop_rows, dtype=float),
    )
    return instance, Policy(np.array(policy_rows)), PayoffModel(np.array(model_rows))
