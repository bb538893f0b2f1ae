"""Covariate-shift mean estimation on a synthetic browsing population.

Each unit of the population carries a sparse binary feature vector and a
nonnegative visit count.  Units are observed with a probability that
depends on their features: all features are projected onto the
population's first principal component, and the sampling probability is a
clamped Gaussian bump over the projection (low-projection units are far
more likely to be observed, so the observed sample is feature-biased).
An experiment subsamples a fraction of units, reveals each unit's visits
with its own probability, fits a ridge model of visits on the observed
units, and compares the importance-weighted and doubly robust estimates
of the subsample's mean visits against the exact subsample mean.

Visit counts are Poisson with a log-rate that is a fixed sparse linear
function of the features, so a linear visit model is sensible but not
exact.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from .core import LoggedDataset, Policy
from .errors import DegenerateDataError, InputError
from .estimators import estimate_dr, estimate_ips
from .models import PayoffModel, ridge_solve
from .seeding import named_rng

DEFAULT_FRACTIONS = (0.0001, 0.0005, 0.001, 0.005, 0.01, 0.05)
PROBABILITY_FLOOR = 1e-12


@dataclass(frozen=True)
class ShiftConfig:
    """Synthetic population and experiment settings.

    The default feature distribution is nearly saturated (most features
    on).  That caps the largest principal-axis projection at the all-ones
    vector, which in turn bounds the smallest sampling probability a unit
    can receive; with sparser features the right projection tail runs far
    past the Gaussian's scale and occasional astronomic importance
    weights make replicate rmse curves erratic.
    """

    population_size: int = 100_000
    feature_dimension: int = 12
    sparsity: float = 0.95
    log_rate_bias: float = 2.2
    log_rate_scale: float = 0.5
    log_rate_support: int = 6
    fractions: tuple[float, ...] = DEFAULT_FRACTIONS
    replicates: int = 100
    seed: int = 0
    ridge_lambda: float = 1.0
    probability_link: str = "pdf"  # or "cdf"; see sampling_probabilities

    def __post_init__(self):
        if self.population_size < 2 or self.feature_dimension < 1:
            raise InputError("population_size and feature_dimension must be positive")
        if not (0.0 <= self.sparsity <= 1.0):
            raise InputError("sparsity must lie in [0, 1]")
        if not all(0.0 < f <= 1.0 for f in self.fractions):
            raise InputError("fractions must lie in (0, 1]")
        if self.replicates < 1:
            raise InputError("replicates must be >= 1")
        if self.probability_link not in ("pdf", "cdf"):
            raise InputError("probability_link must be 'pdf' or 'cdf'")


@dataclass(frozen=True)
class ShiftPopulation:
    """A generated population: features, visits, sampling probabilities."""

    features: np.ndarray  # (N, d) binary, stored dense
    visits: np.ndarray  # (N,)
    probs: np.ndarray  # (N,) observation probability per unit
    axis: np.ndarray  # (d,) unit-norm principal axis

    def __post_init__(self):
        if abs(np.linalg.norm(self.axis) - 1.0) > 1e-9:
            raise InputError("principal axis must have unit norm")
        if self.probs.min() <= 0.0 or self.probs.max() > 1.0:
            raise InputError("sampling probabilities must lie in (0, 1]")
        if self.visits.min() < 0:
            raise InputError("visits must be nonnegative")

    @property
    def size(self) -> int:
        return len(self.features)


def first_principal_component(
    features: np.ndarray, tol: float = 1e-8, max_iter: int = 100_000
) -> np.ndarray:
    """Top eigenvector of the mean-centered covariance, by power iteration.

    Iterates until the Rayleigh quotient is stable to a relative ``tol``,
    then flips the sign so the largest-magnitude entry is positive.
    """
    X = np.asarray(features, dtype=float)
    if X.ndim != 2 or len(X) < 2:
        raise InputError("features must be (N, d) with N >= 2")
    centered = X - X.mean(axis=0)
    cov = centered.T @ centered / len(X)
    if not np.any(np.abs(cov) > 0):
        raise DegenerateDataError("features have zero variance in every direction")

    # Deterministic start with generic overlap: fixed-seed random direction.
    v = np.random.default_rng(0).standard_normal(cov.shape[0])
    v /= np.linalg.norm(v)
    lam = float(v @ cov @ v)
    for _ in range(max_iter):
        w = cov @ v
        norm = np.linalg.norm(w)
        if norm == 0.0:
            raise DegenerateDataError("power iteration hit the null space")
        v = w / norm
        lam_new = float(v @ cov @ v)
        if abs(lam_new - lam) <= tol * max(abs(lam_new), 1e-300):
            lam = lam_new
            break
        lam = lam_new
    pivot = int(np.argmax(np.abs(v)))
    if v[pivot] < 0:
        v = -v
    return v


def sampling_probabilities(
    projections, link: str = "pdf", floor: float = PROBABILITY_FLOOR
) -> np.ndarray:
    """Per-unit observation probabilities from principal-axis projections.

    A Gaussian is placed at ``mu = min + (mean - min) / 3`` with standard
    deviation ``(mean - min) / 4``; each unit's probability is the Gaussian
    evaluated at its projection, clamped to at most 1 and floored at
    ``floor`` so importance weights stay finite.  ``link`` selects whether
    the Gaussian is evaluated as a density (default; the clamp can bite)
    or as a cumulative distribution.
    """
    proj = np.asarray(projections, dtype=float)
    if proj.ndim != 1 or len(proj) == 0:
        raise InputError("projections must be a nonempty 1-D array")
    lo = proj.min()
    mean = proj.mean()
    if not mean > lo:
        raise DegenerateDataError("projections are constant; mean must exceed minimum")
    mu = lo + (mean - lo) / 3.0
    sigma = (mean - lo) / 4.0
    z = (proj - mu) / sigma
    if link == "pdf":
        values = np.exp(-0.5 * z * z) / (sigma * math.sqrt(2.0 * math.pi))
    elif link == "cdf":
        values = np.array([0.5 * (1.0 + math.erf(t / math.sqrt(2.0))) for t in z])
    else:
        raise InputError("link must be 'pdf' or 'cdf'")
    return np.clip(values, floor, 1.0)


def visit_coefficients(config: ShiftConfig) -> tuple[float, np.ndarray]:
    """The fixed sparse log-rate function implied by the config seed."""
    rng = named_rng(config.seed, "shift-visit-link")
    beta = np.zeros(config.feature_dimension)
    support = min(config.log_rate_support, config.feature_dimension)
    coords = rng.choice(config.feature_dimension, size=support, replace=False)
    beta[coords] = rng.normal(0.0, config.log_rate_scale, size=support)
    return config.log_rate_bias, beta


def expected_mean_visits(config: ShiftConfig) -> float:
    """Analytic population mean of visits under the generative link.

    Features are independent Bernoulli(sparsity) and visits are Poisson
    with rate ``exp(bias + beta . x)``, so the mean factorizes over
    coordinates.
    """
    bias, beta = visit_coefficients(config)
    s = config.sparsity
    return math.exp(bias) * float(np.prod(1.0 - s + s * np.exp(beta)))


def synth_population(config: ShiftConfig, rng: np.random.Generator) -> ShiftPopulation:
    """Generate features, visits and sampling probabilities."""
    X = (rng.random((config.population_size, config.feature_dimension))
         < config.sparsity).astype(float)
    bias, beta = visit_coefficients(config)
    rates = np.exp(bias + X @ beta)
    visits = rng.poisson(rates).astype(float)
    axis = first_principal_component(X)
    probs = sampling_probabilities(X @ axis, link=config.probability_link)
    return ShiftPopulation(features=X, visits=visits, probs=probs, axis=axis)


def _observe_policy(d: int) -> Policy:
    # Action 1 = "observe the unit"; a constant-positive bias feature is
    # appended to every context, so weight on it makes action 1 always win.
    w = np.zeros((2, d + 1))
    w[1, d] = 1.0
    return Policy(w)


def shift_experiment(
    pop: ShiftPopulation,
    f: float,
    rng: np.random.Generator,
    lam: float = 1.0,
) -> tuple[float, float, float]:
    """One subsample-and-estimate replicate.

    Subsamples ``ceil(f * N)`` units uniformly, observes each unit's
    visits with its own probability, fits a ridge visit model on the
    observed units, and returns ``(ips, dr, truth)`` where truth is the
    exact subsample mean of visits.
    """
    if not (0.0 < f <= 1.0):
        raise InputError(f"fraction must be in (0, 1], got {f}")
    n = math.ceil(f * pop.size)
    if n < 1:
        raise InputError("subsample is empty")
    take = rng.choice(pop.size, size=n, replace=False)
    X = pop.features[take]
    visits = pop.visits[take]
    p_obs = pop.probs[take]
    observed = rng.random(n) < p_obs

    w = ridge_solve(X[observed], visits[observed], lam)
    Xb = np.hstack([X, np.ones((n, 1))])
    model = PayoffModel(np.vstack([np.zeros(X.shape[1] + 1), np.append(w, 0.0)]), lam)
    policy = _observe_policy(X.shape[1])

    actions = observed.astype(int)
    payoffs = np.where(observed, visits, 0.0)
    propensities = np.where(observed, p_obs, np.maximum(1.0 - p_obs, PROBABILITY_FLOOR))
    data = LoggedDataset(Xb, actions, payoffs, propensities, k=2)

    ips = estimate_ips(data, policy).value
    dr = estimate_dr(data, model, policy).value
    truth = math.fsum(visits) / n
    return ips, dr, truth


def export_population_csv(pop: ShiftPopulation, path) -> None:
    """Write the population in the sparse text format (see module docs)."""
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(f"# shift population d={pop.features.shape[1]}\n")
        fh.write("unit,feature_indices,visits,probability\n")
        for i in range(pop.size):
            idxs = " ".join(str(j) for j in np.nonzero(pop.features[i])[0])
            fh.write(f"{i},{idxs},{pop.visits[i]:.12g},{pop.probs[i]:.17g}\n")


def load_population_csv(path) -> ShiftPopulation:
    """Read a population written by :func:`export_population_csv`."""
    from .errors import ParseError

    d = None
    rows: list[tuple[list[int], float, float]] = []
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line:
                continue
            if line.startswith("#"):
                for tok in line.split():
                    if tok.startswith("d="):
                        d = int(tok[2:])
                continue
            if line.startswith("unit,"):
                continue
            parts = line.split(",")
            if len(parts) != 4:
                raise ParseError(f"expected 4 columns, got {len(parts)}", lineno)
            try:
                idxs = [int(t) for t in parts[1].split()]
                rows.append((idxs, float(parts[2]), float(parts[3])))
            except ValueError as exc:
                raise ParseError(str(exc), lineno) from exc
    if d is None or not rows:
        raise ParseError("population file lacks the dimension header or any rows")
    X = np.zeros((len(rows), d))
    visits = np.zeros(len(rows))
    probs = np.zeros(len(rows))
    for i, (idxs, v, p) in enumerate(rows):
        X[i, idxs] = 1.0
        visits[i] = v
        probs[i] = p
    return ShiftPopulation(
        features=X, visits=visits, probs=probs, axis=first_principal_component(X)
    )
