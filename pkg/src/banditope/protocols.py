"""The three end-to-end experimental protocols and their reports.

* Evaluation: train a policy on one fully labeled half of a multiclass
  dataset, treat its error on the other half as ground truth, then
  repeatedly hide all but one uniformly revealed loss per test example
  and measure how well DM / IPS / DR recover the truth (bias and rmse
  over replicates).
* Optimization: repeatedly split, turn the training split into bandit
  data, impute complete loss vectors with IPS and DR, train cost-sensitive
  learners on the imputed vectors, and compare true test errors.
* Shift: generate (or load) a synthetic population and compare IPS and DR
  mean-visit estimates across subsample fractions.

Every stochastic step draws from a named stream of the master seed, so a
report is a pure function of (data, config, seed) and replicates can run
in any order.  Reports serialize to a four-column CSV
``dataset,subject,metric,value``; per-replicate values are available
separately for audit.
"""

import csv
import math
from dataclasses import dataclass, field, fields
from typing import Sequence

import numpy as np

from .bandit_data import impute_costs, reveal_dataset
from .core import MulticlassExample, Policy, stack_cost_examples, true_policy_value
from .datasets import cost_vectors, infer_action_count
from .dlm import DlmConfig, dlm_train
from .errors import InputError
from .estimators import estimate_dm, estimate_dr, estimate_ips
from .models import fit_ridge_full, fit_ridge_per_action
from .seeding import named_rng
from .shift import ShiftConfig, ShiftPopulation, shift_experiment, synth_population
from .trees import BinaryTreeConfig, filter_tree_predict_matrix, filter_tree_train

ESTIMATORS = ("dm", "ips", "dr")
LEARNERS = ("dlm", "ft")


@dataclass(frozen=True)
class EvalProtocolConfig:
    replicates: int = 500
    split_fraction: float = 0.5
    ridge_lambda: float = 1.0
    seed: int = 0
    dlm: DlmConfig = field(default_factory=DlmConfig)
    propensity_floor: float | None = None

    def __post_init__(self):
        if self.replicates < 1:
            raise InputError("replicates must be >= 1")
        if not (0.0 < self.split_fraction < 1.0):
            raise InputError("split_fraction must lie in (0, 1)")


@dataclass(frozen=True)
class OptProtocolConfig:
    runs: int = 30
    train_fraction: float = 0.7
    ridge_lambda: float = 1.0
    imputations: tuple[str, ...] = ("ips", "dr")
    learners: tuple[str, ...] = LEARNERS
    seed: int = 0
    dlm: DlmConfig = field(default_factory=DlmConfig)
    tree: BinaryTreeConfig = field(default_factory=BinaryTreeConfig)
    reveal_mode: str = "bandit"  # "full" bypasses hiding: no missingness

    def __post_init__(self):
        if self.runs < 1:
            raise InputError("runs must be >= 1")
        if not (0.0 < self.train_fraction < 1.0):
            raise InputError("train_fraction must lie in (0, 1)")
        if self.reveal_mode not in ("bandit", "full"):
            raise InputError("reveal_mode must be 'bandit' or 'full'")
        for m in self.imputations:
            if m not in ("ips", "dr"):
                raise InputError(f"unknown imputation {m!r}")
        for l in self.learners:
            if l not in LEARNERS:
                raise InputError(f"unknown learner {l!r}")


@dataclass(frozen=True)
class EvalReport:
    """Per-estimator bias and rmse across reveal replicates."""

    dataset: str
    truth: float
    estimates: dict[str, np.ndarray]  # estimator -> per-replicate values
    bias: dict[str, float]
    rmse: dict[str, float]
    std: dict[str, float]


@dataclass(frozen=True)
class OptReport:
    """True test errors of each (learner, imputation) pair across runs."""

    dataset: str
    errors: dict[tuple[str, str], np.ndarray]  # (learner, imputation) -> per-run
    mean_error: dict[tuple[str, str], float]
    std_error: dict[tuple[str, str], float]


@dataclass(frozen=True)
class ShiftReport:
    """Estimation error summaries per (method, subsample fraction)."""

    dataset: str
    fractions: tuple[float, ...]
    errors: dict[str, list[np.ndarray]]  # method -> per-fraction error arrays
    bias: dict[str, np.ndarray]
    std: dict[str, np.ndarray]
    rmse: dict[str, np.ndarray]


def _split_indices(n: int, fraction: float, rng: np.random.Generator):
    """Shuffle 0..n-1 and split at ``round(n * fraction)`` (both parts nonempty)."""
    order = rng.permutation(n)
    cut = min(max(int(round(n * fraction)), 1), n - 1)
    return order[:cut], order[cut:]


def _mean(values) -> float:
    return math.fsum(values) / len(values)


def _summary(errors: np.ndarray) -> tuple[float, float, float]:
    """(bias, std, rmse) of an error array, computed with compensated sums."""
    bias = _mean(errors)
    rmse = math.sqrt(_mean(errors * errors))
    var = max(_mean(errors * errors) - bias * bias, 0.0)
    return bias, math.sqrt(var), rmse


def run_eval_protocol(
    examples: Sequence[MulticlassExample],
    config: EvalProtocolConfig,
    dataset_name: str = "data",
) -> EvalReport:
    """Policy-evaluation protocol: one split, one policy, many reveals."""
    k = infer_action_count(examples)
    if len(examples) < 2 * k:
        raise InputError(f"need at least {2 * k} examples for {k} classes")
    train_idx, test_idx = _split_indices(
        len(examples), config.split_fraction, named_rng(config.seed, "eval-split")
    )
    train_cv = cost_vectors([examples[i] for i in train_idx], k)
    test_cv = cost_vectors([examples[i] for i in test_idx], k)

    policy = dlm_train(train_cv, config.dlm, named_rng(config.seed, "eval-dlm"))
    truth = true_policy_value(test_cv, policy)

    X_train, L_train = stack_cost_examples(train_cv)
    model = fit_ridge_full(X_train, L_train, config.ridge_lambda)

    X_test, _ = stack_cost_examples(test_cv)
    # The direct method never looks at the revealed losses, so its value is
    # the same in every replicate.
    dm_value = estimate_dm(X_test, model, policy).value
    estimates = {name: np.empty(config.replicates) for name in ESTIMATORS}
    estimates["dm"][:] = dm_value
    for i in range(config.replicates):
        logged = reveal_dataset(test_cv, named_rng(config.seed, "eval-reveal", i))
        estimates["ips"][i] = estimate_ips(logged, policy, config.propensity_floor).value
        estimates["dr"][i] = estimate_dr(
            logged, model, policy, config.propensity_floor
        ).value

    bias, rmse, std = {}, {}, {}
    for name, values in estimates.items():
        b, s, r = _summary(values - truth)
        bias[name], std[name], rmse[name] = b, s, r
    return EvalReport(
        dataset=dataset_name, truth=truth, estimates=estimates,
        bias=bias, rmse=rmse, std=std,
    )


def run_opt_protocol(
    examples: Sequence[MulticlassExample],
    config: OptProtocolConfig,
    dataset_name: str = "data",
) -> OptReport:
    """Policy-optimization protocol: learn from imputed bandit losses."""
    k = infer_action_count(examples)
    if len(examples) < 2 * k:
        raise InputError(f"need at least {2 * k} examples for {k} classes")
    errors = {
        (learner, method): np.empty(config.runs)
        for learner in config.learners
        for method in config.imputations
    }
    for r in range(config.runs):
        train_idx, test_idx = _split_indices(
            len(examples), config.train_fraction, named_rng(config.seed, "opt-split", r)
        )
        train_cv = cost_vectors([examples[i] for i in train_idx], k)
        test_cv = cost_vectors([examples[i] for i in test_idx], k)
        X_test, L_test = stack_cost_examples(test_cv)

        if config.reveal_mode == "full":
            # Every loss revealed with certainty: both imputations return
            # the true vectors, so learners see fully supervised data.
            imputed_sets = {method: train_cv for method in config.imputations}
        else:
            logged = reveal_dataset(train_cv, named_rng(config.seed, "opt-reveal", r))
            model = fit_ridge_per_action(logged, config.ridge_lambda)
            records = list(logged)
            imputed_sets = {
                method: impute_costs(
                    records, k, method, model if method == "dr" else None
                )
                for method in config.imputations
            }

        for method, imputed in imputed_sets.items():
            for learner in config.learners:
                if learner == "dlm":
                    policy = dlm_train(
                        imputed, config.dlm, named_rng(config.seed, "opt-dlm", r)
                    )
                    err = true_policy_value(test_cv, policy)
                else:
                    ft = filter_tree_train(imputed, config.tree)
                    preds = filter_tree_predict_matrix(ft, X_test)
                    err = _mean(L_test[np.arange(len(L_test)), preds])
                errors[(learner, method)][r] = err

    mean_error = {key: _mean(vals) for key, vals in errors.items()}
    std_error = {key: _summary(vals)[1] for key, vals in errors.items()}
    return OptReport(
        dataset=dataset_name, errors=errors, mean_error=mean_error, std_error=std_error
    )


def run_shift_protocol(
    config: ShiftConfig,
    population: ShiftPopulation | None = None,
    dataset_name: str = "synthetic",
) -> ShiftReport:
    """Shift protocol: IPS vs DR mean estimation across subsample sizes."""
    if population is None:
        population = synth_population(config, named_rng(config.seed, "shift-pop"))
    errors: dict[str, list[np.ndarray]] = {"ips": [], "dr": []}
    for j, f in enumerate(config.fractions):
        ips_err = np.empty(config.replicates)
        dr_err = np.empty(config.replicates)
        for i in range(config.replicates):
            rng = named_rng(config.seed, f"shift-exp-{j}", i)
            ips, dr, truth = shift_experiment(
                population, f, rng, lam=config.ridge_lambda
            )
            ips_err[i] = ips - truth
            dr_err[i] = dr - truth
        errors["ips"].append(ips_err)
        errors["dr"].append(dr_err)

    bias, std, rmse = {}, {}, {}
    for method, err_list in errors.items():
        stats = [_summary(e) for e in err_list]
        bias[method] = np.array([s[0] for s in stats])
        std[method] = np.array([s[1] for s in stats])
        rmse[method] = np.array([s[2] for s in stats])
    return ShiftReport(
        dataset=dataset_name, fractions=tuple(config.fractions),
        errors=errors, bias=bias, std=std, rmse=rmse,
    )


def sign_test_pvalue(a: np.ndarray, b: np.ndarray) -> float:
    """One-sided paired sign test for "a < b" (ties dropped).

    Exact binomial tail: the probability of at least as many wins under a
    fair coin.
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.shape != b.shape:
        raise InputError("paired samples must have equal length")
    wins = int(np.sum(a < b))
    n = int(np.sum(a != b))
    if n == 0:
        return 1.0
    tail = sum(math.comb(n, j) for j in range(wins, n + 1))
    return tail / 2.0**n


# ---------------------------------------------------------------------------
# CSV emission
# ---------------------------------------------------------------------------

CSV_HEADER = ("dataset", "subject", "metric", "value")


def _fmt(v: float) -> str:
    return f"{v:.12g}"


def eval_report_rows(report: EvalReport) -> list[tuple[str, str, str, str]]:
    rows = [(report.dataset, "truth", "value", _fmt(report.truth))]
    for name in ESTIMATORS:
        rows.append((report.dataset, name, "bias", _fmt(report.bias[name])))
        rows.append((report.dataset, name, "rmse", _fmt(report.rmse[name])))
        rows.append((report.dataset, name, "std", _fmt(report.std[name])))
    return rows


def eval_audit_rows(report: EvalReport) -> list[tuple[str, str, str, str]]:
    rows = []
    for name in ESTIMATORS:
        for i, v in enumerate(report.estimates[name]):
            rows.append((report.dataset, name, f"estimate[{i}]", _fmt(v)))
    return rows


def opt_report_rows(report: OptReport) -> list[tuple[str, str, str, str]]:
    rows = []
    for (learner, method), mean in sorted(report.mean_error.items()):
        subject = f"{learner}_{method}"
        rows.append((report.dataset, subject, "mean_test_error", _fmt(mean)))
        rows.append(
            (report.dataset, subject, "std_test_error",
             _fmt(report.std_error[(learner, method)]))
        )
    return rows


def opt_audit_rows(report: OptReport) -> list[tuple[str, str, str, str]]:
    rows = []
    for (learner, method), vals in sorted(report.errors.items()):
        for i, v in enumerate(vals):
            rows.append((report.dataset, f"{learner}_{method}", f"test_error[{i}]", _fmt(v)))
    return rows


def shift_report_rows(report: ShiftReport) -> list[tuple[str, str, str, str]]:
    rows = []
    for method in ("ips", "dr"):
        for j, f in enumerate(report.fractions):
            for metric, table in (("bias", report.bias), ("std", report.std),
                                  ("rmse", report.rmse)):
                rows.append(
                    (report.dataset, method, f"{metric}@{f:g}", _fmt(table[method][j]))
                )
    return rows


def write_csv(rows, stream, header=CSV_HEADER) -> None:
    writer = csv.writer(stream, lineterminator="\n")
    writer.writerow(header)
    writer.writerows(rows)


def manifest_text(kind: str, dataset: str, config) -> str:
    """Key=value run manifest for a protocol invocation (no timestamps)."""
    lines = [f"protocol={kind}", f"dataset={dataset}"]
    for f in fields(config):
        value = getattr(config, f.name)
        if callable(value):
            value = getattr(value, "__name__", repr(value))
        lines.append(f"{f.name}={value}")
    return "\n".join(lines) + "\n"
