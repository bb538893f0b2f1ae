"""Offline evaluation and optimization of contextual-bandit policies.

The package estimates the value of a deterministic policy from logged
bandit interactions (direct method, inverse propensity scoring, doubly
robust), verifies the estimators' exact bias/variance behavior against
enumeration on finite environments, learns policies from imputed
cost-sensitive losses, and reproduces a covariate-shift mean-estimation
study on synthetic populations.
"""

from .bandit_data import impute_costs, reveal_dataset, reveal_one, to_cost_sensitive
from .core import (
    CostVectorExample,
    LoggedDataset,
    LoggedRecord,
    MulticlassExample,
    Policy,
    policy_apply,
    true_policy_value,
)
from .diagnostics import ModelDeviations, VarianceDecomposition, theoretical_bias, theoretical_variance
from .dlm import DlmConfig, dlm_train, dlm_update
from .errors import (
    DegenerateDataError,
    InputError,
    ParseError,
    PropensityError,
    SingularSystemError,
)
from .estimators import EstimateReport, dr_term, estimate_dm, estimate_dr, estimate_ips
from .models import (
    PayoffModel,
    PropensityModel,
    fit_ridge_full,
    fit_ridge_per_action,
    predict_payoff,
    uniform_propensity,
)
from .oracle import (
    FiniteInstance,
    enumerate_dataset_moments,
    enumerate_expected_value,
    enumerate_variance,
    load_instance_file,
    sample_logged_dataset,
)
from .protocols import (
    EvalProtocolConfig,
    EvalReport,
    OptProtocolConfig,
    OptReport,
    ShiftReport,
    run_eval_protocol,
    run_opt_protocol,
    run_shift_protocol,
    sign_test_pvalue,
)
from .shift import (
    ShiftConfig,
    ShiftPopulation,
    first_principal_component,
    sampling_probabilities,
    shift_experiment,
    synth_population,
)
from .trees import (
    BinaryTreeClassifier,
    BinaryTreeConfig,
    FilterTreeModel,
    binary_tree_learn,
    filter_tree_predict,
    filter_tree_train,
)

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
