"""Shared fixtures: hand-built finite instances and dataset files.

Instances use one-hot contexts, so a linear policy/model can realize any
action table or payoff table exactly: with context ``e_i`` the score of
action ``a`` is just ``weights[a, i]``.
"""

from pathlib import Path

import numpy as np
import pytest

from banditope.core import MulticlassExample, Policy
from banditope.datasets import DATASET_SHAPES, load_csv_dataset, synthetic_dataset, write_dataset_csv
from banditope.models import PayoffModel
from banditope.oracle import FiniteInstance

DATA_DIR = Path(__file__).resolve().parent.parent / "data"


def table_instance(
    ctx_probs,
    logging,
    propensities,
    policy_actions,
    model_table,
    rewards=None,
    atoms=None,
):
    """Build (instance, policy, model) from explicit tables.

    ``rewards`` is a deterministic (m, k) table; ``atoms`` instead gives
    ``atoms[i][a] = [(value, prob), ...]`` for stochastic rewards.
    ``policy_actions`` lists the action the policy must take per context;
    ``model_table[i][a]`` is the modeled payoff.
    """
    ctx_probs = np.asarray(ctx_probs, dtype=float)
    logging = np.asarray(logging, dtype=float)
    m, k = logging.shape
    contexts = np.eye(m)

    if atoms is None:
        rewards = np.asarray(rewards, dtype=float)
        values = rewards[:, :, None]
        probs = np.ones((m, k, 1))
    else:
        width = max(len(atoms[i][a]) for i in range(m) for a in range(k))
        values = np.zeros((m, k, width))
        probs = np.zeros((m, k, width))
        for i in range(m):
            for a in range(k):
                for j, (v, q) in enumerate(atoms[i][a]):
                    values[i, a, j] = v
                    probs[i, a, j] = q

    instance = FiniteInstance(
        contexts=contexts,
        context_probs=ctx_probs,
        k=k,
        reward_values=values,
        reward_probs=probs,
        logging=logging,
        logged_propensities=np.asarray(propensities, dtype=float),
    )
    policy_w = np.zeros((k, m))
    for i, a in enumerate(policy_actions):
        policy_w[a, i] = 1.0
    model_w = np.asarray(model_table, dtype=float).T.copy()
    return instance, Policy(policy_w), PayoffModel(model_w)


def with_exact_propensities(instance: FiniteInstance) -> FiniteInstance:
    """Same instance with modeled propensities equal to the truth."""
    return FiniteInstance(
        contexts=instance.contexts,
        context_probs=instance.context_probs,
        k=instance.k,
        reward_values=instance.reward_values,
        reward_probs=instance.reward_probs,
        logging=instance.logging,
        logged_propensities=instance.logging.copy(),
    )


def exact_model(instance: FiniteInstance) -> PayoffModel:
    """Payoff model that reproduces the instance's true means exactly.

    Valid only for one-hot-context instances, which all suite instances are.
    """
    return PayoffModel(instance.expected_rewards().T.copy())


def suite_instances() -> list[tuple[str, FiniteInstance, Policy, PayoffModel]]:
    """Hand-built battery spanning deterministic/stochastic rewards and
    every combination of exact/misspecified payoff and propensity models."""
    out = []

    det_rewards = [[1.0, 0.2], [0.3, 0.8]]
    det_logging = [[0.7, 0.3], [0.4, 0.6]]
    uniform2 = [[0.5, 0.5], [0.5, 0.5]]

    out.append(
        ("det_exact_exact",)
        + table_instance(
            [0.5, 0.5], det_logging, det_logging, [0, 1], det_rewards, rewards=det_rewards
        )
    )
    out.append(
        ("det_model_off",)
        + table_instance(
            [0.5, 0.5], det_logging, det_logging, [0, 1], [[0.9, 0.4], [0.1, 0.5]],
            rewards=det_rewards,
        )
    )
    out.append(
        ("det_props_off",)
        + table_instance(
            [0.5, 0.5], det_logging, uniform2, [0, 1], det_rewards, rewards=det_rewards
        )
    )
    out.append(
        ("det_both_off",)
        + table_instance(
            [0.5, 0.5], det_logging, uniform2, [0, 1], [[0.9, 0.4], [0.1, 0.5]],
            rewards=det_rewards,
        )
    )

    bern = [
        [[(0.0, 0.5), (1.0, 0.5)], [(0.2, 0.7), (0.9, 0.3)]],
        [[(0.1, 1.0)], [(0.0, 0.25), (0.5, 0.5), (1.0, 0.25)]],
    ]
    bern_rho = [[0.5, 0.41], [0.1, 0.5]]
    out.append(
        ("stoch_exact_exact",)
        + table_instance([0.25, 0.75], det_logging, det_logging, [0, 1], bern_rho, atoms=bern)
    )
    out.append(
        ("stoch_model_off",)
        + table_instance(
            [0.25, 0.75], det_logging, det_logging, [0, 1], [[0.8, 0.0], [0.3, 0.9]],
            atoms=bern,
        )
    )
    out.append(
        ("stoch_props_off",)
        + table_instance([0.25, 0.75], det_logging, uniform2, [0, 1], bern_rho, atoms=bern)
    )
    out.append(
        ("stoch_both_off",)
        + table_instance(
            [0.25, 0.75], det_logging, uniform2, [1, 0], [[0.8, 0.0], [0.3, 0.9]],
            atoms=bern,
        )
    )

    # Three contexts, three actions, skewed context distribution.
    logging3 = [[0.2, 0.5, 0.3], [0.6, 0.2, 0.2], [1 / 3, 1 / 3, 1 / 3]]
    props3 = [[0.3, 0.4, 0.3], [0.5, 0.25, 0.25], [0.4, 0.4, 0.2]]
    atoms3 = [
        [[(0.0, 0.4), (1.0, 0.6)], [(0.5, 1.0)], [(0.2, 0.5), (0.8, 0.5)]],
        [[(1.0, 1.0)], [(0.0, 0.9), (10.0, 0.1)], [(0.3, 1.0)]],
        [[(0.25, 0.8), (0.75, 0.2)], [(0.6, 1.0)], [(0.0, 0.5), (0.4, 0.5)]],
    ]
    model3 = [[0.5, 0.5, 0.4], [1.2, 0.8, 0.4], [0.4, 0.7, 0.3]]
    out.append(
        ("three_way",)
        + table_instance([0.6, 0.3, 0.1], logging3, props3, [1, 0, 2], model3, atoms=atoms3)
    )

    # The policy's action is logged with certainty in both contexts, so the
    # importance penalty vanishes exactly.
    corner_logging = [[1.0, 0.0], [0.0, 1.0]]
    corner_props = [[1.0, 0.5], [0.5, 0.5]]
    out.append(
        ("always_logged",)
        + table_instance(
            [0.5, 0.5], corner_logging, corner_props, [0, 1],
            [[0.7, 0.1], [0.2, 0.6]], rewards=[[0.9, 0.3], [0.4, 0.5]],
        )
    )

    # Uniform logging over four actions, exact propensities.
    m, k = 3, 4
    rng = np.random.default_rng(424242)
    logging4 = np.full((m, k), 1.0 / k)
    rewards4 = rng.random((m, k)).round(3)
    model4 = rng.random((m, k)).round(3)
    out.append(
        ("uniform_four",)
        + table_instance(
            [0.2, 0.3, 0.5], logging4, logging4, [2, 0, 3], model4, rewards=rewards4
        )
    )

    # Heavier propensity misspecification with a nonuniform true logger.
    out.append(
        ("strong_shift",)
        + table_instance(
            [0.4, 0.6],
            [[0.9, 0.1], [0.15, 0.85]],
            [[0.45, 0.55], [0.6, 0.4]],
            [1, 0],
            [[0.3, 0.9], [0.55, 0.2]],
            rewards=[[0.1, 1.0], [0.7, 0.05]],
        )
    )
    return out


def no_overlap_instance():
    """The policy's action is never logged in one context.

    No estimator can be unbiased here without an exact payoff model, but
    the closed-form bias/variance expressions must still agree exactly
    with enumeration (the multiplicative deviation takes its limit value 1
    where the action cannot occur).
    """
    return table_instance(
        [0.5, 0.5],
        logging=[[1.0, 0.0], [0.0, 1.0]],
        propensities=[[1.0, 0.5], [0.5, 0.5]],
        policy_actions=[0, 0],
        model_table=[[0.7, 0.1], [0.2, 0.6]],
        rewards=[[0.9, 0.3], [0.4, 0.5]],
    )


@pytest.fixture(scope="session")
def instance_suite():
    return suite_instances()


@pytest.fixture(scope="session")
def dataset_files(tmp_path_factory) -> dict[str, Path]:
    """Paths of the benchmark-shaped CSVs, regenerating any missing file."""
    paths = {}
    for name in DATASET_SHAPES:
        path = DATA_DIR / f"{name}.csv"
        if not path.exists():
            path = tmp_path_factory.mktemp("data") / f"{name}.csv"
            write_dataset_csv(synthetic_dataset(name), path)
        paths[name] = path
    return paths


@pytest.fixture(scope="session")
def loaded_datasets(dataset_files) -> dict[str, list[MulticlassExample]]:
    return {name: load_csv_dataset(path) for name, path in dataset_files.items()}
