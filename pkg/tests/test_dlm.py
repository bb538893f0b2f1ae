import numpy as np
import pytest

from banditope.core import CostVectorExample, Policy, stack_cost_examples, true_policy_value
from banditope.dlm import (
    DlmConfig,
    _batch_delta,
    _run_restart,
    dlm_train,
    dlm_update,
    select_pair,
)
from banditope.errors import InputError


def make_examples(rng, n, k, d, losses=None):
    X = rng.normal(size=(n, d))
    L = rng.normal(size=(n, k)) if losses is None else losses
    return [CostVectorExample(x, l) for x, l in zip(X, L)]


class TestUpdate:
    def test_matching_pair_leaves_weights_unchanged(self):
        theta = np.array([[1.0, 0.0], [0.0, 0.5]])
        # Zero losses: both argmaxes coincide.
        ex = CostVectorExample(np.array([2.0, 1.0]), np.zeros(2))
        out = dlm_update(theta, ex, eta=0.5, epsilon=0.1)
        assert np.array_equal(out, theta)

    def test_hand_worked_two_class_step(self):
        # Scores are (0, 0); loss-adjusted scores are (-0.1, 0), so the
        # towards-better action is 1 and the predicted action is 0.
        theta = np.zeros((2, 1))
        ex = CostVectorExample(np.array([1.0]), np.array([1.0, 0.0]))
        out = dlm_update(theta, ex, eta=0.5, epsilon=0.1)
        assert out.tolist() == [[-0.5], [0.5]]

    def test_loss_scaling_with_compensating_epsilon(self):
        rng = np.random.default_rng(0)
        theta = rng.normal(size=(3, 2))
        x = rng.normal(size=2)
        losses = rng.normal(size=3)
        c = 7.0
        a = select_pair(theta, x, losses, epsilon=0.2)
        b = select_pair(theta, x, c * losses, epsilon=0.2 / c)
        assert a == b

    def test_dimension_mismatch(self):
        ex = CostVectorExample(np.array([1.0, 2.0]), np.zeros(2))
        with pytest.raises(InputError):
            dlm_update(np.zeros((2, 3)), ex, 0.1, 0.1)
        with pytest.raises(InputError):
            dlm_update(np.zeros((3, 2)), ex, 0.1, 0.1)

    def test_positive_rates_required(self):
        ex = CostVectorExample(np.array([1.0]), np.zeros(2))
        with pytest.raises(InputError):
            dlm_update(np.zeros((2, 1)), ex, eta=0.0, epsilon=0.1)


class TestBatchDelta:
    def test_matches_sum_of_single_updates_on_integers(self):
        # Integer contexts make single-step and sorted-batch sums exact.
        rng = np.random.default_rng(1)
        n, k, d = 50, 4, 3
        X = rng.integers(-5, 6, size=(n, d)).astype(float)
        L = rng.integers(0, 2, size=(n, k)).astype(float)
        theta = rng.integers(-3, 4, size=(k, d)).astype(float)
        scores = X @ theta.T
        a2 = np.argmax(scores, axis=1)
        a1 = np.argmax(scores - 0.5 * L, axis=1)
        delta = _batch_delta(X, a1, a2, k)

        expected = np.zeros((k, d))
        for i in range(n):
            if a1[i] != a2[i]:
                expected[a1[i]] += X[i]
                expected[a2[i]] -= X[i]
        assert np.array_equal(delta, expected)

    def test_bitwise_permutation_invariance(self):
        rng = np.random.default_rng(2)
        n, k, d = 200, 5, 4
        X = rng.normal(size=(n, d))
        a1 = rng.integers(k, size=n)
        a2 = rng.integers(k, size=n)
        perm = rng.permutation(n)
        direct = _batch_delta(X, a1, a2, k)
        shuffled = _batch_delta(X[perm], a1[perm], a2[perm], k)
        assert np.array_equal(direct, shuffled)


class TestTrain:
    def test_separable_problem_reaches_zero_loss(self):
        # Two well-separated clusters with 0/1 losses.
        rng = np.random.default_rng(3)
        n = 40
        X = np.vstack([
            rng.normal((5.0, 0.0), 0.2, size=(n, 2)),
            rng.normal((-5.0, 0.0), 0.2, size=(n, 2)),
        ])
        labels = np.array([0] * n + [1] * n)
        L = np.ones((2 * n, 2))
        L[np.arange(2 * n), labels] = 0.0
        examples = [CostVectorExample(x, l) for x, l in zip(X, L)]
        policy = dlm_train(examples, DlmConfig(restarts=3, max_iterations=200),
                           np.random.default_rng(0))
        assert true_policy_value(examples, policy) == 0.0

    def test_bit_reproducible_with_fixed_seed(self):
        rng = np.random.default_rng(4)
        examples = make_examples(rng, 30, 3, 2)
        cfg = DlmConfig(restarts=1, max_iterations=50)
        w1 = dlm_train(examples, cfg, np.random.default_rng(11)).weights
        w2 = dlm_train(examples, cfg, np.random.default_rng(11)).weights
        assert np.array_equal(w1, w2)

    def test_training_is_permutation_invariant(self):
        rng = np.random.default_rng(5)
        examples = make_examples(rng, 60, 4, 3)
        cfg = DlmConfig(restarts=2, max_iterations=80)
        w1 = dlm_train(examples, cfg, np.random.default_rng(9)).weights
        perm = np.random.default_rng(1).permutation(len(examples))
        w2 = dlm_train([examples[i] for i in perm], cfg, np.random.default_rng(9)).weights
        assert np.array_equal(w1, w2)

    def test_returned_restart_minimizes_training_loss(self):
        rng = np.random.default_rng(6)
        examples = make_examples(rng, 50, 3, 3)
        X, L = stack_cost_examples(examples)
        cfg = DlmConfig(restarts=6, max_iterations=60)

        best = dlm_train(examples, cfg, np.random.default_rng(21))
        best_loss = true_policy_value(examples, best)
        # Replay the identical restart streams and compare every candidate.
        for stream in np.random.default_rng(21).spawn(cfg.restarts):
            theta, loss = _run_restart(X, L, cfg, stream)
            assert best_loss <= loss + 1e-15
            assert loss == true_policy_value(examples, Policy(theta))

    def test_empty_examples_rejected(self):
        with pytest.raises(InputError):
            dlm_train([], DlmConfig(), np.random.default_rng(0))

    def test_config_validation(self):
        with pytest.raises(InputError):
            DlmConfig(epsilon=0.0)
        with pytest.raises(InputError):
            DlmConfig(restarts=0)
