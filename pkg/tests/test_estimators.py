import math

import numpy as np
import pytest

from banditope.core import LoggedDataset, LoggedRecord, Policy
from banditope.errors import InputError
from banditope.estimators import (
    dr_term,
    estimate_dm,
    estimate_dr,
    estimate_ips,
)
from banditope.models import PayoffModel

from conftest import table_instance


class TestDrTerm:
    def test_exact_model_cancels_correction(self):
        # Model predicts 0.7 everywhere; record agrees with the policy.
        model = PayoffModel(np.array([[0.7], [0.7]]))
        policy = Policy(np.array([[1.0], [0.0]]))
        rec = LoggedRecord(np.array([1.0]), 0, 0.7, 0.3)
        assert dr_term(rec, model, policy) == pytest.approx(0.7, abs=1e-15)

    def test_mismatch_returns_baseline(self):
        model = PayoffModel(np.array([[0.4], [0.0]]))
        policy = Policy(np.array([[1.0], [0.0]]))  # picks action 0
        rec = LoggedRecord(np.array([1.0]), 1, 0.9, 0.5)
        assert dr_term(rec, model, policy) == 0.4

    def test_zero_model_reduces_to_importance_weighting(self):
        model = PayoffModel.zero(2, 1)
        policy = Policy(np.array([[1.0], [0.0]]))
        rec = LoggedRecord(np.array([1.0]), 0, 1.0, 0.5)
        assert dr_term(rec, model, policy) == 2.0


class TestEstimators:
    def _agreeing_dataset(self, n=6):
        # Every record logs the policy's action with deterministic payoff 0.8.
        X = np.ones((n, 1))
        return LoggedDataset(X, np.zeros(n, dtype=int), np.full(n, 0.8),
                             np.full(n, 0.4), k=2)

    def test_zero_variance_case(self):
        data = self._agreeing_dataset()
        policy = Policy(np.array([[1.0], [0.0]]))
        model = PayoffModel(np.array([[0.8], [0.1]]))  # exact for the logged action
        report = estimate_dr(data, model, policy)
        assert report.value == pytest.approx(0.8, abs=1e-15)
        assert np.all(report.terms == report.terms[0])

    def test_zero_model_equals_ips(self):
        rng = np.random.default_rng(0)
        n, k, d = 40, 3, 2
        X = rng.normal(size=(n, d))
        data = LoggedDataset(X, rng.integers(k, size=n), rng.normal(size=n),
                             rng.uniform(0.1, 1.0, size=n), k)
        policy = Policy(rng.normal(size=(k, d)))
        dr = estimate_dr(data, PayoffModel.zero(k, d), policy)
        ips = estimate_ips(data, policy)
        assert np.array_equal(dr.terms, ips.terms)
        assert dr.value == ips.value

    def test_ips_single_record(self):
        data = LoggedDataset(np.ones((1, 1)), [0], [1.0], [0.5], k=2)
        policy = Policy(np.array([[1.0], [0.0]]))
        assert estimate_ips(data, policy).value == 2.0

    def test_ips_degenerate_logging_is_sample_mean(self):
        rng = np.random.default_rng(1)
        payoffs = rng.normal(size=9)
        data = LoggedDataset(np.ones((9, 1)), np.zeros(9, dtype=int), payoffs,
                             np.ones(9), k=2)
        policy = Policy(np.array([[1.0], [0.0]]))
        assert estimate_ips(data, policy).value == pytest.approx(
            math.fsum(payoffs) / 9, abs=1e-15
        )

    def test_dm_constant_model(self):
        rng = np.random.default_rng(2)
        X = np.hstack([rng.normal(size=(11, 2)), np.ones((11, 1))])
        model = PayoffModel(np.array([[0.0, 0.0, 0.42], [0.0, 0.0, 0.42]]))
        policy = Policy(rng.normal(size=(2, 3)))
        report = estimate_dm(X, model, policy)
        assert report.value == pytest.approx(0.42, abs=1e-12)

    def test_dm_ignores_actions_and_payoffs(self):
        rng = np.random.default_rng(3)
        X = rng.normal(size=(8, 2))
        policy = Policy(rng.normal(size=(2, 2)))
        model = PayoffModel(rng.normal(size=(2, 2)))
        a = LoggedDataset(X, np.zeros(8, dtype=int), rng.normal(size=8),
                          np.full(8, 0.5), 2)
        b = LoggedDataset(X, np.ones(8, dtype=int), rng.normal(size=8),
                          np.full(8, 0.9), 2)
        assert estimate_dm(a, model, policy).value == estimate_dm(b, model, policy).value

    def test_empty_contexts_rejected(self):
        with pytest.raises(InputError):
            estimate_dm(np.zeros((0, 2)), PayoffModel.zero(2, 2), Policy(np.zeros((2, 2))))


class TestAgainstEnumeration:
    """Average the estimator over every realization of a one-record dataset
    (test-local nested loops) and compare with the closed-form target."""

    def _enumerate_mean(self, instance, policy, model, estimator):
        total = 0.0
        for i in range(instance.m):
            for a in range(instance.k):
                for j in range(instance.reward_values.shape[2]):
                    p_outcome = (
                        instance.context_probs[i]
                        * instance.logging[i, a]
                        * instance.reward_probs[i, a, j]
                    )
                    if p_outcome == 0.0:
                        continue
                    data = LoggedDataset(
                        instance.contexts[i][None, :], [a],
                        [instance.reward_values[i, a, j]],
                        [instance.logged_propensities[i, a]], instance.k,
                    )
                    total += p_outcome * estimator(data)
        return total

    def test_dr_realization_average_is_value_plus_bias(self):
        instance, policy, model = table_instance(
            [0.5, 0.5],
            logging=[[0.7, 0.3], [0.4, 0.6]],
            propensities=[[0.5, 0.5], [0.5, 0.5]],
            policy_actions=[0, 1],
            model_table=[[0.9, 0.4], [0.1, 0.5]],
            rewards=[[1.0, 0.2], [0.3, 0.8]],
        )
        avg = self._enumerate_mean(
            instance, policy, model, lambda d: estimate_dr(d, model, policy).value
        )
        rho = instance.expected_rewards()
        rho_hat = model.predict_matrix(instance.contexts)
        pi = policy.apply_matrix(instance.contexts)
        value = bias = 0.0
        for i in range(2):
            a = pi[i]
            delta = rho_hat[i, a] - rho[i, a]
            delta_mult = 1.0 - instance.logging[i, a] / instance.logged_propensities[i, a]
            value += instance.context_probs[i] * rho[i, a]
            bias += instance.context_probs[i] * delta * delta_mult
        assert avg == pytest.approx(value + bias, abs=1e-12)

    def test_ips_unbiased_under_uniform_logging(self):
        instance, policy, model = table_instance(
            [0.3, 0.7],
            logging=[[0.5, 0.5], [0.5, 0.5]],
            propensities=[[0.5, 0.5], [0.5, 0.5]],
            policy_actions=[1, 0],
            model_table=[[0.0, 0.0], [0.0, 0.0]],
            rewards=[[0.25, 0.75], [0.6, 0.1]],
        )
        avg = self._enumerate_mean(
            instance, policy, model, lambda d: estimate_ips(d, policy).value
        )
        assert avg == pytest.approx(instance.policy_value(policy), abs=1e-12)

    def test_dm_with_uniform_additive_error(self):
        instance, policy, model = table_instance(
            [0.5, 0.5],
            logging=[[0.5, 0.5], [0.5, 0.5]],
            propensities=[[0.5, 0.5], [0.5, 0.5]],
            policy_actions=[0, 1],
            model_table=[[1.1, 0.3], [0.4, 0.9]],  # true means + 0.1 everywhere
            rewards=[[1.0, 0.2], [0.3, 0.8]],
        )
        report = estimate_dm(instance.contexts, model, policy)
        # Both contexts equally likely, so the plain mean is the estimate.
        assert report.value == pytest.approx(instance.policy_value(policy) + 0.1, abs=1e-12)


class TestAlgebraicIdentities:
    def _skeleton(self, rng, n=25, k=3, d=2):
        X = rng.normal(size=(n, d))
        actions = rng.integers(k, size=n)
        props = rng.uniform(0.2, 1.0, size=n)
        return X, actions, props

    def test_ips_linear_in_payoffs(self):
        rng = np.random.default_rng(4)
        X, actions, props = self._skeleton(rng)
        policy = Policy(rng.normal(size=(3, 2)))
        r1, r2 = rng.normal(size=25), rng.normal(size=25)
        alpha, beta = 1.7, -0.4
        combo = estimate_ips(LoggedDataset(X, actions, alpha * r1 + beta * r2, props, 3), policy)
        v1 = estimate_ips(LoggedDataset(X, actions, r1, props, 3), policy).value
        v2 = estimate_ips(LoggedDataset(X, actions, r2, props, 3), policy).value
        assert combo.value == pytest.approx(alpha * v1 + beta * v2, rel=1e-10, abs=1e-12)

    def test_dr_affine_in_payoffs_and_model(self):
        rng = np.random.default_rng(5)
        X, actions, props = self._skeleton(rng)
        policy = Policy(rng.normal(size=(3, 2)))
        model = PayoffModel(rng.normal(size=(3, 2)))
        r = rng.normal(size=25)
        shift = 0.6
        v = estimate_dr(LoggedDataset(X, actions, r, props, 3), model, policy).value
        v_shifted = estimate_dr(
            LoggedDataset(X, actions, r + shift, props, 3), model, policy
        ).value
        # Payoff shift propagates through the importance-weighted residual.
        X_, A_, P_ = X, actions, props
        pi = policy.apply_matrix(X_)
        match = (A_ == pi) / P_
        expected = v + shift * math.fsum(match) / len(match)
        assert v_shifted == pytest.approx(expected, rel=1e-10, abs=1e-12)

    def test_dr_minus_ips_identity_termwise(self):
        rng = np.random.default_rng(6)
        X, actions, props = self._skeleton(rng)
        policy = Policy(rng.normal(size=(3, 2)))
        model = PayoffModel(rng.normal(size=(3, 2)))
        data = LoggedDataset(X, actions, rng.normal(size=25), props, 3)
        dr = estimate_dr(data, model, policy).terms
        ips = estimate_ips(data, policy).terms
        pi = policy.apply_matrix(X)
        pred = model.predict_matrix(X)
        idx = np.arange(len(X))
        correction = pred[idx, pi] - pred[idx, actions] * (actions == pi) / props
        assert np.allclose(dr - ips, correction, rtol=1e-10, atol=1e-12)

    def test_value_is_mean_of_terms(self):
        rng = np.random.default_rng(7)
        X, actions, props = self._skeleton(rng, n=101)
        policy = Policy(rng.normal(size=(3, 2)))
        data = LoggedDataset(X, actions, rng.normal(size=101), props, 3)
        for report in (
            estimate_ips(data, policy),
            estimate_dr(data, PayoffModel(rng.normal(size=(3, 2))), policy),
            estimate_dm(data, PayoffModel(rng.normal(size=(3, 2))), policy),
        ):
            assert report.n == 101
            assert abs(report.value - np.mean(report.terms)) <= 1e-12 * max(
                1.0, abs(report.value)
            )

    def test_propensity_floor(self):
        data = LoggedDataset(np.ones((1, 1)), [0], [1.0], [0.01], k=2)
        policy = Policy(np.array([[1.0], [0.0]]))
        assert estimate_ips(data, policy).value == pytest.approx(100.0)
        assert estimate_ips(data, policy, propensity_floor=0.1).value == pytest.approx(10.0)
        with pytest.raises(InputError):
            estimate_ips(data, policy, propensity_floor=1.5)
