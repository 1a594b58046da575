import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from fairmix import GateParams, gate_weight, gate_weights

from helpers import feature_matrix


class TestGateWeight:
    def test_zero_logit_is_half(self):
        params = GateParams.logistic(np.zeros(3), 0.0)
        assert gate_weight(params, np.array([1.0, -2.0, 0.5])) == 0.5

    def test_constant_one_is_pure_performance(self):
        params = GateParams.constant(1.0)
        assert gate_weight(params, np.array([3.0])) == 1.0

    def test_cancellation_and_identity(self):
        params = GateParams.logistic(np.array([1.0, -1.0]), math.log(3.0))
        assert gate_weight(params, np.array([1.0, 1.0])) == pytest.approx(0.75, abs=1e-12)

    def test_dimension_mismatch(self):
        params = GateParams.logistic(np.array([1.0, 2.0]), 0.0)
        with pytest.raises(ValueError):
            gate_weight(params, np.array([1.0]))

    def test_alpha_bounds_enforced(self):
        with pytest.raises(ValueError):
            GateParams.constant(1.5)
        with pytest.raises(ValueError):
            GateParams.constant(-0.1)

    def test_nonfinite_beta_rejected(self):
        with pytest.raises(ValueError):
            GateParams.logistic(np.array([np.inf]), 0.0)


class TestGateWeights:
    def test_constant_broadcast(self):
        X = feature_matrix(np.zeros((4, 2)))
        out = gate_weights(GateParams.constant(0.3), X)
        assert out == pytest.approx([0.3, 0.3, 0.3, 0.3])

    def test_saturated_intercept(self):
        X = feature_matrix(np.zeros((5, 2)))
        out = gate_weights(GateParams.logistic(np.zeros(2), -20.0), X)
        assert np.all(out < 1e-8)
        assert np.all(out > 0.0)

    def test_matches_rowwise_calls(self):
        X = feature_matrix([[0.5, -1.0], [2.0, 0.25]])
        params = GateParams.logistic(np.array([0.7, -0.3]), 0.1)
        batch = gate_weights(params, X)
        single = [gate_weight(params, row) for row in X.values]
        assert batch == pytest.approx(single)

    @given(st.floats(-5, 5), st.floats(-5, 5), st.floats(-3, 3))
    def test_logistic_strictly_inside_unit_interval(self, b1, b2, b0):
        # moderate logits: float64 saturates to exactly 0/1 beyond |z| ~ 37
        X = feature_matrix([[1.7, -2.1]])
        out = gate_weights(GateParams.logistic(np.array([b1, b2]), b0), X)
        assert 0.0 < out[0] < 1.0

    @given(st.floats(0.01, 100.0), st.floats(-2, 2), st.floats(-2, 2))
    def test_scale_invariance(self, c, x1, x2):
        beta = np.array([0.8, -1.3])
        x = np.array([x1, x2])
        base = gate_weight(GateParams.logistic(beta, 0.4), x)
        scaled = gate_weight(GateParams.logistic(beta / c, 0.4), c * x)
        assert scaled == pytest.approx(base, abs=1e-10)
