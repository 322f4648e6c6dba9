"""Tests for evaluation metrics and the generalization bound."""

import math
import os
import sys
import unittest
from dataclasses import replace

import numpy as np

sys.path.insert(0, os.path.join(os.path.dirname(__file__), '..', 'src'))

from meta_transition.errors import InvalidConfigError, InvalidInputError, ShapeError
from meta_transition.metrics import (
    BoundInputs, accuracy, bound_inputs_for, complexity_term, confidence_term,
    estimation_error, frobenius_norms, loss_bound_for, rademacher_bound,
)
from meta_transition.model import MlpParams


class TestAccuracyAndEstimationError(unittest.TestCase):
    """Accuracy and the relative L1 estimation error."""

    def test_accuracy(self):
        """Two of three correct."""
        self.assertAlmostEqual(accuracy([0, 1, 2], [0, 1, 1]), 2.0 / 3.0)

    def test_accuracy_invalid(self):
        """Empty or mismatched inputs are rejected."""
        with self.assertRaises(InvalidInputError):
            accuracy([], [])
        with self.assertRaises(InvalidInputError):
            accuracy([0, 1], [0])

    def test_estimation_error(self):
        """Hand-computed example gives 0.4 / 2 = 0.2."""
        truth = [[0.9, 0.1], [0.2, 0.8]]
        estimate = [[0.8, 0.2], [0.3, 0.7]]
        self.assertAlmostEqual(estimation_error(truth, estimate), 0.2, places=12)
        self.assertEqual(estimation_error(truth, truth), 0.0)

    def test_estimation_error_invalid(self):
        """Shape mismatch and a zero reference are rejected."""
        with self.assertRaises(ShapeError):
            estimation_error(np.eye(2), np.eye(3))
        with self.assertRaises(InvalidInputError):
            estimation_error(np.zeros((2, 2)), np.eye(2))


class TestRademacherBound(unittest.TestCase):
    """Closed-form bound."""

    def setUp(self):
        """The hand-computed reference inputs."""
        self.inputs = BoundInputs(input_norm=1.0, layer_norms=(1.0,), n_train=100,
                                  num_classes=2, loss_bound=1.0, delta=0.05)

    def test_reference_value(self):
        """B=1, d=1, M1=1, N=100, c=2, M=1, delta=0.05 gives 1.27839."""
        self.assertAlmostEqual(rademacher_bound(self.inputs), 1.27839, delta=1e-5)
        expected_first = 4.0 * (math.sqrt(2.0 * math.log(2.0)) + 1.0) / 10.0
        self.assertAlmostEqual(complexity_term(self.inputs), expected_first, places=12)
        self.assertAlmostEqual(confidence_term(self.inputs), 3.0 * math.sqrt(math.log(40.0) / 200.0),
                               places=12)

    def test_quadrupling_n_halves_complexity(self):
        """The complexity term scales as 1/sqrt(N)."""
        bigger = replace(self.inputs, n_train=400)
        self.assertAlmostEqual(complexity_term(bigger), complexity_term(self.inputs) / 2.0,
                               places=12)

    def test_monotonicity(self):
        """Decreasing in N; increasing in every norm, c, M and B."""
        base = rademacher_bound(self.inputs)
        self.assertLess(rademacher_bound(replace(self.inputs, n_train=101)), base)
        for change in ({'layer_norms': (1.5,)}, {'num_classes': 3}, {'loss_bound': 1.2},
                       {'input_norm': 2.0}, {'delta': 0.01}):
            self.assertGreater(rademacher_bound(replace(self.inputs, **change)), base,
                               msg=str(change))
        deeper = replace(self.inputs, layer_norms=(1.0, 2.0, 0.5))
        self.assertGreater(rademacher_bound(replace(deeper, layer_norms=(1.0, 2.5, 0.5))),
                           rademacher_bound(deeper))

    def test_positive(self):
        """The bound is positive even with zero weights."""
        self.assertGreater(rademacher_bound(replace(self.inputs, layer_norms=(0.0,))), 0.0)

    def test_invalid_delta(self):
        """delta outside (0, 1) is a configuration error."""
        for delta in (0.0, 1.0, -0.5):
            with self.assertRaises(InvalidConfigError):
                replace(self.inputs, delta=delta)


class TestNorms(unittest.TestCase):
    """Frobenius norms and measured bound inputs."""

    def test_frobenius(self):
        """[[3, 4]] has norm 5; the 2x2 identity has norm sqrt(2)."""
        norms, b = frobenius_norms(MlpParams((2, 1), (np.array([[3.0, 4.0]]),)))
        self.assertEqual(norms, [5.0])
        self.assertIsNone(b)
        norms, _ = frobenius_norms(MlpParams((2, 2), (np.eye(2),)))
        self.assertAlmostEqual(norms[0], math.sqrt(2.0))

    def test_input_norm(self):
        """B is the largest row norm of the features."""
        params = MlpParams((2, 2), (np.zeros((2, 2)),))
        norms, b = frobenius_norms(params, np.array([[3.0, 4.0], [1.0, 0.0]]))
        self.assertEqual(norms, [0.0])
        self.assertEqual(b, 5.0)

    def test_bound_inputs_for(self):
        """Measured inputs use -log(eps) as the loss range."""
        params = MlpParams((2, 2), (np.eye(2),))
        inputs = bound_inputs_for(params, np.array([[3.0, 4.0]]), n_train=10, eps=1e-12)
        self.assertAlmostEqual(inputs.loss_bound, -math.log(1e-12))
        self.assertEqual(inputs.num_classes, 2)
        self.assertEqual(inputs.depth, 1)
        self.assertAlmostEqual(loss_bound_for(math.exp(-2.0)), 2.0)
        with self.assertRaises(InvalidConfigError):
            loss_bound_for(0.0)


if __name__ == '__main__':
    unittest.main()
