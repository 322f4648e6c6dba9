"""Tests for the core numeric helpers."""

import math
import os
import sys
import unittest

import numpy as np

sys.path.insert(0, os.path.join(os.path.dirname(__file__), '..', 'src'))

from meta_transition.core import (
    SeededRng, axpy, cross_entropy, cross_entropy_rows, logsumexp, matmul, softmax,
    softmax_rows, transpose,
)
from meta_transition.errors import InvalidInputError, ShapeError


class TestLinalg(unittest.TestCase):
    """Shape-checked matrix helpers."""

    def test_matmul(self):
        """A 2x2 times a column of ones sums the rows."""
        result = matmul(np.array([[1.0, 2.0], [3.0, 4.0]]), np.array([[1.0], [1.0]]))
        np.testing.assert_array_equal(result, [[3.0], [7.0]])

    def test_matmul_shape_mismatch(self):
        """Non-conformable operands raise ShapeError."""
        with self.assertRaises(ShapeError):
            matmul(np.ones((2, 3)), np.ones((2, 3)))

    def test_transpose_and_axpy(self):
        """Transpose is contiguous and axpy adds a scaled array."""
        t = transpose(np.array([[1.0, 2.0, 3.0]]))
        self.assertEqual(t.shape, (3, 1))
        self.assertTrue(t.flags['C_CONTIGUOUS'])
        np.testing.assert_array_equal(axpy(2.0, np.ones(2), np.array([1.0, 0.0])), [3.0, 2.0])
        with self.assertRaises(ShapeError):
            axpy(1.0, np.ones(2), np.ones(3))


class TestSoftmax(unittest.TestCase):
    """Stable softmax and log-sum-exp."""

    def test_large_equal_logits(self):
        """Huge equal logits do not overflow."""
        np.testing.assert_allclose(softmax([1000.0, 1000.0]), [0.5, 0.5])

    def test_known_values(self):
        """softmax([0, ln 3]) is [0.25, 0.75]."""
        np.testing.assert_allclose(softmax([0.0, math.log(3.0)]), [0.25, 0.75], atol=1e-15)

    def test_rows_sum_to_one(self):
        """Every softmax row is a probability vector."""
        z = SeededRng(3).normal(0.0, 5.0, (20, 4))
        p = softmax_rows(z)
        self.assertTrue(np.all(p >= 0))
        np.testing.assert_allclose(p.sum(axis=1), np.ones(20), atol=1e-12)

    def test_non_finite_rejected(self):
        """NaN logits raise InvalidInputError."""
        with self.assertRaises(InvalidInputError):
            softmax([0.0, float('nan')])
        with self.assertRaises(InvalidInputError):
            softmax([])

    def test_logsumexp_identity(self):
        """softmax equals exp(z - logsumexp(z))."""
        z = np.array([0.3, -1.2, 2.5, 700.0])
        np.testing.assert_allclose(softmax(z), np.exp(z - logsumexp(z)), rtol=1e-12)


class TestCrossEntropy(unittest.TestCase):
    """Clamped cross-entropy."""

    def test_uniform_pair(self):
        """CE of [0.5, 0.5] is ln 2."""
        self.assertAlmostEqual(cross_entropy([0.5, 0.5], 0), math.log(2.0), places=12)

    def test_clamped_at_eps(self):
        """A zero probability gives -ln(eps)."""
        self.assertAlmostEqual(cross_entropy([1.0, 0.0], 1, eps=1e-12), -math.log(1e-12), places=9)

    def test_invalid_arguments(self):
        """Bad labels, eps and unnormalized vectors raise InvalidInputError."""
        with self.assertRaises(InvalidInputError):
            cross_entropy([0.5, 0.5], 2)
        with self.assertRaises(InvalidInputError):
            cross_entropy([0.5, 0.5], 0, eps=0.0)
        with self.assertRaises(InvalidInputError):
            cross_entropy([0.5, 0.6], 0)

    def test_rows(self):
        """Row-wise CE picks the labelled column."""
        losses = cross_entropy_rows(np.array([[0.5, 0.5], [0.25, 0.75]]), np.array([1, 1]))
        np.testing.assert_allclose(losses, [math.log(2.0), -math.log(0.75)])


class TestSeededRng(unittest.TestCase):
    """Seeded streams."""

    def test_same_seed_same_draws(self):
        """Two generators with one seed agree."""
        np.testing.assert_array_equal(SeededRng(7).random(5), SeededRng(7).random(5))

    def test_streams_are_independent_of_parent_state(self):
        """Spawning after draws yields the same child stream."""
        parent = SeededRng(7)
        first = parent.spawn("init").random(4)
        parent.random(100)
        np.testing.assert_array_equal(parent.spawn("init").random(4), first)
        self.assertFalse(np.array_equal(parent.spawn("data").random(4), first))


if __name__ == '__main__':
    unittest.main()
