"""Tests for the meta gradient with respect to the transition logits."""

import os
import sys
import unittest

import numpy as np

sys.path.insert(0, os.path.join(os.path.dirname(__file__), '..', 'src'))

from meta_transition.core import SeededRng
from meta_transition.errors import InvalidInputError
from meta_transition.noise import from_logits
from meta_transition.training import Batch, hypergradient, meta_loss_at, meta_step, virtual_update
from tests.gradcheck import central_difference, random_instance, relative_error, relu_margin


def draw_problem(seed, num_classes, alpha, margin=1e-3):
    """Random network, batches and logits whose ReLU patterns are stable.

    Returns None when the post-step network sits too close to a kink on the
    meta batch.
    """
    params, train_features = random_instance(seed, [3, 6, num_classes], batch=6)
    rng = SeededRng(seed).spawn("problem")
    train = Batch(train_features, rng.choice(num_classes, 6, replace=True))
    meta = Batch(rng.normal(0.0, 1.0, (5, 3)), rng.choice(num_classes, 5, replace=True))
    theta = rng.normal(0.0, 1.0, (num_classes, num_classes))
    w_hat = virtual_update(params, from_logits(theta), train, alpha)
    if relu_margin(w_hat, meta.features) <= margin:
        return None
    return params, train, meta, theta


class TestHypergradient(unittest.TestCase):
    """Exact and finite-difference meta gradients."""

    def test_exact_matches_finite_differences(self):
        """The closed form agrees with central differences of the meta loss on 100 instances."""
        checked = 0
        seed = 0
        while checked < 100:
            seed += 1
            num_classes = (2, 3, 5)[seed % 3]
            alpha = (0.1, 0.01)[seed % 2]
            problem = draw_problem(seed, num_classes, alpha)
            if problem is None:
                continue
            params, train, meta, theta = problem
            analytic = hypergradient(theta, params, train, meta, alpha, mode="exact")
            numeric = central_difference(
                lambda t: meta_loss_at(t, params, train, meta, alpha), theta, step=1e-4)
            self.assertLess(relative_error(analytic, numeric), 1e-4,
                            msg=f"seed={seed} c={num_classes} alpha={alpha}")
            checked += 1

    def test_fd_trick_close_to_exact(self):
        """The finite-difference mode agrees with the closed form within 1e-2."""
        checked = 0
        seed = 1000
        while checked < 20:
            seed += 1
            problem = draw_problem(seed, 3, 0.1)
            if problem is None:
                continue
            params, train, meta, theta = problem
            exact = hypergradient(theta, params, train, meta, 0.1, mode="exact")
            approx = hypergradient(theta, params, train, meta, 0.1, mode="fd-trick")
            self.assertLess(relative_error(exact, approx), 1e-2, msg=f"seed={seed}")
            checked += 1

    def test_alpha_zero_gives_zero(self):
        """Without a virtual step the meta loss does not depend on the transition."""
        params, train, meta, theta = draw_problem(7, 3, 0.0)
        np.testing.assert_array_equal(hypergradient(theta, params, train, meta, 0.0),
                                      np.zeros((3, 3)))

    def test_rows_orthogonal_to_ones(self):
        """Row shifts of the logits leave T unchanged, so gradient rows sum to zero."""
        params, train, meta, theta = draw_problem(8, 3, 0.1, margin=0.0)
        grad = hypergradient(theta, params, train, meta, 0.1)
        np.testing.assert_allclose(grad.sum(axis=1), np.zeros(3), atol=1e-12)

    def test_invalid_arguments(self):
        """Unknown modes and negative step sizes are rejected."""
        params, train, meta, theta = draw_problem(9, 2, 0.1, margin=0.0)
        with self.assertRaises(InvalidInputError):
            hypergradient(theta, params, train, meta, 0.1, mode="reverse")
        with self.assertRaises(InvalidInputError):
            hypergradient(theta, params, train, meta, -0.1)
        with self.assertRaises(InvalidInputError):
            meta_step(theta, params, train, meta, 0.1, -1.0)


class TestMetaStep(unittest.TestCase):
    """Updating the transition logits."""

    def test_beta_zero_keeps_transition(self):
        """beta=0 returns the same logits and matrix."""
        params, train, meta, theta = draw_problem(11, 3, 0.1, margin=0.0)
        state = meta_step(theta, params, train, meta, 0.1, 0.0)
        np.testing.assert_array_equal(state.logits, theta)
        np.testing.assert_array_equal(state.matrix, from_logits(theta).matrix)

    def test_small_step_descends(self):
        """A short step against the meta gradient lowers the meta loss."""
        alpha = 0.5
        seed = 40
        while True:
            seed += 1
            problem = draw_problem(seed, 3, alpha)
            if problem is None:
                continue
            params, train, meta, theta = problem
            grad = hypergradient(theta, params, train, meta, alpha)
            if np.linalg.norm(grad) > 1e-3:
                break
        before = meta_loss_at(theta, params, train, meta, alpha)
        for beta in (1e-3, 1e-4):
            stepped = meta_step(theta, params, train, meta, alpha, beta)
            np.testing.assert_allclose(stepped.logits, theta - beta * grad)
            self.assertLess(meta_loss_at(stepped, params, train, meta, alpha), before)


if __name__ == '__main__':
    unittest.main()
