"""Small fixtures shared by the test modules."""

import numpy as np


def circulant_A(a):
    """Symmetric circulant chain with eigenvalues {1, -a, -a}."""
    return np.array(
        [
            [1 - 2 * a, 1 + a, 1 + a],
            [1 + a, 1 - 2 * a, 1 + a],
            [1 + a, 1 + a, 1 - 2 * a],
        ]
    ) / 3.0


def circulant_root(a):
    """The unique stochastic square root of ``circulant_A(a)``."""
    s = np.sqrt(3 * a)
    return np.array(
        [
            [1, 1 + s, 1 - s],
            [1 - s, 1, 1 + s],
            [1 + s, 1 - s, 1],
        ]
    ) / 3.0


def random_pi(rng, n):
    w = 0.2 + rng.random(n)
    return w / w.sum()
