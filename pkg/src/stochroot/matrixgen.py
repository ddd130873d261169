"""Reproducible test matrices for the stochastic root problem.

All random draws come from ``numpy.random.Generator(PCG64(seed))``, so
``(class, n, p, seed)`` determines the matrix bytes on a given platform.
Uniform draws are taken in ``(0, 1]`` to keep generated matrices
strictly positive.
"""

from dataclasses import dataclass

import numpy as np
import scipy.linalg as sla

from .exceptions import InvalidSpecError

CLASSES = (
    "uniform",
    "pth_power_uniform",
    "exp_intensity",
    "k80_embeddable",
    "k80_nonembeddable",
    "pei",
    "credit_risk",
)
#: The six randomized classes that are benchmarked against each other.
TABLE_CLASSES = CLASSES[:6]
FIXED_SIZE = {"k80_embeddable": 4, "k80_nonembeddable": 4, "credit_risk": 8}

CREDIT_RISK_STATES = ("AAA", "AA", "A", "BBB", "BB", "B", "CCC", "D")

#: One-year transition frequencies with four significant figures; rows are
#: not normalized exactly (row CCC sums to 1.0001).
CREDIT_RISK_DATA = np.array(
    [
        [0.8910, 0.0963, 0.0078, 0.0019, 0.0030, 0.0000, 0.0000, 0.0000],
        [0.0086, 0.9010, 0.0747, 0.0099, 0.0029, 0.0029, 0.0000, 0.0000],
        [0.0009, 0.0291, 0.8894, 0.0649, 0.0101, 0.0045, 0.0000, 0.0009],
        [0.0006, 0.0043, 0.0656, 0.8427, 0.0644, 0.0160, 0.0018, 0.0045],
        [0.0004, 0.0022, 0.0079, 0.0719, 0.7764, 0.1043, 0.0127, 0.0241],
        [0.0000, 0.0019, 0.0031, 0.0066, 0.0517, 0.8246, 0.0435, 0.0685],
        [0.0000, 0.0000, 0.0116, 0.0116, 0.0203, 0.0754, 0.6493, 0.2319],
        [0.0000, 0.0000, 0.0000, 0.0000, 0.0000, 0.0000, 0.0000, 1.0000],
    ]
)


@dataclass(frozen=True)
class GeneratorSpec:
    """What to generate.

    Fixed-size classes (the two K80 variants and ``credit_risk``) override
    ``n``; the effective size is available as ``size``.
    """

    cls: str
    n: int = 10
    p: int = 2
    seed: int = 0

    def __post_init__(self):
        if self.cls not in CLASSES:
            raise InvalidSpecError(f"unknown class {self.cls!r}; choose from {CLASSES}")
        if self.cls not in FIXED_SIZE and (int(self.n) != self.n or self.n < 2):
            raise InvalidSpecError("n must be an integer >= 2")
        if int(self.p) != self.p or self.p < 1:
            raise InvalidSpecError("p must be a positive integer")
        if self.seed is not None and (int(self.seed) != self.seed or self.seed < 0):
            raise InvalidSpecError("seed must be a nonnegative integer")

    @property
    def size(self):
        return FIXED_SIZE.get(self.cls, int(self.n))


def matrix_exponential(Q):
    """``exp(Q)`` by scaling and squaring with a degree-13 Padé approximant."""
    Q = np.asarray(Q, dtype=float)
    if Q.ndim != 2 or Q.shape[0] != Q.shape[1]:
        raise ValueError("matrix_exponential needs a square matrix")
    return sla.expm(Q)


def _unit(rng, shape=None):
    return 1.0 - rng.random(shape)


def _row_normalize(B):
    return B / B.sum(axis=1)[:, None]


def _k80(a, b, c):
    A0 = np.array([[a, b], [a, b]])
    E = np.full((2, 2), c)
    return np.block([[A0, E], [E, A0]])


def credit_risk_matrix():
    """The credit-rating transition matrix with rows renormalized to sum one."""
    return _row_normalize(CREDIT_RISK_DATA.copy())


def generate(spec):
    """Draw one matrix of the requested class.

    Parameters
    ----------
    spec : GeneratorSpec

    Returns
    -------
    ndarray, shape (spec.size, spec.size)
        Row-stochastic matrix.
    """
    rng = np.random.Generator(np.random.PCG64(spec.seed))
    n, p = spec.size, int(spec.p)
    cls = spec.cls
    if cls == "uniform":
        return _row_normalize(_unit(rng, (n, n)))
    if cls == "pth_power_uniform":
        return np.linalg.matrix_power(_row_normalize(_unit(rng, (n, n))), p)
    if cls == "exp_intensity":
        B = _unit(rng, (n, n))
        np.fill_diagonal(B, 0.0)
        return matrix_exponential(B - np.diag(B.sum(axis=1)))
    if cls == "k80_embeddable":
        b = float(_unit(rng))
        c = np.sqrt(b) - b
        return _k80(1.0 - b - 2.0 * c, b, c)
    if cls == "k80_nonembeddable":
        b = 0.5 * float(_unit(rng))
        c = (1.0 - 2.0 * b) / 2.0
        return _k80(1.0 - b - 2.0 * c, b, c)
    if cls == "pei":
        shift = (1.0 / (n - 1)) ** p
        if shift >= 1.0:
            raise InvalidSpecError("the Pei class needs n >= 3")
        alpha = float(_unit(rng)) - shift
        while alpha <= 0:  # rejection keeps A strictly positive on the diagonal shift
            alpha = float(_unit(rng)) - shift
        beta = (1.0 - alpha) / n
        return alpha * np.eye(n) + beta * np.ones((n, n))
    return credit_risk_matrix()
