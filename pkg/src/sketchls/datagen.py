"""Synthetic heavy-tailed regression designs and responses."""
from dataclasses import dataclass
import math

import numpy as np
from scipy.linalg import toeplitz

from ._validation import as_matrix, as_vector, check_count
from .exceptions import InvalidInputError, NumericError
from .linalg import leverage_scores, thin_svd
from .rng import RngStream, as_generator

FAMILIES = ("elementwise", "multivariate")
BETA_CHOICES = ("ones", "unit-random", "supplied")


@dataclass(frozen=True)
class SyntheticSpec:
    """Parameters of a t-distributed design with AR(1) correlation.

    ``nu = math.inf`` gives Gaussian rows. ``family`` selects how the heavy
    tails enter:

    ``"elementwise"``
        i.i.d. Student-t entries mixed by the Cholesky factor of the AR(1)
        correlation matrix, ``X = T @ L.T``.
    ``"multivariate"``
        multivariate t rows ``Z_i / sqrt(W_i / nu)`` with ``Z_i ~ N(0, Sigma)``
        and ``W_i ~ chi2(nu)``, one shared scale per row.
    """

    n: int
    p: int
    nu: float = 10.0
    ar_rho: float = 0.5
    beta_choice: str = "ones"
    seed: int = 0
    family: str = "elementwise"
    beta: tuple = None

    def __post_init__(self):
        check_count(self.n, "n")
        check_count(self.p, "p")
        if self.n < self.p:
            raise InvalidInputError(f"need n >= p, got n={self.n}, p={self.p}")
        if not self.nu > 0:
            raise InvalidInputError(f"nu must be positive, got {self.nu}")
        if not -1 < self.ar_rho < 1:
            raise InvalidInputError(f"ar_rho must lie in (-1, 1), got {self.ar_rho}")
        if self.beta_choice not in BETA_CHOICES:
            raise InvalidInputError(f"beta_choice must be one of {BETA_CHOICES}")
        if self.family not in FAMILIES:
            raise InvalidInputError(f"family must be one of {FAMILIES}")
        if self.beta_choice == "supplied":
            if self.beta is None or len(self.beta) != self.p:
                raise InvalidInputError("beta_choice='supplied' needs a beta of length p")


@dataclass(frozen=True, eq=False)
class LinearModelInstance:
    X: np.ndarray
    beta_true: np.ndarray


def ar_covariance(p, rho):
    return toeplitz(rho ** np.arange(p))


def _draw_rows(spec, gen):
    n, p = spec.n, spec.p
    L = np.linalg.cholesky(ar_covariance(p, spec.ar_rho))
    if math.isinf(spec.nu):
        return gen.standard_normal((n, p)) @ L.T
    if spec.family == "elementwise":
        return gen.standard_t(spec.nu, size=(n, p)) @ L.T
    Z = gen.standard_normal((n, p)) @ L.T
    W = gen.chisquare(spec.nu, size=n)
    return Z / np.sqrt(W / spec.nu)[:, None]


def generate_design(spec, rng=None, max_retries=10):
    """Draw ``X`` and the true coefficient vector for ``spec``.

    Uses ``RngStream(spec.seed)`` when ``rng`` is omitted. A rank-deficient
    draw is regenerated from a derived sub-stream, up to ``max_retries`` times.
    """
    stream = RngStream(spec.seed) if rng is None else rng
    for attempt in range(max_retries + 1):
        if isinstance(stream, RngStream):
            gen = (stream if attempt == 0 else stream.child(attempt)).generator()
        else:
            gen = as_generator(stream)
        X = _draw_rows(spec, gen)
        if np.all(np.isfinite(X)) and thin_svd(X).rank == spec.p:
            break
    else:
        raise NumericError(
            f"could not draw a full-rank {spec.n}x{spec.p} design in {max_retries + 1} attempts"
        )
    if spec.beta_choice == "ones":
        beta = np.ones(spec.p)
    elif spec.beta_choice == "unit-random":
        beta = gen.standard_normal(spec.p)
        beta /= np.linalg.norm(beta)
    else:
        beta = np.asarray(spec.beta, dtype=np.float64)
    return LinearModelInstance(X, beta)


def generate_response(X, beta_true, rng=None, noise=True):
    """``Y = X @ beta_true + eps`` with standard normal ``eps`` (omitted if ``noise`` is false)."""
    X = as_matrix(X, "X")
    beta_true = as_vector(beta_true, "beta_true")
    if X.shape[1] != beta_true.shape[0]:
        raise InvalidInputError(
            f"X has {X.shape[1]} columns but beta_true has {beta_true.shape[0]} entries"
        )
    Y = X @ beta_true
    if noise:
        Y = Y + as_generator(rng).standard_normal(X.shape[0])
    return Y


def leverage_profile(X):
    """Leverage scores sorted in decreasing order, and their running sum."""
    s = np.sort(leverage_scores(X))[::-1]
    return s, np.cumsum(s)
