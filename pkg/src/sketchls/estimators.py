"""Full, sketched and partially sketched least-squares estimators.

The functions operate on plain arrays and a realized sketch. The two
regressor classes wrap them in the scikit-learn estimator API so they can be
dropped into pipelines, grid searches and cross-validation.
"""
from dataclasses import dataclass

import numpy as np
from sklearn.base import BaseEstimator, RegressorMixin
from sklearn.utils.validation import check_is_fitted, validate_data

from ._validation import as_matrix, as_vector, check_count
from .exceptions import InvalidInputError
from .linalg import thin_svd
from .rng import RngStream
from .sketches import (
    SketchKind,
    apply_sketch,
    draw_sketch,
    leverage_for_kind,
)


@dataclass(frozen=True)
class FitResult:
    beta_hat: np.ndarray
    rank_used: int
    residual_norm_sq: float


def _check_xy(X, Y):
    X = as_matrix(X, "X")
    Y = as_vector(Y, "Y")
    if X.shape[0] != Y.shape[0]:
        raise InvalidInputError(f"X has {X.shape[0]} rows but Y has {Y.shape[0]} entries")
    return X, Y


def _min_norm(A, b, rank_tol):
    svd = thin_svd(A, rank_tol)
    beta = (svd.V / svd.singular_values) @ (svd.U.T @ b)
    return beta, svd.rank


def ols_solve(X, Y, rank_tol=None):
    """``pinv(X) @ Y``; the residual is reported on the full data."""
    X, Y = _check_xy(X, Y)
    if X.shape[0] < X.shape[1]:
        raise InvalidInputError("ols_solve expects at least as many rows as columns")
    beta, rank = _min_norm(X, Y, rank_tol)
    resid = Y - X @ beta
    return FitResult(beta, rank, float(resid @ resid))


def sketched_solve(draw, X, Y, rank_tol=None):
    """Minimum-norm solution of the sketched problem ``pinv(S X) @ (S Y)``.

    ``rank_used`` is the numerical rank of ``S X``; the residual is measured on
    the full, unsketched data.
    """
    X, Y = _check_xy(X, Y)
    if draw.n != X.shape[0]:
        raise InvalidInputError(f"sketch acts on {draw.n} rows, X has {X.shape[0]}")
    SXY = apply_sketch(draw, np.column_stack([X, Y]))
    beta, rank = _min_norm(SXY[:, :-1], SXY[:, -1], rank_tol)
    resid = Y - X @ beta
    return FitResult(beta, rank, float(resid @ resid))


def partial_sketch_solve(draw, X, Y, rank_tol=None):
    """``pinv((S X).T @ (S X)) @ X.T @ Y``: sketched Gram matrix, exact ``X.T Y``."""
    X, Y = _check_xy(X, Y)
    if draw.n != X.shape[0]:
        raise InvalidInputError(f"sketch acts on {draw.n} rows, X has {X.shape[0]}")
    SX = apply_sketch(draw, X)
    # pinv(A.T A) = V diag(1/s^2) V.T from the SVD of A, avoiding squaring the
    # condition number before the rank decision
    svd = thin_svd(SX, rank_tol)
    gram_pinv = (svd.V / svd.singular_values**2) @ svd.V.T
    beta = gram_pinv @ (X.T @ Y)
    resid = Y - X @ beta
    return FitResult(beta, svd.rank, float(resid @ resid))


# ---------------------------------------------------------------------------
# scikit-learn wrappers


def _seed_from(random_state):
    if isinstance(random_state, RngStream):
        return random_state
    if random_state is None:
        return RngStream(int(np.random.SeedSequence().generate_state(1, np.uint64)[0]))
    if isinstance(random_state, (int, np.integer)):
        return RngStream(int(random_state))
    # a Generator / RandomState: pull a seed from it so the fit stays reproducible
    gen = random_state if isinstance(random_state, np.random.Generator) else None
    if gen is None:
        return RngStream(int(random_state.randint(0, 2**31 - 1)))
    return RngStream(int(gen.integers(0, 2**63 - 1)))


class _SketchRegressorBase(RegressorMixin, BaseEstimator):
    _solver = None

    def __init__(
        self,
        sketch="gaussian",
        sketch_size=None,
        theta=None,
        fit_intercept=False,
        rank_tol=None,
        random_state=None,
    ):
        self.sketch = sketch
        self.sketch_size = sketch_size
        self.theta = theta
        self.fit_intercept = fit_intercept
        self.rank_tol = rank_tol
        self.random_state = random_state

    def _kind(self):
        if isinstance(self.sketch, SketchKind):
            return self.sketch
        overrides = {} if self.theta is None else {"theta": self.theta}
        return SketchKind.from_name(self.sketch, **overrides)

    def fit(self, X, y):
        X, y = validate_data(self, X, y, y_numeric=True, dtype=np.float64)
        n, p = X.shape
        if self.fit_intercept:
            x_mean, y_mean = X.mean(axis=0), y.mean()
            Xc, yc = X - x_mean, y - y_mean
        else:
            Xc, yc = X, y
        kind = self._kind()
        r = n if self.sketch_size is None else check_count(self.sketch_size, "sketch_size")
        stream = _seed_from(self.random_state)
        probs = None
        if kind.uses_leverage:
            probs = kind.probabilities(leverage_for_kind(kind, Xc, stream.child(1)))
        self.sketch_ = draw_sketch(kind, r, n, stream.child(0), probs=probs)
        result = type(self)._solver(self.sketch_, Xc, yc, self.rank_tol)
        self.coef_ = result.beta_hat
        self.rank_ = result.rank_used
        self.intercept_ = float(y_mean - x_mean @ self.coef_) if self.fit_intercept else 0.0
        return self

    def predict(self, X):
        check_is_fitted(self, "coef_")
        X = validate_data(self, X, reset=False, dtype=np.float64)
        return X @ self.coef_ + self.intercept_


class SketchedLinearRegression(_SketchRegressorBase):
    """Least squares solved on sketched data ``(S X, S y)``.

    Parameters
    ----------
    sketch : str or SketchKind
        Sketch family: ``"leverage_rescaled"``, ``"leverage_unrescaled"``,
        ``"uniform"``, ``"shrinkage_rescaled"``, ``"gaussian"``, ``"rademacher"``,
        ``"hadamard"`` or ``"identity"``. Short aliases ``"R"``, ``"NR"``,
        ``"Unif"``, ``"Shr"``, ``"GP"`` and ``"Had"`` are accepted.
    sketch_size : int, optional
        Number of sketch rows ``r``. Defaults to the number of samples.
    theta : float, optional
        Mixture weight toward uniform sampling for leverage-based sketches.
    fit_intercept : bool
        Center ``X`` and ``y`` before sketching.
    rank_tol : float, optional
        Relative singular-value cutoff for the min-norm solve.
    random_state : int, RngStream, Generator or None

    Attributes
    ----------
    coef_, intercept_, rank_, sketch_
    """

    _solver = staticmethod(sketched_solve)


class PartialSketchRegression(_SketchRegressorBase):
    """Least squares with a sketched Gram matrix and the exact ``X.T y``.

    Takes the same parameters as :class:`SketchedLinearRegression`.
    """

    _solver = staticmethod(partial_sketch_solve)
