import numpy as np
import pytest
from sklearn.base import clone
from sklearn.model_selection import cross_val_score
from sklearn.pipeline import make_pipeline
from sklearn.preprocessing import StandardScaler

from sketchls.estimators import (
    PartialSketchRegression,
    SketchedLinearRegression,
    ols_solve,
    partial_sketch_solve,
    sketched_solve,
)
from sketchls.exceptions import InvalidInputError
from sketchls.linalg import thin_svd
from sketchls.rng import RngStream
from sketchls.sketches import (
    SketchKind,
    draw_dense_projection,
    draw_sketch,
    identity_sketch,
    materialize,
)


def test_ols_exact_fit(rng):
    X = rng.standard_normal((20, 3))
    fit = ols_solve(X, X @ np.array([1.0, -2.0, 0.5]))
    assert fit.residual_norm_sq == pytest.approx(0.0, abs=1e-20)
    assert fit.rank_used == 3


def test_ols_square_identity():
    Y = np.array([3.0, -1.0, 2.0])
    np.testing.assert_allclose(ols_solve(np.eye(3), Y).beta_hat, Y)


def test_ols_matches_normal_equations(rng):
    X = rng.standard_normal((64, 4))
    Y = rng.standard_normal(64)
    oracle = np.linalg.solve(X.T @ X, X.T @ Y)
    np.testing.assert_allclose(ols_solve(X, Y).beta_hat, oracle, atol=1e-10)


def test_ols_input_errors():
    with pytest.raises(InvalidInputError):
        ols_solve(np.ones((3, 2)), np.ones(4))
    with pytest.raises(InvalidInputError):
        ols_solve(np.ones((2, 3)), np.ones(2))
    with pytest.raises(InvalidInputError):
        ols_solve(np.array([[1.0], [np.inf]]), np.ones(2))


@pytest.mark.parametrize("solver", [sketched_solve, partial_sketch_solve])
def test_identity_sketch_reproduces_ols(rng, solver):
    X = rng.standard_normal((30, 4))
    Y = rng.standard_normal(30)
    ref = ols_solve(X, Y)
    fit = solver(identity_sketch(30), X, Y)
    np.testing.assert_allclose(fit.beta_hat, ref.beta_hat, atol=1e-10)
    assert fit.residual_norm_sq == pytest.approx(ref.residual_norm_sq, rel=1e-10)


def test_short_sketch_loses_rank(rng):
    X = rng.standard_normal((40, 5))
    beta = np.ones(5)
    draw = draw_dense_projection("gaussian", 3, 40, rng)
    fit = sketched_solve(draw, X, X @ beta)
    assert fit.rank_used <= 3
    # beta_hat lies in a 3-dim row space, so it cannot recover beta
    assert np.linalg.norm(fit.beta_hat - beta) > 1e-3


def test_sketched_solve_matches_materialized_oracle(rng):
    X = rng.standard_normal((50, 4))
    Y = rng.standard_normal(50)
    draw = draw_dense_projection("gaussian", 12, 50, rng)
    S = materialize(draw)
    oracle = np.linalg.pinv(S @ X) @ (S @ Y)
    np.testing.assert_allclose(sketched_solve(draw, X, Y).beta_hat, oracle, atol=1e-10)


def test_partial_sketch_matches_materialized_oracle(rng):
    U, _ = np.linalg.qr(rng.standard_normal((40, 3)))
    Y = rng.standard_normal(40)
    draw = draw_dense_projection("rademacher", 10, 40, rng)
    SU = materialize(draw) @ U
    oracle = np.linalg.solve(SU.T @ SU, U.T @ Y)
    np.testing.assert_allclose(partial_sketch_solve(draw, U, Y).beta_hat, oracle, atol=1e-10)


def test_partial_sketch_noise_error_matches_inverse_wishart_moment():
    n, p, r, draws = 512, 8, 64, 1000
    g = np.random.default_rng(0)
    X = g.standard_normal((n, p))
    errs = []
    for _ in range(draws):
        draw = draw_dense_projection("gaussian", r, n, g)
        b = partial_sketch_solve(draw, X, g.standard_normal(n)).beta_hat
        errs.append(np.sum((X @ b) ** 2) / p)
    # with beta = 0 the error is tr(W^-2)/p for W ~ Wishart(r, I/r)
    exact = r**2 * (r - 1) / ((r - p) * (r - p - 1) * (r - p - 3))
    se = np.std(errs) / np.sqrt(draws)
    assert abs(np.mean(errs) - exact) <= 3 * se
    assert exact > 1 + p / r


def test_partial_sketch_tracks_first_order_rate_for_long_sketches():
    n, p, r = 2048, 8, 512
    g = np.random.default_rng(1)
    X = g.standard_normal((n, p))
    errs = []
    for _ in range(300):
        draw = draw_dense_projection("gaussian", r, n, g)
        b = partial_sketch_solve(draw, X, g.standard_normal(n)).beta_hat
        errs.append(np.sum((X @ b) ** 2) / p)
    assert np.mean(errs) == pytest.approx(1 + p / r, rel=0.25)


def test_sketch_dimension_mismatch(rng):
    with pytest.raises(InvalidInputError):
        sketched_solve(identity_sketch(5), np.ones((6, 2)), np.ones(6))


# scikit-learn API


def _data(seed=0, n=400, p=5):
    g = np.random.default_rng(seed)
    X = g.standard_normal((n, p))
    y = X @ np.arange(1.0, p + 1) + 0.1 * g.standard_normal(n) + 3.0
    return X, y


@pytest.mark.parametrize("cls", [SketchedLinearRegression, PartialSketchRegression])
@pytest.mark.parametrize("sketch", ["GP", "Had", "R", "Unif", "Shr", "rademacher"])
def test_regressor_fits(cls, sketch):
    X, y = _data()
    model = cls(sketch=sketch, sketch_size=200, fit_intercept=True, random_state=0).fit(X, y)
    assert model.coef_.shape == (5,)
    assert model.rank_ == 5
    assert model.intercept_ == pytest.approx(3.0, abs=0.2)
    # the partial sketch keeps a signal-dependent bias from the sketched Gram matrix
    assert model.score(X, y) > (0.99 if cls is SketchedLinearRegression else 0.9)


def test_regressor_is_reproducible():
    X, y = _data()
    a = SketchedLinearRegression(sketch_size=50, random_state=3).fit(X, y).coef_
    b = SketchedLinearRegression(sketch_size=50, random_state=3).fit(X, y).coef_
    c = SketchedLinearRegression(sketch_size=50, random_state=4).fit(X, y).coef_
    np.testing.assert_array_equal(a, b)
    assert not np.array_equal(a, c)


def test_regressor_accepts_stream_and_generator():
    X, y = _data()
    SketchedLinearRegression(sketch_size=50, random_state=RngStream(1)).fit(X, y)
    SketchedLinearRegression(sketch_size=50, random_state=np.random.default_rng(1)).fit(X, y)


def test_identity_regressor_equals_ols():
    X, y = _data()
    model = SketchedLinearRegression(sketch="identity").fit(X, y)
    np.testing.assert_allclose(model.coef_, ols_solve(X, y).beta_hat, atol=1e-10)


def test_get_params_clone_and_pipeline():
    model = SketchedLinearRegression(sketch="Had", sketch_size=64, theta=None, random_state=1)
    params = model.get_params()
    assert params["sketch"] == "Had" and params["sketch_size"] == 64
    twin = clone(model)
    assert twin.get_params() == params
    assert not hasattr(twin, "coef_")
    X, y = _data()
    pipe = make_pipeline(StandardScaler(), model.set_params(fit_intercept=True))
    scores = cross_val_score(pipe, X, y, cv=3)
    assert np.all(scores > 0.99)


def test_predict_before_fit_and_feature_mismatch():
    from sklearn.exceptions import NotFittedError

    X, y = _data()
    with pytest.raises(NotFittedError):
        SketchedLinearRegression().predict(X)
    model = SketchedLinearRegression(sketch_size=50, random_state=0).fit(X, y)
    with pytest.raises(ValueError):
        model.predict(X[:, :3])


def test_leverage_regressor_uses_sketched_rows():
    X, y = _data()
    model = SketchedLinearRegression(sketch="R", sketch_size=40, random_state=0).fit(X, y)
    assert model.sketch_.r == 40
    assert thin_svd(X[model.sketch_.indices]).rank == 5
