import numpy as np
import pytest
from sklearn.base import clone
from sklearn.exceptions import NotFittedError
from sklearn.pipeline import make_pipeline

from radialfrac.cauchy import random_decaying_problem, solve_direct
from radialfrac.estimators import (
    CauchySolver,
    FractionalDerivative,
    FractionalIntegral,
    check_radial_rows,
    rows_to_functions,
)
from radialfrac.radial import sphere_indicator
from radialfrac.riesz import apply_D


def test_check_radial_rows():
    assert check_radial_rows([1, 2, 3]).shape == (1, 3)
    assert check_radial_rows(np.ones((2, 4))).dtype == complex
    with pytest.raises(ValueError):
        check_radial_rows([[1, np.nan]])
    with pytest.raises(ValueError):
        check_radial_rows(np.ones((2, 2, 2)))
    with pytest.raises(ValueError):
        check_radial_rows(np.ones((2, 0)))


def test_rows_to_functions_extensions():
    edge, = rows_to_functions([[2.0, 3.0]], n_min=-1, head="edge", tail="edge")
    assert edge.eval_at_level(-10) == 2 and edge.eval_at_level(10) == 3
    zero, = rows_to_functions([[2.0, 3.0]], n_min=-1, head="zero", tail="zero")
    assert zero.eval_at_level(-10) == 0 and zero.eval_at_level(10) == 0
    with pytest.raises(ValueError):
        rows_to_functions([[1.0]], 0, head="bogus")


def test_derivative_transform_matches_functional_core():
    X = np.zeros((2, 13))
    X[0, 6] = 1
    X[1] = np.linspace(-1, 1, 13)
    est = FractionalDerivative(q=2, alpha=1.0, n_min=-6, head="zero").fit(X)
    out = est.transform(X)
    assert out.shape == X.shape
    assert out[0, 6] == pytest.approx(4 / 3)
    assert np.allclose(out[0], apply_D(2, sphere_indicator((-6, 6), 0), 1.0).values)


def test_get_params_and_clone():
    est = FractionalIntegral(q=3, alpha=0.5, n_min=-4)
    assert est.get_params() == {"q": 3, "alpha": 0.5, "n_min": -4, "head": "edge", "tail": "zero"}
    other = clone(est).set_params(alpha=2.0)
    assert other.alpha == 2.0 and est.alpha == 0.5


def test_invalid_parameters_fail_at_fit():
    with pytest.raises(ValueError):
        FractionalDerivative(q=1).fit(np.ones((1, 3)))
    with pytest.raises(ValueError):
        FractionalDerivative(alpha=-1).fit(np.ones((1, 3)))
    with pytest.raises(ValueError):
        FractionalDerivative(tail="nope").fit(np.ones((1, 3)))


def test_not_fitted_and_shape_checks():
    with pytest.raises(NotFittedError):
        FractionalDerivative().transform(np.ones((1, 3)))
    est = FractionalDerivative().fit(np.ones((1, 3)))
    with pytest.raises(ValueError):
        est.transform(np.ones((1, 4)))


def test_function_lists_round_trip_exactly():
    rng = np.random.default_rng(0)
    funcs = rows_to_functions(rng.normal(size=(3, 9)), n_min=-4, head="zero", tail="zero")
    est = FractionalIntegral(q=3, alpha=0.5).fit()
    back = est.inverse_transform(est.transform(funcs))
    for u, w in zip(funcs, back):
        assert np.max(np.abs(u.values - w.values)) < 1e-12


def test_pipeline_composes_integral_and_derivative():
    X = np.zeros((1, 81))
    X[0, 18:23] = [1, -2, 3, 0.5, 1]
    pipe = make_pipeline(
        FractionalIntegral(q=2, alpha=2.0, n_min=-20, head="zero"),
        FractionalDerivative(q=2, alpha=2.0, n_min=-20, head="zero"),
    )
    out = pipe.fit_transform(X)
    # dropping the tail of I costs about q**-(distance to the top edge)
    assert np.max(np.abs(out[0, :30] - X[0, :30])) < 1e-14


def test_cauchy_solver_matches_solve_direct():
    p = random_decaying_problem(np.random.default_rng(1), 2, 0.5, u0=0.5)
    est = CauchySolver(q=2, alpha=0.5, u0=0.5).fit(p.a, p.f)
    ref = solve_direct(p)
    assert np.array_equal(est.predict(), ref.u.values)
    assert est.predict([-1000])[0] == 0.5
    assert est.predict(np.array([[0, 1]])).shape == (1, 2)
    assert est.score() == -ref.residual_max


def test_cauchy_solver_picard_and_arrays():
    p = random_decaying_problem(np.random.default_rng(1), 3, 1.0, -20, 20)
    est = CauchySolver(q=3, alpha=1.0, method="picard", n_min=-20, head="edge").fit(p.a.values, p.f.values)
    assert est.report_.method == "picard"
    direct = solve_direct(p).u.values
    # arrays carry the lowest value as u(0) instead of the exact limit
    assert np.max(np.abs(est.predict() - direct)) < 1e-4


def test_cauchy_solver_validation():
    with pytest.raises(NotFittedError):
        CauchySolver().predict()
    p = random_decaying_problem(np.random.default_rng(1), 2, 0.5)
    with pytest.raises(ValueError):
        CauchySolver(q=2, alpha=0.5, method="newton").fit(p.a, p.f)
    est = CauchySolver(q=2, alpha=0.5).fit(p.a, p.f)
    with pytest.raises(ValueError):
        est.predict([0.5])
