"""scikit-learn style wrappers around the functional core.

The transformers act row-wise on a 2-D array whose rows hold the values of a
radial function on the levels ``n_min, n_min + 1, ...``.  How each row is
continued outside that window is a constructor parameter:

* ``head="edge"`` repeats the first value below the window (``u(0)``), and
  ``head="zero"`` sets ``u(0) = 0``;
* ``tail="zero"`` makes the function vanish above the window, and
  ``tail="edge"`` continues it by its last value.

Lists of :class:`~radialfrac.radial.RadialFunction` are accepted too.  They
pass through with their own extension models and come back as a list.

Note that scikit-learn's ``check_array`` rejects complex input, so validation
is done by :func:`check_radial_rows` instead.
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from .cauchy import CauchyProblem, solve_direct, solve_picard
from .local_field import FieldParams
from .radial import LevelGrid, RadialFunction, Tail
from .riesz import AlphaOrder, apply_D, apply_I

__all__ = [
    "check_radial_rows",
    "rows_to_functions",
    "FractionalDerivative",
    "FractionalIntegral",
    "CauchySolver",
]

_HEADS = ("edge", "zero")
_TAILS = ("zero", "edge")


def check_radial_rows(X) -> np.ndarray:
    """Return ``X`` as a finite complex array of shape ``(n_samples, n_levels)``.

    A 1-D input is read as a single sample.
    """
    X = np.asarray(X)
    if X.dtype == object:
        raise TypeError("X must be numeric")
    X = X.astype(complex)
    if X.ndim == 1:
        X = X[None, :]
    if X.ndim != 2:
        raise ValueError(f"X must be 2-D (n_samples, n_levels), got shape {X.shape}")
    if X.shape[1] == 0:
        raise ValueError("X has no levels")
    if not np.all(np.isfinite(X)):
        raise ValueError("X contains NaN or infinite values")
    return X


def _check_choice(name: str, value: str, allowed) -> str:
    if value not in allowed:
        raise ValueError(f"{name} must be one of {allowed}, got {value!r}")
    return value


def rows_to_functions(X, n_min: int, head: str = "edge", tail: str = "zero") -> list:
    X = check_radial_rows(X)
    _check_choice("head", head, _HEADS)
    _check_choice("tail", tail, _TAILS)
    grid = LevelGrid(int(n_min), int(n_min) + X.shape[1] - 1)
    out = []
    for row in X:
        v0 = row[0] if head == "edge" else 0j
        t = Tail.zero() if tail == "zero" else Tail.constant(row[-1])
        out.append(RadialFunction(grid, row, v0, t))
    return out


class _RadialTransformer(TransformerMixin, BaseEstimator):
    def __init__(self, q=2, alpha=1.0, n_min=0, head="edge", tail="zero"):
        self.q = q
        self.alpha = alpha
        self.n_min = n_min
        self.head = head
        self.tail = tail

    def fit(self, X=None, y=None):
        """Validate the parameters; the operators have nothing to learn."""
        self.field_ = FieldParams(self.q)
        self.order_ = AlphaOrder(self.alpha)
        _check_choice("head", self.head, _HEADS)
        _check_choice("tail", self.tail, _TAILS)
        if X is not None and not _is_function_list(X):
            self.n_features_in_ = check_radial_rows(X).shape[1]
        return self

    def _map(self, X, op):
        check_is_fitted(self, "order_")
        if _is_function_list(X):
            return [op(self.field_, u, self.order_) for u in X]
        funcs = rows_to_functions(X, self.n_min, self.head, self.tail)
        n = getattr(self, "n_features_in_", None)
        if n is not None and funcs[0].grid.size != n:
            raise ValueError(f"X has {funcs[0].grid.size} levels, fitted with {n}")
        return np.stack([op(self.field_, u, self.order_).values for u in funcs])


def _is_function_list(X) -> bool:
    return isinstance(X, (list, tuple)) and len(X) > 0 and all(
        isinstance(u, RadialFunction) for u in X
    )


class FractionalDerivative(_RadialTransformer):
    """Row-wise ``D^alpha``."""

    def transform(self, X):
        return self._map(X, apply_D)


class FractionalIntegral(_RadialTransformer):
    """Row-wise ``I^alpha``; ``inverse_transform`` applies ``D^alpha``.

    The inverse is exact only for rows that decay above the window.  With
    ``tail="zero"`` the rows are treated as decaying, but ``I^alpha`` of such a
    row does not vanish above the window.  An array round trip therefore drops
    that part and is only approximate near the top edge.  Lists of
    ``RadialFunction`` keep the exact tails and round-trip to rounding.
    """

    def transform(self, X):
        return self._map(X, apply_I)

    def inverse_transform(self, X):
        return self._map(X, apply_D)


class CauchySolver(BaseEstimator):
    """Solve ``D^alpha u + a u = f``, ``u(0) = u0``.

    ``fit(a, f)`` takes two ``RadialFunction`` objects on the same grid, or two
    1-D arrays that are read with ``n_min``, ``head`` and ``tail`` as in the
    transformers.  ``predict(levels)`` evaluates the solution ``u`` at
    arbitrary integer levels through its extension models.
    """

    def __init__(self, q=2, alpha=1.0, u0=0j, method="direct", n_min=0,
                 head="edge", tail="zero", max_iter=1000, tol=1e-15):
        self.q = q
        self.alpha = alpha
        self.u0 = u0
        self.method = method
        self.n_min = n_min
        self.head = head
        self.tail = tail
        self.max_iter = max_iter
        self.tol = tol

    def _as_function(self, x, name):
        if isinstance(x, RadialFunction):
            return x
        arr = np.asarray(x)
        if arr.ndim != 1:
            raise ValueError(f"{name} must be a RadialFunction or a 1-D array, got shape {arr.shape}")
        return rows_to_functions(arr, self.n_min, self.head, self.tail)[0]

    def fit(self, a, f):
        _check_choice("method", self.method, ("direct", "picard"))
        problem = CauchyProblem(
            FieldParams(self.q), AlphaOrder(self.alpha),
            self._as_function(a, "a"), self._as_function(f, "f"), complex(self.u0),
        )
        if self.method == "direct":
            report = solve_direct(problem)
        else:
            report = solve_picard(problem, max_iter=self.max_iter, tol=self.tol)
        self.problem_ = problem
        self.report_ = report
        self.v_ = report.v
        self.u_ = report.u
        return self

    def predict(self, levels=None):
        """Values of ``u`` at ``levels`` (default: the fitted grid)."""
        check_is_fitted(self, "u_")
        if levels is None:
            return self.u_.values.copy()
        levels = np.asarray(levels)
        if levels.dtype.kind not in "iu":
            if not np.all(np.equal(np.mod(levels, 1), 0)):
                raise ValueError("levels must be integers")
            levels = levels.astype(int)
        return np.atleast_1d(self.u_(levels.ravel())).reshape(levels.shape)

    def score(self, a=None, f=None):
        """Negative trusted residual maximum of the fitted solution."""
        check_is_fitted(self, "report_")
        return -self.report_.residual_max
