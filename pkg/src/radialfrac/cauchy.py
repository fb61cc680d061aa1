"""Cauchy problem ``D^alpha u + a u = f``, ``u(0) = u0`` for radial functions.

The substitution ``u = u0 + I^alpha v`` turns the problem into the integral
equation

    pivot(n) v(q**n) + a(q**n) G_n[v] = f(q**n) - a(q**n) u0,
    pivot(n) = 1 + q**(-alpha) a(q**n) q**(alpha n),

where ``G_n[v]`` integrates ``v`` over the ball ``|y| < q**n`` only.  The
system is therefore lower triangular in the level index and one upward sweep
solves it.  Below the grid, ``v`` is closed by its value at zero,
``v(0) = f(0) - a(0) u0``.

The inner integrals here are evaluated from the values of ``v`` (not from
increments as in :mod:`radialfrac.riesz`), so the solver and ``apply_I`` are
two independent routes to the same quantity.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .exceptions import NoConvergenceError, SingularPivotError
from .local_field import as_field
from .radial import MatrixRadialFunction, RadialFunction, Tail, check_radial
from .riesz import AlphaOrder, apply_D, apply_I, as_order, constants, trust_margin

__all__ = [
    "CauchyProblem",
    "MatrixCauchyProblem",
    "SpectralReport",
    "DecayReport",
    "ResidualReport",
    "SolveReport",
    "check_spectral_condition",
    "check_decay_hypothesis",
    "solve_direct",
    "solve_picard",
    "solve_matrix",
    "residual",
    "PIVOT_TOL",
    "PIVOT_WARN",
    "NON_DECAYING_WARNING",
]

PIVOT_TOL = 1e-9
PIVOT_WARN = 1e-6
DECAY_EPS = 1e-2
NON_DECAYING_WARNING = "non-decaying data: Φ′-sense solution only"

# head levels are scanned downward until the pivot correction is below this
_HEAD_NEGLIGIBLE = 1e-17
_HEAD_MAX_LEVELS = 10_000


@dataclass(frozen=True)
class CauchyProblem:
    fp: object
    order: object
    a: RadialFunction
    f: RadialFunction
    u0: complex = 0j

    def __post_init__(self):
        object.__setattr__(self, "fp", as_field(self.fp))
        object.__setattr__(self, "order", as_order(self.order))
        check_radial(self.a)
        check_radial(self.f)
        if self.a.grid != self.f.grid:
            raise ValueError(f"a and f live on different grids: {self.a.grid} vs {self.f.grid}")
        for name in ("a", "f"):
            if not getattr(self, name).tail.is_simple:
                raise ValueError(f"{name} must have a zero or constant tail")
        u0 = complex(self.u0)
        if not np.isfinite(u0):
            raise ValueError("u0 is not finite")
        object.__setattr__(self, "u0", u0)

    @property
    def grid(self):
        return self.a.grid


@dataclass(frozen=True)
class MatrixCauchyProblem:
    """Vector unknown of dimension ``d``; ``f`` is a sequence of ``d`` scalar functions."""

    fp: object
    order: object
    a: MatrixRadialFunction
    f: tuple
    u0: np.ndarray | None = None

    def __post_init__(self):
        object.__setattr__(self, "fp", as_field(self.fp))
        object.__setattr__(self, "order", as_order(self.order))
        if not isinstance(self.a, MatrixRadialFunction):
            raise TypeError("a must be a MatrixRadialFunction")
        f = tuple(check_radial(fi) for fi in self.f)
        d = self.a.dim
        if len(f) != d:
            raise ValueError(f"f has {len(f)} components, a is {d}x{d}")
        for i, fi in enumerate(f):
            if fi.grid != self.a.grid:
                raise ValueError(f"f[{i}] grid {fi.grid} differs from a's grid {self.a.grid}")
            if not fi.tail.is_simple:
                raise ValueError(f"f[{i}] must have a zero or constant tail")
        object.__setattr__(self, "f", f)
        u0 = np.zeros(d, dtype=complex) if self.u0 is None else np.array(self.u0, dtype=complex).reshape(-1)
        if u0.shape != (d,):
            raise ValueError(f"u0 must have {d} components")
        if not np.all(np.isfinite(u0)):
            raise ValueError("u0 is not finite")
        object.__setattr__(self, "u0", u0)

    @property
    def dim(self) -> int:
        return self.a.dim

    @property
    def grid(self):
        return self.a.grid

    def f_matrix(self) -> np.ndarray:
        return np.stack([fi.values for fi in self.f], axis=1)


@dataclass
class SpectralReport:
    ok: bool
    min_pivot: float
    offending_levels: list
    warn_levels: list = field(default_factory=list)


@dataclass
class DecayReport:
    satisfied: bool
    eps: float
    C_a: float
    C_f: float
    a_ok: bool
    f_ok: bool
    notes: list = field(default_factory=list)


@dataclass
class ResidualReport:
    levels: np.ndarray
    values: np.ndarray
    trusted: np.ndarray
    residual_max: float
    warnings: list = field(default_factory=list)


@dataclass
class SolveReport:
    v: object
    u: object
    min_pivot: float
    residual_max: float
    warnings: list
    residual: ResidualReport
    method: str = "direct"
    iterations: int | None = None
    picard_norms: list = field(default_factory=list)
    head_truncation_estimate: float = 0.0
    decay: DecayReport | None = None


# --- pivots ----------------------------------------------------------------


def _pivot_scale(q: float, alpha: float, levels) -> np.ndarray:
    return q**-alpha * np.power(q, alpha * np.asarray(levels, dtype=float))


def _head_levels(q: float, alpha: float, n_min: int, a0_norm: float):
    """Head levels where the pivot still differs from 1 in double precision."""
    if a0_norm == 0:
        return np.array([], dtype=int)
    # q**-alpha * |a0| * q**(alpha k) < eps  <=>  k < log_q(eps / |a0|) / alpha + 1
    k_low = math.floor(math.log(_HEAD_NEGLIGIBLE / a0_norm, q) / alpha + 1) - 1
    k_low = max(k_low, n_min - _HEAD_MAX_LEVELS)
    return np.arange(k_low, n_min)


def _scalar_pivots(problem: CauchyProblem):
    q, alpha = float(problem.fp.q), problem.order.alpha
    levels = problem.grid.levels
    grid_piv = 1 + _pivot_scale(q, alpha, levels) * problem.a.values
    head = _head_levels(q, alpha, problem.grid.n_min, abs(problem.a.value_at_zero))
    head_piv = 1 + _pivot_scale(q, alpha, head) * problem.a.value_at_zero
    return levels, grid_piv, head, head_piv


def _matrix_pivots(problem: MatrixCauchyProblem):
    q, alpha = float(problem.fp.q), problem.order.alpha
    levels = problem.grid.levels
    eye = np.eye(problem.dim)
    grid_piv = eye + _pivot_scale(q, alpha, levels)[:, None, None] * problem.a.values
    a0 = problem.a.value_at_zero
    head = _head_levels(q, alpha, problem.grid.n_min, float(np.linalg.norm(a0, 2)))
    head_piv = eye + _pivot_scale(q, alpha, head)[:, None, None] * a0
    return levels, grid_piv, head, head_piv


def _smallest_singular(mats: np.ndarray) -> np.ndarray:
    if mats.shape[0] == 0:
        return np.array([])
    return np.linalg.svd(mats, compute_uv=False)[:, -1]


def check_spectral_condition(problem) -> SpectralReport:
    """Check that no pivot vanishes, on the grid and on the head below it.

    Scalar problems report ``min |1 + q**-alpha a(q**n) q**(alpha n)|``; matrix
    problems report the smallest singular value of the pivot matrices.
    """
    if isinstance(problem, MatrixCauchyProblem):
        levels, grid_piv, head, head_piv = _matrix_pivots(problem)
        sizes = np.concatenate([_smallest_singular(head_piv), _smallest_singular(grid_piv)])
    else:
        levels, grid_piv, head, head_piv = _scalar_pivots(problem)
        sizes = np.abs(np.concatenate([head_piv, grid_piv]))
    all_levels = np.concatenate([head, levels])
    min_pivot = float(sizes.min()) if sizes.size else 1.0
    offending = [int(n) for n, s in zip(all_levels, sizes) if s < PIVOT_TOL]
    warn = [int(n) for n, s in zip(all_levels, sizes) if PIVOT_TOL <= s < PIVOT_WARN]
    return SpectralReport(not offending, min_pivot, offending, warn)


def _raise_if_singular(report: SpectralReport, problem):
    if report.ok:
        return
    level = report.offending_levels[0]
    if isinstance(problem, MatrixCauchyProblem):
        msg = (
            f"pivot matrix at level {level} is singular (smallest singular value "
            f"{report.min_pivot:.3e}): the spectrum of a meets -q**(alpha m)"
        )
    else:
        msg = (
            f"pivot vanishes at level {level} (|pivot| = {report.min_pivot:.3e}): "
            f"a(q**n) = -q**(alpha m) is excluded"
        )
    raise SingularPivotError(level, report.min_pivot, msg)


# --- decay -----------------------------------------------------------------


def check_decay_hypothesis(problem: CauchyProblem, eps: float = DECAY_EPS) -> DecayReport:
    """Empirical test of ``|a| <= C |x|**-(alpha+eps)``, ``|f| <= C |x|**-eps`` for ``|x| > 1``.

    The constants are fitted as the smallest ``C`` valid on the positive grid
    levels.  The bound is declared violated when a tail does not vanish or
    when ``log(|g(q**n)| q**(rate n))`` still grows along the positive levels
    at more than half the rate ``eps log q``, i.e. the data do not decay
    within the window.
    """
    if not eps > 0:
        raise ValueError(f"eps must be positive, got {eps!r}")
    q, alpha = float(problem.fp.q), problem.order.alpha
    notes: list = []
    C_a, a_ok = _fit_envelope(problem.a, alpha + eps, eps, q, "a", notes)
    C_f, f_ok = _fit_envelope(problem.f, eps, eps, q, "f", notes)
    return DecayReport(a_ok and f_ok, eps, C_a, C_f, a_ok, f_ok, notes)


def _fit_envelope(u: RadialFunction, rate: float, eps: float, q: float, name: str, notes: list):
    if not u.tail.vanishes:
        notes.append(f"{name} has a non-vanishing {u.tail.kind} tail")
        return math.inf, False
    levels = u.levels
    mask = levels > 0
    mags = np.abs(u.values[mask])
    if mags.size == 0 or not np.any(mags > 0):
        return 0.0, True
    pos = levels[mask].astype(float)
    env = mags * np.power(q, rate * pos)
    C = float(env.max())
    nz = env > 0
    if nz.sum() >= 2:
        slope = float(np.polyfit(pos[nz], np.log(env[nz]), 1)[0])
        if slope > 0.5 * eps * math.log(q):
            notes.append(
                f"{name}: envelope |{name}| q**({rate:g} n) grows along the window "
                f"(log-slope {slope:.3g} per level)"
            )
            return C, False
    return C, True


# --- inner integrals -------------------------------------------------------


class _InnerIntegral:
    """Running evaluation of ``G_n[v]``, the part of ``(I^alpha v)(q**n)`` over ``|y| < q**n``.

    Off the log branch ``G_n = c_alpha (1 - 1/q) q**(alpha n) (p_n - r_n)`` with
    ``p_n = sum_{k<n} q**(k-n) v_k`` and ``r_n = sum_{k<n} q**(alpha (k-n)) v_k``.
    On it ``G_n = -((q-1)/q)**2 q**n e_n`` with ``e_n = sum_{k<n} (n-k) q**(k-n) v_k``.
    All three obey first-order recursions in ``n``; the head ``v_k = v0`` for
    ``k < n_min`` enters through their initial values.
    """

    def __init__(self, q: float, order: AlphaOrder, n_min: int, v0):
        self.q = q
        self.alpha = order.alpha
        self.log = order.is_log_branch
        self.n = n_min
        v0 = np.asarray(v0, dtype=complex)
        self.p = v0 / (q - 1)
        if self.log:
            self.e = v0 * q / (q - 1) ** 2
            self.factor = -(((q - 1) / q) ** 2)
        else:
            self.r = v0 / (q**self.alpha - 1)
            self.factor = constants(int(q), order).c_alpha * (1 - 1 / q)

    def value(self):
        if self.log:
            return self.factor * self.q**self.n * self.e
        return self.factor * self.q ** (self.alpha * self.n) * (self.p - self.r)

    def push(self, v_n):
        """Advance from level ``n`` to ``n + 1`` after ``v(q**n)`` is known."""
        q = self.q
        if self.log:
            self.e = (self.e + self.p + v_n) / q
        else:
            self.r = (self.r + v_n) * q**-self.alpha
        self.p = (self.p + v_n) / q
        self.n += 1


def _head_weight(q: float, order: AlphaOrder, n: int, n_min: int) -> float:
    """``|c| * int_{|y| < q**n_min} |kernel(q**n, y)| dy``: weight of the head in ``G_n``."""
    if order.is_log_branch:
        integral = math.log(q) * q ** (n_min - 1) * (n - n_min + 1 + 1 / (q - 1))
        return abs((1 - q) / (q * math.log(q))) * integral
    alpha = order.alpha
    integral = q ** (n * (alpha - 1)) * q ** (n_min - 1) - (1 - 1 / q) * q ** (alpha * n_min) / (q**alpha - 1)
    return abs(constants(int(q), order).c_alpha * integral)


# --- scalar solvers --------------------------------------------------------


def _rhs(problem: CauchyProblem):
    F = problem.f.values - problem.a.values * problem.u0
    F0 = problem.f.value_at_zero - problem.a.value_at_zero * problem.u0
    return F, F0


def _sweep(problem: CauchyProblem, pivots: np.ndarray, F: np.ndarray, F0: complex) -> np.ndarray:
    q = float(problem.fp.q)
    inner = _InnerIntegral(q, problem.order, problem.grid.n_min, F0)
    a = problem.a.values
    v = np.empty_like(F)
    for i in range(F.shape[0]):
        v[i] = (F[i] - a[i] * inner.value()) / pivots[i]
        inner.push(v[i])
    return v


def _apply_kernel(problem: CauchyProblem, pivots: np.ndarray, v: np.ndarray, v0: complex) -> np.ndarray:
    """``(K v)(q**n) = a(q**n) G_n[v] / pivot(n)`` with the head fixed at ``v0``."""
    q = float(problem.fp.q)
    inner = _InnerIntegral(q, problem.order, problem.grid.n_min, v0)
    a = problem.a.values
    out = np.empty_like(v)
    for i in range(v.shape[0]):
        out[i] = a[i] * inner.value() / pivots[i]
        inner.push(v[i])
    return out


def _v_tail(problem: CauchyProblem, v: np.ndarray, warnings: list) -> Tail:
    if problem.a.tail.vanishes:
        # a = 0 above the grid, so there v = f
        return problem.f.tail
    warnings.append(
        "coefficient a does not vanish above the grid; v is continued by its top value"
    )
    return Tail.constant(v[-1])


def _finish(problem: CauchyProblem, v_vals, pivots, min_pivot, method, warnings, **extra) -> SolveReport:
    F, F0 = _rhs(problem)
    v = RadialFunction(problem.grid, v_vals, F0, _v_tail(problem, v_vals, warnings))
    w = apply_I(problem.fp, v, problem.order)
    u = w + problem.u0
    res = _residual_from_parts(problem, w)
    decay = check_decay_hypothesis(problem)
    if not decay.satisfied:
        warnings.append(NON_DECAYING_WARNING)
        warnings.extend(decay.notes)
    warnings.extend(res.warnings)

    q, order = float(problem.fp.q), problem.order
    n_min = problem.grid.n_min
    variation = abs(v_vals[0] - F0)
    head_est = 0.0
    if variation > 0:
        weights = np.array([_head_weight(q, order, int(n), n_min) for n in problem.grid.levels])
        head_est = float(np.max(np.abs(problem.a.values / pivots) * weights) * variation)

    return SolveReport(
        v=v,
        u=u,
        min_pivot=min_pivot,
        residual_max=res.residual_max,
        warnings=warnings,
        residual=res,
        method=method,
        head_truncation_estimate=head_est,
        decay=decay,
        **extra,
    )


def _prepare(problem: CauchyProblem):
    report = check_spectral_condition(problem)
    _raise_if_singular(report, problem)
    warnings = []
    if report.warn_levels:
        warnings.append(
            f"ill-conditioned pivots at levels {report.warn_levels} (min {report.min_pivot:.3e})"
        )
    _, pivots, _, _ = _scalar_pivots(problem)
    return pivots, report.min_pivot, warnings


def solve_direct(problem: CauchyProblem) -> SolveReport:
    """Solve by one upward sweep over the levels (forward substitution)."""
    pivots, min_pivot, warnings = _prepare(problem)
    F, F0 = _rhs(problem)
    v = _sweep(problem, pivots, F, F0)
    return _finish(problem, v, pivots, min_pivot, "direct", warnings)


def solve_picard(problem: CauchyProblem, max_iter: int = 1000, tol: float = 1e-15) -> SolveReport:
    """Successive substitution ``v <- F/pivot - K v`` starting from ``F/pivot``.

    Stops once the sup-norm change drops to ``tol * max(1, |v|_inf)``.  The
    sequence of changes is returned in ``picard_norms``.
    """
    pivots, min_pivot, warnings = _prepare(problem)
    F, F0 = _rhs(problem)
    base = F / pivots
    v = base.copy()
    norms = []
    for it in range(1, max_iter + 1):
        new = base - _apply_kernel(problem, pivots, v, F0)
        delta = float(np.max(np.abs(new - v))) if v.size else 0.0
        norms.append(delta)
        v = new
        if delta <= tol * max(1.0, float(np.max(np.abs(v)))):
            return _finish(problem, v, pivots, min_pivot, "picard", warnings, iterations=it, picard_norms=norms)
    raise NoConvergenceError(max_iter, norms[-1])


def _residual_from_parts(problem: CauchyProblem, w: RadialFunction) -> ResidualReport:
    """Residual of ``u = u0 + w``; the constant is never added before differentiating."""
    dw = apply_D(problem.fp, w, problem.order)
    values = dw.values + problem.a.values * (problem.u0 + w.values) - problem.f.values
    return _package_residual(problem.grid, problem.order, values)


def _package_residual(grid, order, values) -> ResidualReport:
    levels = grid.levels
    m = trust_margin(order)
    trusted = (levels >= grid.n_min + m) & (levels <= grid.n_max - m)
    mags = np.abs(values) if values.ndim == 1 else np.max(np.abs(values), axis=1)
    notes = []
    if trusted.any():
        rmax = float(mags[trusted].max())
    else:
        rmax = float(mags.max())
        notes.append(f"grid narrower than 2*{m} levels: residual is not certified anywhere")
    return ResidualReport(levels, values, trusted, rmax, notes)


def residual(problem: CauchyProblem, u: RadialFunction) -> ResidualReport:
    """``D^alpha u + a u - f`` per level; trusted at least ``ceil(20/alpha)`` levels from the edges."""
    u = check_radial(u)
    if u.grid != problem.grid:
        raise ValueError(f"u lives on {u.grid}, the problem on {problem.grid}")
    du = apply_D(problem.fp, u, problem.order)
    values = du.values + problem.a.values * u.values - problem.f.values
    return _package_residual(problem.grid, problem.order, values)


# --- matrix solver ---------------------------------------------------------


def solve_matrix(problem: MatrixCauchyProblem) -> SolveReport:
    """Vector-valued sweep with ``d x d`` pivot solves at every level."""
    report = check_spectral_condition(problem)
    _raise_if_singular(report, problem)
    warnings = []
    if report.warn_levels:
        warnings.append(
            f"ill-conditioned pivots at levels {report.warn_levels} (min {report.min_pivot:.3e})"
        )
    _, pivots, _, _ = _matrix_pivots(problem)
    a = problem.a.values
    u0 = problem.u0
    F = problem.f_matrix() - np.einsum("lij,j->li", a, u0)
    F0 = np.array([fi.value_at_zero for fi in problem.f]) - problem.a.value_at_zero @ u0

    q = float(problem.fp.q)
    inner = _InnerIntegral(q, problem.order, problem.grid.n_min, F0)
    v = np.empty_like(F)
    for i in range(F.shape[0]):
        v[i] = np.linalg.solve(pivots[i], F[i] - a[i] @ inner.value())
        inner.push(v[i])

    zero_tail = problem.a.tail_kind == "zero" or not np.any(problem.a.tail_value)
    if not zero_tail:
        warnings.append("coefficient a does not vanish above the grid; v is continued by its top value")
    vs, ws = [], []
    for j in range(problem.dim):
        tail = problem.f[j].tail if zero_tail else Tail.constant(v[-1, j])
        vj = RadialFunction(problem.grid, v[:, j], F0[j], tail)
        vs.append(vj)
        ws.append(apply_I(problem.fp, vj, problem.order))
    us = tuple(w + u0[j] for j, w in enumerate(ws))

    dws = np.stack([apply_D(problem.fp, w, problem.order).values for w in ws], axis=1)
    wvals = np.stack([w.values for w in ws], axis=1)
    res_vals = dws + np.einsum("lij,lj->li", a, u0[None, :] + wvals) - problem.f_matrix()
    res = _package_residual(problem.grid, problem.order, res_vals)
    warnings.extend(res.warnings)
    return SolveReport(
        v=tuple(vs),
        u=us,
        min_pivot=report.min_pivot,
        residual_max=res.residual_max,
        warnings=warnings,
        residual=res,
        method="matrix",
    )


def scalar_as_matrix(problem: CauchyProblem) -> MatrixCauchyProblem:
    """The same problem viewed as a ``1 x 1`` system."""
    return MatrixCauchyProblem(
        problem.fp,
        problem.order,
        MatrixRadialFunction.from_scalar(problem.a),
        (problem.f,),
        np.array([problem.u0]),
    )


def random_decaying_problem(rng: np.random.Generator, q: int, alpha: float,
                            n_min: int = -30, n_max: int = 30, amplitude: float = 0.5,
                            u0: complex = 0j) -> CauchyProblem:
    """Random data obeying ``|a| <= q**(-n(alpha+1/2))``, ``|f| <= q**(-n/2)`` for ``n > 0``.

    Both vanish above the grid.  Near zero the data are continuous:
    ``a(q**n) = a(0) + O(q**n)``.
    """
    levels = np.arange(n_min, n_max + 1)

    def noise(size):
        return rng.uniform(-1, 1, size) + 1j * rng.uniform(-1, 1, size)

    a0 = amplitude * noise(1)[0] / math.sqrt(2)
    f0 = noise(1)[0]
    neg = levels <= 0
    pos = ~neg
    a_vals = np.empty(levels.size, dtype=complex)
    f_vals = np.empty(levels.size, dtype=complex)
    lv = levels[neg].astype(float)
    a_vals[neg] = a0 + 0.5 * amplitude * noise(neg.sum()) / math.sqrt(2) * np.power(float(q), lv)
    f_vals[neg] = f0 + 0.5 * noise(neg.sum()) * np.power(float(q), lv)
    lp = levels[pos].astype(float)
    a_vals[pos] = amplitude * noise(pos.sum()) / math.sqrt(2) * np.power(float(q), -lp * (alpha + 0.5))
    f_vals[pos] = noise(pos.sum()) / math.sqrt(2) * np.power(float(q), -lp / 2)
    grid = (n_min, n_max)
    a = RadialFunction(grid, a_vals, a0, Tail.zero())
    f = RadialFunction(grid, f_vals, f0, Tail.zero())
    return CauchyProblem(q, alpha, a, f, u0)


def linear_combination(problems: Sequence[CauchyProblem], weights) -> CauchyProblem:
    """Problem with the same ``a`` and ``f = sum w_i f_i``, ``u0 = sum w_i u0_i``."""
    base = problems[0]
    f = sum((p.f * w for p, w in zip(problems, weights)), start=base.f * 0)
    u0 = sum(p.u0 * w for p, w in zip(problems, weights))
    return CauchyProblem(base.fp, base.order, base.a, f, u0)
