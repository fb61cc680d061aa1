"""Acceptance checks, runnable from pytest and from ``radialfrac verify``.

Each check is a pure function returning a :class:`CriterionResult`; random
inputs come from fixed seeds so that runs are reproducible.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from . import local_field as lf
from .cauchy import (
    NON_DECAYING_WARNING,
    CauchyProblem,
    random_decaying_problem,
    scalar_as_matrix,
    solve_direct,
    solve_matrix,
    solve_picard,
)
from .exceptions import SingularPivotError
from .radial import LevelGrid, RadialFunction, Tail, constant_function
from .riesz import (
    apply_D,
    apply_I,
    moment_coefficient,
    moment_integral_closed,
    verify_inverse_identity,
)

__all__ = ["CriterionResult", "CRITERIA", "run_criteria", "format_result", "fit_picard_offset"]


@dataclass(frozen=True)
class CriterionResult:
    number: int
    title: str
    passed: bool
    detail: str


def _rel(a, b) -> float:
    return abs(a - b) / abs(b)


def _sup_rel(x, ref) -> float:
    """Sup-norm error relative to the sup norm of the reference (u grows like q**(n(alpha-1)))."""
    return float(np.max(np.abs(x - ref)) / max(np.max(np.abs(ref)), 1e-300))


def criterion_integration() -> CriterionResult:
    worst_rel = 0.0
    worst_log = 0.0  # error divided by its allowance
    for q in (2, 3, 5, 7):
        fp = lf.FieldParams(q)
        lq = math.log(q)
        for n in range(-8, 9):
            ones = lambda k: 1.0  # noqa: E731
            ball = lf.radial_sum_to_minus_infinity(fp, ones, n).real
            ball_below = lf.radial_sum_to_minus_infinity(fp, ones, n - 1).real
            worst_rel = max(
                worst_rel,
                _rel(lf.ball_volume(fp, n), ball),
                _rel(lf.sphere_volume(fp, n), ball - ball_below),
                _rel(lf.sector_volume_fixed_digit(fp, n), ball_below),
            )
            excluded = lf.sphere_volume(fp, n) - ball_below
            # vanishes for q = 2, so measure the error against the sphere scale
            worst_rel = max(worst_rel, abs(lf.sector_volume_excluded_digit(fp, n) - excluded) / q**n)

            allowance = 1e-10 * q**n * lq * max(1, abs(n))
            log_ball = lf.radial_sum_to_minus_infinity(fp, lambda k: k * lq, n).real
            log_sphere = lf.shifted_sphere_decomposition(fp, lambda k: k * lq, n).real
            worst_log = max(
                worst_log,
                abs(lf.ball_integral_log(fp, n) - log_ball) / allowance,
                abs(lf.sphere_integral_shifted_log(fp, n) - log_sphere) / allowance,
            )
            for alpha in (0.3, 0.5, 1.0, 1.5, 2.0, 3.0):
                power = lambda k: float(q) ** (k * (alpha - 1))  # noqa: E731
                worst_rel = max(
                    worst_rel,
                    _rel(lf.ball_integral_power(fp, alpha, n), lf.radial_sum_to_minus_infinity(fp, power, n).real),
                    _rel(
                        lf.sphere_integral_shifted_power(fp, alpha, n),
                        lf.shifted_sphere_decomposition(fp, power, n).real,
                    ),
                )
    passed = worst_rel <= 1e-10 and worst_log <= 1.0
    return CriterionResult(
        1,
        "integration closed forms vs sphere-decomposition oracle",
        passed,
        f"max rel err {worst_rel:.2e} (tol 1e-10); log cases at {worst_log:.2e} of allowance",
    )


def criterion_constant_annihilated_by_I() -> CriterionResult:
    worst = 0.0
    one = constant_function((-30, 29), 1.0)
    for q in (2, 3, 5):
        for alpha in (0.5, 1.0, 2.0):
            out = apply_I(q, one, alpha)
            worst = max(worst, float(np.max(np.abs(out.values))), abs(out.value_at_zero))
    return CriterionResult(
        2, "I^alpha 1 == 0 on a 60-level grid", worst <= 1e-12, f"max |I 1| = {worst:.2e} (tol 1e-12)"
    )


INVERSE_CASES = [(2, 0.5), (2, 1.0), (2, 2.0), (3, 0.5), (3, 1.0), (3, 2.0), (5, 0.5), (5, 1.0), (5, 2.0), (7, 1.5)]


def random_bump(rng: np.random.Generator, n_low: int, width: int = 5) -> RadialFunction:
    vals = rng.normal(size=width) + 1j * rng.normal(size=width)
    return RadialFunction(LevelGrid(n_low, n_low + width - 1), vals, 0j, Tail.zero())


def criterion_inverse_identity() -> CriterionResult:
    rng = np.random.default_rng(20240303)
    worst = 0.0
    for q, alpha in INVERSE_CASES:
        v = random_bump(rng, int(rng.integers(-6, 3)))
        rep = verify_inverse_identity(q, v, alpha)
        worst = max(worst, rep.max_deviation)
    return CriterionResult(
        3,
        "D^alpha I^alpha v == v for 10 random 5-level bumps",
        worst <= 1e-8,
        f"max interior deviation {worst:.2e} (tol 1e-8)",
    )


def moment_bruteforce(q: int, alpha: float, m: int, n: int) -> float:
    fp = lf.FieldParams(q)
    if abs(alpha - 1) < 1e-12:
        weights = lambda k: (n - k) * math.log(q) * float(q) ** (k * m)  # noqa: E731
    else:
        weights = lambda k: abs(float(q) ** (n * (alpha - 1)) - float(q) ** (k * (alpha - 1))) * float(q) ** (  # noqa: E731
            alpha * m * k
        )
    return lf.radial_sum_to_minus_infinity(fp, weights, n - 1).real


def criterion_moments() -> CriterionResult:
    worst = 0.0
    bound_ok = True
    for q in (2, 3):
        for alpha in (0.5, 1.0, 2.0):
            A = moment_coefficient(q, alpha, 0)
            for m in range(21):
                for n in (-2, 0, 3):
                    worst = max(worst, _rel(moment_integral_closed(q, alpha, m, n), moment_bruteforce(q, alpha, m, n)))
                if moment_coefficient(q, alpha, m) > A * q ** (-alpha * m) * (1 + 1e-12):
                    bound_ok = False
    return CriterionResult(
        4,
        "moment integrals d_{alpha,m} vs brute force, and d_m <= A q^(-alpha m)",
        worst <= 1e-10 and bound_ok,
        f"max rel err {worst:.2e} (tol 1e-10); bound {'holds' if bound_ok else 'FAILS'}",
    )


SOLVER_CASES = [(2, 0.5), (2, 1.0), (2, 2.0), (3, 0.5), (3, 1.0), (3, 2.0), (2, 1.5), (3, 1.5), (5, 1.0), (5, 0.75)]


def _solver_runs():
    rng = np.random.default_rng(777)
    for q, alpha in SOLVER_CASES:
        problem = random_decaying_problem(rng, q, alpha, -60, 60)
        yield problem, solve_direct(problem), solve_picard(problem)


def criterion_solver_cross_validation() -> CriterionResult:
    worst_diff = worst_res = 0.0
    for _, direct, picard in _solver_runs():
        worst_diff = max(worst_diff, float(np.max(np.abs(direct.v.values - picard.v.values))))
        worst_res = max(worst_res, direct.residual_max)
    return CriterionResult(
        5,
        "direct sweep vs Picard, and strong-solution residual",
        worst_diff <= 1e-10 and worst_res <= 1e-8,
        f"max |v_direct - v_picard| {worst_diff:.2e} (tol 1e-10); max residual {worst_res:.2e} (tol 1e-8)",
    )


def fit_picard_offset(norms, q: int, alpha: float, max_offset: int = 3):
    """Smallest ``m0 <= max_offset`` with ``norms[m+1]/norms[m] <= q**(-alpha (m - m0))`` for all ``m >= m0``."""
    norms = list(norms)
    for m0 in range(max_offset + 1):
        ok = True
        for m in range(m0, len(norms) - 1):
            if norms[m] == 0:
                break
            if norms[m + 1] / norms[m] > q ** (-alpha * (m - m0)):
                ok = False
                break
        if ok:
            return m0
    return None


def criterion_picard_decay() -> CriterionResult:
    offsets = []
    for problem, _, picard in _solver_runs():
        offsets.append(fit_picard_offset(picard.picard_norms, problem.fp.q, problem.order.alpha))
    passed = all(m0 is not None for m0 in offsets)
    return CriterionResult(
        6,
        "Picard differences decay superexponentially",
        passed,
        f"fitted offsets m0 = {offsets} (need every m0 <= 3)",
    )


def criterion_causality() -> CriterionResult:
    rng = np.random.default_rng(99)
    mismatches = 0
    checks = 0
    for q, alpha in [(2, 0.5), (3, 1.0), (2, 2.0)]:
        problem = random_decaying_problem(rng, q, alpha, -40, 40)
        base = solve_direct(problem).v.values
        for cut in (-20, 0, 15):
            i = cut - problem.grid.n_min
            f_vals = problem.f.values.copy()
            f_vals[i + 1 :] += rng.normal(size=f_vals.size - i - 1)
            a_vals = problem.a.values.copy()
            a_vals[i + 1 :] *= 1.5
            perturbed = CauchyProblem(
                problem.fp,
                problem.order,
                RadialFunction(problem.grid, a_vals, problem.a.value_at_zero, problem.a.tail),
                RadialFunction(problem.grid, f_vals, problem.f.value_at_zero, problem.f.tail),
                problem.u0,
            )
            v = solve_direct(perturbed).v.values
            checks += 1
            if v[: i + 1].tobytes() != base[: i + 1].tobytes():
                mismatches += 1
    return CriterionResult(
        7,
        "Volterra causality (bitwise)",
        mismatches == 0,
        f"{checks - mismatches}/{checks} perturbations left lower levels bit-identical",
    )


def criterion_spectral() -> CriterionResult:
    grid = (-5, 5)
    problem = CauchyProblem(2, 1.0, constant_function(grid, -2.0), constant_function(grid, 1.0))
    level = None
    try:
        solve_direct(problem)
    except SingularPivotError as exc:
        level = exc.level
    rng = np.random.default_rng(5)
    worst = 0.0
    for q, alpha in [(2, 0.5), (3, 1.0), (2, 2.0)]:
        p = random_decaying_problem(rng, q, alpha, -30, 30, u0=0.3 - 0.2j)
        scalar = solve_direct(p)
        matrix = solve_matrix(scalar_as_matrix(p))
        worst = max(
            worst,
            _sup_rel(matrix.v[0].values, scalar.v.values),
            _sup_rel(matrix.u[0].values, scalar.u.values),
            abs(matrix.min_pivot - scalar.min_pivot),
        )
    passed = level == 0 and worst <= 1e-12
    return CriterionResult(
        8,
        "spectral condition: singular pivot rejected, d=1 matrix == scalar",
        passed,
        f"SingularPivot at level {level} (need 0); d=1 max sup-relative diff {worst:.2e} (tol 1e-12)",
    )


def criterion_non_decaying() -> CriterionResult:
    grid = (-30, 30)
    problem = CauchyProblem(2, 1.0, constant_function(grid, 0.0), constant_function(grid, 1.0))
    report = solve_direct(problem)
    u_max = float(np.max(np.abs(report.u.values)))
    flagged = NON_DECAYING_WARNING in report.warnings
    passed = u_max == 0 and abs(report.residual_max - 1) <= 1e-12 and flagged
    return CriterionResult(
        9,
        "a=0, f=1: u=0, residual 1, flagged as non-strong",
        passed,
        f"max|u| = {u_max:.2e}, residual_max = {report.residual_max!r}, warning {'present' if flagged else 'MISSING'}",
    )


def criterion_dilation() -> CriterionResult:
    rng = np.random.default_rng(31)
    worst = 0.0
    q = 3
    for alpha in (0.5, 2.0):
        vals = np.zeros(21, dtype=complex)
        vals[8:13] = rng.normal(size=5) + 1j * rng.normal(size=5)
        u = RadialFunction((-10, 10), vals, 0j, Tail.zero())
        du, iu = apply_D(q, u, alpha), apply_I(q, u, alpha)
        for j in (-3, 2):
            us = u.shifted(j)
            for got, ref, power in (
                (apply_D(q, us, alpha).values, du.values, alpha * j),
                (apply_I(q, us, alpha).values, iu.values, -alpha * j),
            ):
                expected = float(q) ** power * ref
                nz = expected != 0
                if np.any(got[~nz] != 0):
                    worst = math.inf
                worst = max(worst, float(np.max(np.abs(got[nz] - expected[nz]) / np.abs(expected[nz]))))
    return CriterionResult(
        10,
        "dilation covariance of D^alpha and I^alpha",
        worst <= 1e-12,
        f"max rel err {worst:.2e} (tol 1e-12)",
    )


CRITERIA: dict[int, Callable[[], CriterionResult]] = {
    1: criterion_integration,
    2: criterion_constant_annihilated_by_I,
    3: criterion_inverse_identity,
    4: criterion_moments,
    5: criterion_solver_cross_validation,
    6: criterion_picard_decay,
    7: criterion_causality,
    8: criterion_spectral,
    9: criterion_non_decaying,
    10: criterion_dilation,
}


def run_criteria(numbers=None) -> list:
    numbers = sorted(CRITERIA) if numbers is None else numbers
    return [CRITERIA[k]() for k in numbers]


def format_result(r: CriterionResult) -> str:
    return f"[{'PASS' if r.passed else 'FAIL'}] {r.number:2d}. {r.title}: {r.detail}"
