import numpy as np
import pytest

from radialfrac.cauchy import (
    NON_DECAYING_WARNING,
    CauchyProblem,
    MatrixCauchyProblem,
    check_decay_hypothesis,
    check_spectral_condition,
    linear_combination,
    random_decaying_problem,
    residual,
    scalar_as_matrix,
    solve_direct,
    solve_matrix,
    solve_picard,
)
from radialfrac.exceptions import NoConvergenceError, SingularPivotError
from radialfrac.radial import MatrixRadialFunction, RadialFunction, Tail, constant_function
from radialfrac.riesz import apply_I
from radialfrac.verification import fit_picard_offset


def zeros(grid):
    return constant_function(grid, 0.0)


def test_problem_validation():
    g = (-3, 3)
    with pytest.raises(ValueError):
        CauchyProblem(2, 1.0, zeros(g), zeros((-2, 3)))
    power = apply_I(2, constant_function(g, 1.0) * 0 + RadialFunction(g, [0, 0, 1, 0, 0, 0, 0], 0, Tail.zero()), 0.5)
    with pytest.raises(ValueError):
        CauchyProblem(2, 0.5, zeros(g), power)


# --- spectral condition ------------------------------------------------------


def test_zero_coefficient_has_unit_pivots():
    rep = check_spectral_condition(CauchyProblem(2, 0.5, zeros((-5, 5)), zeros((-5, 5))))
    assert rep.ok and rep.min_pivot == 1


def test_constructed_singular_pivot():
    g = (-5, 5)
    p = CauchyProblem(2, 1.0, constant_function(g, -2.0), constant_function(g, 1.0))
    rep = check_spectral_condition(p)
    assert not rep.ok and 0 in rep.offending_levels
    with pytest.raises(SingularPivotError) as info:
        solve_direct(p)
    assert info.value.level == 0
    assert "level 0" in str(info.value)
    with pytest.raises(SingularPivotError):
        solve_picard(p)


def test_singular_pivot_in_the_head_is_detected():
    # a(0) = -q**(alpha) * q**(-alpha n0) hits a level below the grid
    q, alpha, n0 = 2, 1.0, -8
    a0 = -(q**alpha) * q ** (-alpha * n0)
    g = (-3, 3)
    p = CauchyProblem(q, alpha, RadialFunction(g, np.zeros(7), a0, Tail.zero()), zeros(g))
    with pytest.raises(SingularPivotError) as info:
        solve_direct(p)
    assert info.value.level == n0


def test_near_singular_pivot_warns():
    g = (-5, 5)
    p = CauchyProblem(2, 1.0, constant_function(g, -2.0 + 1e-7), constant_function(g, 1.0))
    rep = check_spectral_condition(p)
    assert rep.ok and 0 in rep.warn_levels
    assert any("ill-conditioned" in w for w in solve_direct(p).warnings)


# --- direct solver -----------------------------------------------------------


def test_zero_coefficient_gives_v_equal_f():
    rng = np.random.default_rng(1)
    g = (-10, 10)
    f = RadialFunction(g, rng.normal(size=21), 0.5, Tail.zero())
    rep = solve_direct(CauchyProblem(3, 0.5, zeros(g), f))
    assert rep.v == f
    assert np.array_equal(rep.u.values, apply_I(3, f, 0.5).values)


def test_zero_data_gives_zero_solution():
    g = (-10, 10)
    p = CauchyProblem(2, 2.0, constant_function(g, 0.3), zeros(g))
    rep = solve_direct(p)
    assert np.all(rep.v.values == 0) and np.all(rep.u.values == 0)


def test_frozen_solution_values():
    p = random_decaying_problem(np.random.default_rng(2024), 3, 0.5, -20, 20, u0=0.25)
    rep = solve_direct(p)
    expected = {
        -20: ((-0.41217882115047355 + 0.6494331939916486j), (0.24999999999999944 + 3.320339236116101e-16j)),
        0: ((-0.37885072566380396 + 0.8228854833867049j), (0.2839729367457086 + 0.12123622117222307j)),
        5: ((-0.04134170244995817 - 0.02532966369557537j), (0.653424909307694 - 0.7290544746495484j)),
        20: ((6.710271358374201e-06 - 2.634566749135325e-06j), (3.484092779219931 - 1.8484900859071336j)),
    }
    for n, (v, u) in expected.items():
        assert rep.v.eval_at_level(n) == pytest.approx(v, rel=1e-12)
        assert rep.u.eval_at_level(n) == pytest.approx(u, rel=1e-12)
    assert rep.min_pivot == pytest.approx(0.9078147429108938, rel=1e-14)


def test_value_at_zero_of_v():
    p = random_decaying_problem(np.random.default_rng(4), 2, 1.0, u0=1 - 2j)
    rep = solve_direct(p)
    assert rep.v.value_at_zero == p.f.value_at_zero - p.a.value_at_zero * p.u0
    assert rep.u.value_at_zero == p.u0


@pytest.mark.parametrize("q, alpha", [(2, 0.5), (3, 1.0), (2, 2.0), (5, 1.5), (7, 0.3)])
def test_strong_solution_residual(q, alpha):
    p = random_decaying_problem(np.random.default_rng(q * 100 + int(alpha * 10)), q, alpha, -50, 50, u0=0.5)
    rep = solve_direct(p)
    assert rep.decay.satisfied
    assert NON_DECAYING_WARNING not in rep.warnings
    assert rep.residual_max <= 1e-8
    # direct evaluation of D u + a u - f agrees with the split computation
    direct = residual(p, rep.u)
    assert direct.residual_max <= 1e-8 * max(1, np.max(np.abs(rep.u.values)))


def test_volterra_causality_for_a_and_f():
    p = random_decaying_problem(np.random.default_rng(8), 2, 0.7, -15, 15)
    base = solve_direct(p).v.values
    for i in (3, 15, 29):
        f = p.f.values.copy()
        a = p.a.values.copy()
        f[i + 1:] += 0.7
        a[i + 1:] *= 1.5
        for data in ((p.a, RadialFunction(p.grid, f, p.f.value_at_zero, p.f.tail)),
                     (RadialFunction(p.grid, a, p.a.value_at_zero, p.a.tail), p.f)):
            v = solve_direct(CauchyProblem(p.fp, p.order, *data, p.u0)).v.values
            assert v[: i + 1].tobytes() == base[: i + 1].tobytes()


def test_linearity_in_f():
    rng = np.random.default_rng(12)
    p1 = random_decaying_problem(rng, 3, 0.5)
    p2 = CauchyProblem(p1.fp, p1.order, p1.a, random_decaying_problem(rng, 3, 0.5).f)
    combo = linear_combination([p1, p2], [1.0, 1.0])
    lhs = solve_direct(combo).u.values
    rhs = solve_direct(p1).u.values + solve_direct(p2).u.values
    assert np.max(np.abs(lhs - rhs)) <= 1e-12 * max(1, np.max(np.abs(lhs)))


def test_bounded_running_sup_of_v():
    # V_n = sup_{m <= n} |v(q**m)| stops growing once the data have decayed
    p = random_decaying_problem(np.random.default_rng(21), 2, 1.5, -30, 40)
    v = np.abs(solve_direct(p).v.values)
    V = np.maximum.accumulate(v)
    assert np.all(V[-20:] == V[-1])


def test_head_truncation_estimate_is_reported():
    p = random_decaying_problem(np.random.default_rng(2), 2, 0.5, -20, 20)
    rep = solve_direct(p)
    assert 0 < rep.head_truncation_estimate < 1e-3


# --- Picard ------------------------------------------------------------------


def test_picard_zero_coefficient_single_iteration():
    g = (-5, 5)
    f = RadialFunction(g, np.arange(11.0), 1.0, Tail.zero())
    rep = solve_picard(CauchyProblem(2, 1.0, zeros(g), f))
    assert rep.iterations == 1 and rep.v == f


@pytest.mark.parametrize("q, alpha", [(3, 0.5), (2, 2.0), (2, 1.0)])
def test_picard_agrees_with_direct(q, alpha):
    p = random_decaying_problem(np.random.default_rng(99), q, alpha, u0=0.1j)
    d, pc = solve_direct(p), solve_picard(p)
    assert np.max(np.abs(d.v.values - pc.v.values)) <= 1e-10
    assert pc.method == "picard" and pc.iterations == len(pc.picard_norms)


def test_picard_iteration_count_is_frozen():
    p = random_decaying_problem(np.random.default_rng(2024), 3, 0.5, -20, 20, u0=0.25)
    assert solve_picard(p).iterations == 9


def test_picard_norms_decay_superexponentially():
    p = random_decaying_problem(np.random.default_rng(7), 2, 2.0)
    norms = solve_picard(p).picard_norms
    assert fit_picard_offset(norms, 2, 2.0) is not None
    ratios = [b / a for a, b in zip(norms, norms[1:]) if a > 0]
    # contraction factors shrink along the run, not merely stay below one
    assert ratios[-1] < ratios[0] / 4


def test_fit_picard_offset_on_synthetic_sequences():
    q, alpha = 2, 1.0
    exact = [q ** (-alpha * m * (m + 1) / 2) for m in range(10)]
    assert fit_picard_offset(exact, q, alpha) == 0
    late = [1.0, 1.0, 1.0] + [q ** (-alpha * m * (m + 1) / 2) for m in range(8)]
    # stalls at m = 0..2 (ratios 1), then the exact shape: m0 = 2 is the first offset that fits
    assert fit_picard_offset(late, q, alpha) == 2
    geometric = [0.5**m for m in range(12)]
    assert fit_picard_offset(geometric, q, alpha) is None


def test_picard_budget_exhaustion():
    p = random_decaying_problem(np.random.default_rng(7), 2, 0.5)
    with pytest.raises(NoConvergenceError) as info:
        solve_picard(p, max_iter=2)
    assert info.value.iterations == 2


# --- decay hypothesis --------------------------------------------------------


def test_decay_examples():
    g = (-10, 10)
    rep = check_decay_hypothesis(CauchyProblem(2, 1.0, zeros(g), RadialFunction(g, np.zeros(21), 0, Tail.zero())))
    assert rep.satisfied and rep.C_a == 0 and rep.C_f == 0
    levels = np.arange(-10, 11)
    f = RadialFunction(g, np.where(levels >= 0, 2.0 ** -levels, 1.0), 1.0, Tail.zero())
    assert check_decay_hypothesis(CauchyProblem(2, 1.0, zeros(g), f), eps=0.5).satisfied
    one = CauchyProblem(2, 1.0, zeros(g), constant_function(g, 1.0))
    for eps in (1e-3, 0.5, 2.0):
        assert not check_decay_hypothesis(one, eps=eps).satisfied
    with pytest.raises(ValueError):
        check_decay_hypothesis(one, eps=0)


def test_growing_data_inside_window_violates_decay():
    g = (-10, 30)
    levels = np.arange(-10, 31)
    f = RadialFunction(g, np.where(levels > 0, 1.1 ** levels, 1.0), 1.0, Tail.zero())
    assert not check_decay_hypothesis(CauchyProblem(2, 1.0, zeros(g), f)).satisfied


def test_non_decaying_data_are_flagged():
    g = (-30, 30)
    rep = solve_direct(CauchyProblem(2, 1.0, zeros(g), constant_function(g, 1.0)))
    assert np.all(rep.u.values == 0)
    assert rep.residual_max == pytest.approx(1.0)
    assert NON_DECAYING_WARNING in rep.warnings


def test_residual_of_zero_solution():
    g = (-30, 30)
    p = CauchyProblem(2, 0.5, constant_function(g, 0.7), zeros(g))
    assert residual(p, zeros(g)).residual_max == 0
    with pytest.raises(ValueError):
        residual(p, zeros((-3, 3)))


def test_residual_narrow_grid_not_certified():
    g = (-3, 3)
    rep = solve_direct(CauchyProblem(2, 0.5, zeros(g), zeros(g)))
    assert any("not certified" in w for w in rep.warnings)


# --- matrix solver -----------------------------------------------------------


def test_matrix_d1_reduces_to_scalar():
    p = random_decaying_problem(np.random.default_rng(3), 3, 0.5, u0=0.2 + 0.1j)
    s, m = solve_direct(p), solve_matrix(scalar_as_matrix(p))
    assert np.max(np.abs(m.v[0].values - s.v.values)) <= 1e-12
    scale = max(1, np.max(np.abs(s.u.values)))
    assert np.max(np.abs(m.u[0].values - s.u.values)) <= 1e-12 * scale
    assert m.min_pivot == s.min_pivot


def test_diagonal_system_decouples():
    rng = np.random.default_rng(13)
    ps = [random_decaying_problem(rng, 2, 1.5, -25, 25, u0=c) for c in (0.5, -1j, 2.0)]
    grid = ps[0].grid
    vals = np.zeros((grid.size, 3, 3), dtype=complex)
    for k, p in enumerate(ps):
        vals[:, k, k] = p.a.values
    at_zero = np.diag([p.a.value_at_zero for p in ps])
    mp = MatrixCauchyProblem(2, 1.5, MatrixRadialFunction(grid, vals, at_zero), tuple(p.f for p in ps),
                             np.array([p.u0 for p in ps]))
    rep = solve_matrix(mp)
    for k, p in enumerate(ps):
        s = solve_direct(p)
        assert np.max(np.abs(rep.v[k].values - s.v.values)) <= 1e-12
        assert np.max(np.abs(rep.u[k].values - s.u.values)) <= 1e-12 * max(1, np.max(np.abs(s.u.values)))
    assert rep.residual_max <= 1e-8


def test_coupled_system_residual():
    rng = np.random.default_rng(5)
    p = random_decaying_problem(rng, 3, 0.8, -40, 40)
    grid = p.grid
    vals = np.zeros((grid.size, 2, 2), dtype=complex)
    vals[:, 0, 0] = p.a.values
    vals[:, 1, 1] = 0.5 * p.a.values
    vals[:, 0, 1] = 0.3 * p.a.values
    vals[:, 1, 0] = -0.2 * p.a.values
    a0 = p.a.value_at_zero * np.array([[1, 0.3], [-0.2, 0.5]])
    mp = MatrixCauchyProblem(3, 0.8, MatrixRadialFunction(grid, vals, a0), (p.f, p.f * 1j), np.array([1.0, 0.0]))
    rep = solve_matrix(mp)
    assert rep.residual_max <= 1e-8


def test_matrix_singular_eigenvalue():
    q, alpha, n0 = 2, 1.0, 1
    g = (-3, 3)
    lam = -(q**alpha) * q ** (-alpha * n0)
    vals = np.zeros((7, 2, 2), dtype=complex)
    vals[:, 0, 0] = 0.1
    vals[n0 + 3] = np.array([[lam, 0.0], [0.0, 0.2]])
    mp = MatrixCauchyProblem(q, alpha, MatrixRadialFunction(g, vals, np.diag([0.1, 0])), (zeros(g), zeros(g)), np.zeros(2))
    with pytest.raises(SingularPivotError) as info:
        solve_matrix(mp)
    assert info.value.level == n0


def test_matrix_problem_validation():
    g = (-2, 2)
    a = MatrixRadialFunction(g, np.zeros((5, 2, 2)), np.zeros((2, 2)))
    with pytest.raises(ValueError):
        MatrixCauchyProblem(2, 1.0, a, (zeros(g),), np.zeros(2))
    with pytest.raises(ValueError):
        MatrixCauchyProblem(2, 1.0, a, (zeros(g), zeros(g)), np.zeros(3))
