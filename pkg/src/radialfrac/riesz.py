"""Fractional differentiation ``D^alpha`` and its right inverse ``I^alpha`` on radial functions.

Both operators are evaluated level by level from the increments
``delta_j = u(q**(j+1)) - u(q**j)`` instead of the values themselves.  Writing
``u_k - u_n`` as a sum of increments turns every level sum of the form
``sum_k w(n, k) (u_k - u_n)`` into a handful of running sums that obey
first-order recursions, so an application costs O(L) on an L-level grid.

The increment form has a practical advantage over summing ``u_k`` directly:
constants have no increments, so ``D^alpha c`` and ``I^alpha c`` come out as
exact zeros rather than as differences of large, nearly equal numbers.  Every
running sum is also kept scaled by the appropriate power of ``q**n``, which
keeps intermediate values O(1) on wide grids.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .exceptions import DivergentTailError, LogBranchError, PoleError
from .local_field import as_field, ball_integral_log
from .radial import RadialFunction, Tail, check_radial

__all__ = [
    "AlphaOrder",
    "RieszConstants",
    "as_order",
    "gamma_K",
    "constants",
    "apply_D",
    "apply_I",
    "derivative_at_zero",
    "riesz_potential_at_zero",
    "moment_integral_closed",
    "moment_coefficient",
    "InverseIdentityReport",
    "verify_inverse_identity",
    "trust_margin",
]

LOG_BRANCH_TOL = 1e-12
NEAR_POLE_TOL = 1e-6


@dataclass(frozen=True)
class AlphaOrder:
    """Order ``alpha > 0``; ``alpha == 1`` (within 1e-12) uses logarithmic kernels."""

    alpha: float

    def __post_init__(self):
        alpha = float(self.alpha)
        if not alpha > 0 or not math.isfinite(alpha):
            raise ValueError(f"alpha must be a finite positive number, got {self.alpha!r}")
        object.__setattr__(self, "alpha", alpha)

    @property
    def is_log_branch(self) -> bool:
        return abs(self.alpha - 1.0) < LOG_BRANCH_TOL


def as_order(order) -> AlphaOrder:
    if isinstance(order, AlphaOrder):
        return order
    return AlphaOrder(order)


def gamma_K(fp, s: float) -> float:
    """``(1 - q**(s-1)) / (1 - q**(-s))``; pole at ``s = 0``."""
    q = as_field(fp).q
    s = float(s)
    if s == 0:
        raise PoleError("gamma_K has a pole at s = 0")
    return (1 - q ** (s - 1)) / (1 - q ** (-s))


@dataclass(frozen=True)
class RieszConstants:
    q: int
    alpha: float
    d_alpha: float
    c_alpha_or_none: float | None

    @property
    def is_log_branch(self) -> bool:
        return self.c_alpha_or_none is None

    @property
    def c_alpha(self) -> float:
        if self.c_alpha_or_none is None:
            raise LogBranchError(
                "c_alpha is undefined for alpha = 1; the logarithmic kernel "
                "(1 - q) / (q log q) is used instead"
            )
        return self.c_alpha_or_none

    @property
    def log_kernel_factor(self) -> float:
        """``(1 - q) / (q log q)``, the order-1 counterpart of ``c_alpha``."""
        return (1 - self.q) / (self.q * math.log(self.q))

    def gamma_K(self, s: float) -> float:
        return gamma_K(self.q, s)


def _c_alpha(q: int, alpha: float) -> float:
    den = 1 - q ** (alpha - 1)
    if abs(den) < NEAR_POLE_TOL:
        warnings.warn(
            f"alpha={alpha!r} is within {abs(alpha - 1):.1e} of 1; c_alpha = "
            f"{(1 - q**-alpha) / den:.3e} is numerically unreliable",
            RuntimeWarning,
            stacklevel=3,
        )
    return (1 - q**-alpha) / den


def constants(fp, order) -> RieszConstants:
    q = as_field(fp).q
    order = as_order(order)
    alpha = order.alpha
    d_alpha = (1 - q**alpha) / (1 - q ** (-alpha - 1))
    c_alpha = None if order.is_log_branch else _c_alpha(q, alpha)
    return RieszConstants(q, alpha, d_alpha, c_alpha)


def _increments(u: RadialFunction) -> np.ndarray:
    """``delta_j`` for ``j = n_min - 1, ..., n_max`` (length L + 1)."""
    ext = np.empty(u.grid.size + 2, dtype=complex)
    ext[0] = u.value_at_zero
    ext[1:-1] = u.values
    ext[-1] = u.tail.value(1)
    return np.diff(ext)


def _lower_sums(delta: np.ndarray, q: float, alpha: float):
    """Scaled lower running sums at levels ``n_min .. n_max + 1``.

    ``P_n = sum_{j<n} delta_j q**(j-n)`` and ``Q_n = sum_{j<n} delta_j q**(alpha (j-n))``.
    """
    size = delta.shape[0]
    P = np.empty(size, dtype=complex)
    Q = np.empty(size, dtype=complex)
    rq, rqa = 1.0 / q, q**-alpha
    p = delta[0] * rq
    s = delta[0] * rqa
    P[0], Q[0] = p, s
    for i in range(1, size):
        p = (p + delta[i]) * rq
        s = (s + delta[i]) * rqa
        P[i], Q[i] = p, s
    return P, Q


def _log_sums(delta: np.ndarray, P: np.ndarray, q: float) -> np.ndarray:
    """``E_n = sum_{j<n} (n - j) delta_j q**(j-n)`` at levels ``n_min .. n_max + 1``."""
    E = np.empty_like(P)
    e = P[0]
    E[0] = e
    for i in range(1, P.shape[0]):
        e = (e + P[i - 1] + delta[i]) / q
        E[i] = e
    return E


def _tail_upper_sum(tail: Tail, q: float, alpha: float) -> complex:
    """``sum_{j>N} delta_j q**(-alpha (j-N-1))`` for the increments inside the tail."""
    if tail.is_simple:
        return 0j
    rqa = q**-alpha
    if tail.kind == "log":
        return tail.b / (1 - rqa)
    r = tail.ratio
    rho = r * rqa
    if rho >= 1:
        raise DivergentTailError(
            f"power tail with ratio {r} grows too fast for order {alpha} (needs ratio < q**alpha)"
        )
    return tail.b * r * (r - 1) / (1 - rho)


def apply_D(fp, u: RadialFunction, order) -> RadialFunction:
    """Fractional derivative of a radial function on its own grid.

    The output tail is exact for zero and constant input tails.  Power and log
    tails only arise from :func:`apply_I`; the derivative of such a function
    vanishes above the grid, so the output tail is set to zero.  The output
    ``value_at_zero`` is the value at the lowest level, see
    :func:`derivative_at_zero` for how trustworthy that is.
    """
    u = check_radial(u)
    fp = as_field(fp)
    order = as_order(order)
    q, alpha = float(fp.q), order.alpha
    d_alpha = constants(fp, order).d_alpha

    delta = _increments(u)
    P, _ = _lower_sums(delta, q, alpha)
    size = u.grid.size
    S = np.empty(size + 1, dtype=complex)
    S[size] = _tail_upper_sum(u.tail, q, alpha)
    rqa = q**-alpha
    for i in range(size - 1, -1, -1):
        S[i] = delta[i + 1] + rqa * S[i + 1]

    kappa = (1 - 1 / q) / (q**alpha - 1)
    scale = q ** (-alpha * u.levels.astype(float))
    values = d_alpha * scale * (-P[:size] + kappa * S[:size])

    if u.tail.is_simple:
        N = u.n_max
        b = -d_alpha * q ** (-alpha * N) * (P[size - 1] + delta[size])
        tail = Tail.power(0, b, q ** (-alpha - 1)) if b != 0 else Tail.zero()
    else:
        tail = Tail.zero()
    return RadialFunction(u.grid, values, values[0], tail)


def derivative_at_zero(fp, u: RadialFunction, order) -> tuple:
    """Estimate of ``lim_{x->0} D^alpha u``: the lowest-level value and a stabilization gap.

    The gap is ``|D(q**n_min) - D(q**(n_min+1))|``; no claim is made that the
    limit exists.
    """
    du = apply_D(fp, u, order)
    if du.grid.size < 2:
        return complex(du.values[0]), math.inf
    return complex(du.values[0]), float(abs(du.values[0] - du.values[1]))


def apply_I(fp, u: RadialFunction, order) -> RadialFunction:
    """Right inverse of ``D^alpha`` normalized to vanish at zero.

    Requires a zero or constant tail.  Above the grid the result is attached
    as an exact ``power`` tail (``log`` tail for ``alpha = 1``).
    """
    u = check_radial(u)
    if not u.tail.is_simple:
        raise ValueError(f"apply_I needs a zero or constant tail, got {u.tail.kind!r}")
    fp = as_field(fp)
    order = as_order(order)
    q, alpha = float(fp.q), order.alpha
    consts = constants(fp, order)

    delta = _increments(u)
    P, Q = _lower_sums(delta, q, alpha)
    size = u.grid.size
    N = u.n_max
    levels = u.levels.astype(float)

    if order.is_log_branch:
        E = _log_sums(delta, P, q)
        values = q ** (levels - 1) * ((q - 1) * E[:size] + P[:size])
        p_top, e_top = P[size], E[size]
        b = q**N * (q - 1) * p_top
        c0 = q**N * ((q - 1) * e_top + (2 - q) * p_top)
        tail = Tail.log(c0, b)
    else:
        c_alpha = consts.c_alpha
        kappa = (1 - 1 / q) / (1 - q**-alpha)
        values = -c_alpha * q ** (alpha * levels) * (P[:size] - kappa * Q[:size])
        b = -c_alpha * q ** (alpha * N + 1) * P[size]
        c0 = c_alpha * kappa * q ** (alpha * (N + 1)) * Q[size]
        tail = Tail.power(c0, b, q ** (alpha - 1))
    if tail.vanishes:
        tail = Tail.zero()
    return RadialFunction(u.grid, values, 0j, tail)


def riesz_potential_at_zero(fp, u: RadialFunction, order) -> complex:
    """Value at the origin of the Riesz potential ``D^(-alpha) u``.

    ``D^(-alpha) u = I^alpha u + riesz_potential_at_zero(u)``.  Only defined
    for functions vanishing above their grid.
    """
    u = check_radial(u)
    if not u.tail.vanishes:
        raise DivergentTailError(
            f"the Riesz potential at 0 diverges for a non-vanishing {u.tail.kind} tail"
        )
    fp = as_field(fp)
    order = as_order(order)
    q = fp.q
    levels = u.levels
    sphere = (1 - 1 / q) * np.power(float(q), levels)
    consts = constants(fp, order)
    if order.is_log_branch:
        head = u.value_at_zero * ball_integral_log(fp, u.n_min - 1)
        body = np.sum(sphere * levels * math.log(q) * u.values)
        return complex(consts.log_kernel_factor * (head + body))
    alpha = order.alpha
    head = u.value_at_zero * (1 - 1 / q) * float(q) ** (alpha * u.n_min) / (q**alpha - 1)
    body = np.sum(sphere * np.power(float(q), (alpha - 1) * levels) * u.values)
    return complex(consts.c_alpha * (head + body))


def moment_coefficient(fp, order, m: int) -> float:
    """``d_{alpha,m}``, the scale-free part of the moment integral ``I_{alpha,m}``."""
    if int(m) != m or m < 0:
        raise ValueError(f"m must be a nonnegative integer, got {m!r}")
    q = as_field(fp).q
    order = as_order(order)
    if order.is_log_branch:
        return (1 - 1 / q) * math.log(q) * q ** (-m - 1) / (1 - q ** (-m - 1)) ** 2
    alpha = order.alpha
    value = (1 - q**-1) * (q ** (alpha - 1) - 1) / (
        (1 - q ** (-alpha * m - 1)) * (q ** (alpha * m + alpha) - 1)
    )
    # the kernel difference changes sign at alpha = 1; the integral is of its modulus
    return abs(value)


def moment_integral_closed(fp, order, m: int, n: int) -> float:
    """``int_{|y|<|x|} | |x|**(a-1) - |y|**(a-1) | |y|**(a m) dy`` at ``|x| = q**n``.

    For ``alpha = 1`` the kernel is ``log|x| - log|y|``.
    """
    order = as_order(order)
    q = as_field(fp).q
    return moment_coefficient(fp, order, m) * float(q) ** (order.alpha * n * (m + 1))


def trust_margin(order, width: float = 20.0) -> int:
    """Number of levels ``ceil(width / alpha)`` kept clear of a grid edge."""
    return int(math.ceil(width / as_order(order).alpha))


@dataclass(frozen=True)
class InverseIdentityReport:
    levels: np.ndarray
    deviations: np.ndarray
    interior: np.ndarray
    max_deviation: float
    precondition_ok: bool
    message: str


def verify_inverse_identity(fp, v: RadialFunction, order, margin: int | None = None) -> InverseIdentityReport:
    """Check ``D^alpha I^alpha v = v`` on a grid widened by ``margin`` levels each side.

    ``margin`` defaults to ``ceil(40 / alpha)``.  Deviations are reported on
    levels at least ``ceil(20 / alpha)`` from the widened edges.  The identity
    needs ``v`` to decay above its grid; for a non-vanishing tail the report is
    flagged rather than raised.
    """
    v = check_radial(v)
    order = as_order(order)
    if margin is None:
        margin = trust_margin(order, 40.0)
    w = v.widened(v.n_min - margin, v.n_max + margin)
    back = apply_D(fp, apply_I(fp, w, order), order)
    deviations = np.abs(back.values - w.values)
    edge = min(trust_margin(order), (w.grid.size - 1) // 2)
    interior = np.zeros(w.grid.size, dtype=bool)
    interior[edge : w.grid.size - edge] = True
    max_dev = float(deviations[interior].max())
    ok = v.tail.vanishes
    if ok:
        message = f"max interior deviation {max_dev:.3e}"
    else:
        message = (
            f"precondition violated: {v.tail.kind} tail does not decay, "
            f"so I^alpha loses the constant part (max deviation {max_dev:.3e})"
        )
    return InverseIdentityReport(w.levels, deviations, interior, max_dev, ok, message)
