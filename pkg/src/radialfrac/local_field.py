"""Level structure of a local field and its closed-form radial integrals.

A local field enters every computation only through ``q``, the cardinality of
its residue field.  Points with ``|x| = q**n`` form the sphere at level ``n``;
the Haar measure is normalized so that the unit ball has measure one.

Every closed form below has a brute-force counterpart obtained by splitting the
domain into spheres, see :func:`oracle_radial_sum` and
:func:`radial_sum_to_minus_infinity`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

__all__ = [
    "FieldParams",
    "as_field",
    "ball_volume",
    "sphere_volume",
    "sector_volume_fixed_digit",
    "sector_volume_excluded_digit",
    "ball_integral_power",
    "sphere_integral_shifted_power",
    "ball_integral_log",
    "sphere_integral_shifted_log",
    "oracle_radial_sum",
    "radial_sum_to_minus_infinity",
    "shifted_sphere_decomposition",
]

# truncation rule for sums running down to level -infinity
_REL_CUTOFF = 1e-16
_MIN_TERMS = 200
_MAX_TERMS = 200_000


@dataclass(frozen=True)
class FieldParams:
    """Residue-field cardinality of a non-Archimedean local field.

    Any integer ``q >= 2`` is accepted; primality is never used.
    """

    q: int

    def __post_init__(self):
        if isinstance(self.q, bool) or int(self.q) != self.q:
            raise ValueError(f"q must be an integer, got {self.q!r}")
        object.__setattr__(self, "q", int(self.q))
        if self.q < 2:
            raise ValueError(f"q must be >= 2, got {self.q}")

    @property
    def log_q(self) -> float:
        return math.log(self.q)

    def abs_value(self, n: int) -> float:
        """Absolute value ``q**n`` of points on level ``n``."""
        return float(self.q) ** n


def as_field(fp) -> FieldParams:
    if isinstance(fp, FieldParams):
        return fp
    return FieldParams(fp)


def _check_alpha(alpha: float) -> float:
    alpha = float(alpha)
    if not alpha > 0 or not math.isfinite(alpha):
        raise ValueError(f"alpha must be a finite positive number, got {alpha!r}")
    return alpha


def ball_volume(fp, n: int) -> float:
    q = as_field(fp).q
    return float(q) ** n


def sphere_volume(fp, n: int) -> float:
    q = as_field(fp).q
    return (1 - 1 / q) * float(q) ** n


def sector_volume_fixed_digit(fp, n: int) -> float:
    """Measure of ``{|x| = q**n, x_0 = k_0}`` for a fixed nonzero leading digit."""
    q = as_field(fp).q
    return float(q) ** (n - 1)


def sector_volume_excluded_digit(fp, n: int) -> float:
    """Measure of ``{|x| = q**n, x_0 != k_0}``; vanishes for ``q = 2``."""
    q = as_field(fp).q
    return (1 - 2 / q) * float(q) ** n


def ball_integral_power(fp, alpha: float, n: int) -> float:
    """Integral of ``|x|**(alpha-1)`` over the ball ``|x| <= q**n``."""
    q = as_field(fp).q
    alpha = _check_alpha(alpha)
    return (1 - q**-1) / (1 - q**-alpha) * float(q) ** (alpha * n)


def sphere_integral_shifted_power(fp, alpha: float, n: int) -> float:
    """Integral of ``|x - a|**(alpha-1)`` over ``|x| = q**n`` where ``|a| = q**n``."""
    q = as_field(fp).q
    alpha = _check_alpha(alpha)
    return (q - 2 + q**-alpha) / (q * (1 - q**-alpha)) * float(q) ** (alpha * n)


def ball_integral_log(fp, n: int) -> float:
    """Integral of ``log|x|`` over the ball ``|x| <= q**n`` (natural log)."""
    q = as_field(fp).q
    return (n - 1 / (q - 1)) * float(q) ** n * math.log(q)


def sphere_integral_shifted_log(fp, n: int) -> float:
    """Integral of ``log|x - a|`` over ``|x| = q**n`` where ``|a| = q**n``."""
    q = as_field(fp).q
    log_a = n * math.log(q)
    return ((1 - 1 / q) * log_a - math.log(q) / (q - 1)) * float(q) ** n


def _fsum_complex(terms) -> complex:
    terms = [complex(t) for t in terms]
    return complex(math.fsum(t.real for t in terms), math.fsum(t.imag for t in terms))


def oracle_radial_sum(
    fp, weights: Callable[[int], complex], n_low: int, n_high: int
) -> complex:
    """Sum ``sphere_volume(k) * weights(k)`` for ``n_low <= k <= n_high``.

    This is the reference quadrature for radial integrands: on a sphere every
    radial function is constant, so an integral over a union of spheres is a
    weighted level sum.
    """
    if n_low > n_high:
        raise ValueError(f"n_low={n_low} exceeds n_high={n_high}")
    fp = as_field(fp)
    return _fsum_complex(sphere_volume(fp, k) * weights(k) for k in range(n_low, n_high + 1))


def radial_sum_to_minus_infinity(
    fp, weights: Callable[[int], complex], n_high: int
) -> complex:
    """Sum ``sphere_volume(k) * weights(k)`` over all ``k <= n_high``.

    Terms are added downward until one drops below ``1e-16`` times the running
    sum, but never fewer than 200 terms.
    """
    fp = as_field(fp)
    terms = []
    partial = 0.0
    k = n_high
    while True:
        term = complex(sphere_volume(fp, k) * weights(k))
        terms.append(term)
        partial += term
        if len(terms) >= _MIN_TERMS and abs(term) <= _REL_CUTOFF * abs(partial):
            break
        if len(terms) >= _MAX_TERMS:
            raise ArithmeticError(f"level sum below {n_high} does not converge")
        k -= 1
    return _fsum_complex(terms)


def shifted_sphere_decomposition(
    fp, integrand: Callable[[int], complex], n: int
) -> complex:
    """Integral over ``|x| = q**n`` of ``g(|x - a|)`` with ``|a| = q**n``.

    ``integrand(k)`` is ``g(q**k)``.  The sphere splits into the shells
    ``|x - a| = q**k`` for ``k < n`` and the part where the leading digits
    differ, on which ``|x - a| = q**n``.
    """
    fp = as_field(fp)
    inner = radial_sum_to_minus_infinity(fp, integrand, n - 1)
    return inner + sector_volume_excluded_digit(fp, n) * complex(integrand(n))
