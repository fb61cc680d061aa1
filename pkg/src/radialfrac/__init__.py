"""Radial fractional calculus over non-Archimedean local fields.

The public surface is re-exported here; see the submodules for details:

* :mod:`radialfrac.local_field` -- level structure and closed-form integrals
* :mod:`radialfrac.radial` -- radial functions on a finite level grid
* :mod:`radialfrac.riesz` -- the operators ``D^alpha`` and ``I^alpha``
* :mod:`radialfrac.cauchy` -- the Cauchy problem ``D^alpha u + a u = f``
* :mod:`radialfrac.cli` -- command-line front end
"""

from .cauchy import (
    NON_DECAYING_WARNING,
    CauchyProblem,
    MatrixCauchyProblem,
    SolveReport,
    check_decay_hypothesis,
    check_spectral_condition,
    residual,
    solve_direct,
    solve_matrix,
    solve_picard,
)
from .exceptions import (
    DivergentTailError,
    DocumentError,
    LogBranchError,
    NoConvergenceError,
    PoleError,
    RadialFracError,
    SingularPivotError,
)
from .local_field import FieldParams
from .radial import (
    LevelGrid,
    MatrixRadialFunction,
    RadialFunction,
    Tail,
    constant_function,
    deserialize,
    serialize,
    sphere_indicator,
)
from .riesz import AlphaOrder, apply_D, apply_I, constants, gamma_K

__version__ = "0.1.0"

__all__ = [
    "AlphaOrder",
    "CauchyProblem",
    "DivergentTailError",
    "DocumentError",
    "FieldParams",
    "LevelGrid",
    "LogBranchError",
    "MatrixCauchyProblem",
    "MatrixRadialFunction",
    "NON_DECAYING_WARNING",
    "NoConvergenceError",
    "PoleError",
    "RadialFracError",
    "RadialFunction",
    "SingularPivotError",
    "SolveReport",
    "Tail",
    "apply_D",
    "apply_I",
    "check_decay_hypothesis",
    "check_spectral_condition",
    "constant_function",
    "constants",
    "deserialize",
    "gamma_K",
    "residual",
    "serialize",
    "solve_direct",
    "solve_matrix",
    "solve_picard",
    "sphere_indicator",
]
