"""Radial functions ``u(|x|)`` stored on a finite window of levels.

Values are kept for ``n_min <= n <= n_max``.  Below the window the function is
continued by its value at zero (the head); above the window by a
:class:`Tail`.  Both continuations are simple enough that every sum the
operators need over them has a closed form.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .exceptions import DocumentError

__all__ = [
    "LevelGrid",
    "Tail",
    "RadialFunction",
    "MatrixRadialFunction",
    "make_radial",
    "constant_function",
    "sphere_indicator",
    "check_radial",
    "serialize",
    "deserialize",
    "to_document",
    "from_document",
    "matrix_to_document",
    "matrix_from_document",
    "vector_to_document",
    "vector_from_document",
    "dumps",
    "loads",
]

TAIL_KINDS = ("zero", "constant", "power", "log")


@dataclass(frozen=True)
class LevelGrid:
    n_min: int
    n_max: int

    def __post_init__(self):
        for name in ("n_min", "n_max"):
            value = getattr(self, name)
            if isinstance(value, bool) or int(value) != value:
                raise ValueError(f"{name} must be an integer, got {value!r}")
            object.__setattr__(self, name, int(value))
        if self.n_min > self.n_max:
            raise ValueError(f"empty grid: n_min={self.n_min} > n_max={self.n_max}")

    @property
    def size(self) -> int:
        return self.n_max - self.n_min + 1

    @property
    def levels(self) -> np.ndarray:
        return np.arange(self.n_min, self.n_max + 1)

    def __contains__(self, n) -> bool:
        return self.n_min <= n <= self.n_max

    def __len__(self) -> int:
        return self.size

    def shifted(self, j: int) -> "LevelGrid":
        return LevelGrid(self.n_min + j, self.n_max + j)


@dataclass(frozen=True)
class Tail:
    """Continuation of a radial function above the top level ``N`` of its grid.

    ``zero`` and ``constant`` are the general-purpose models.  The other two
    describe exactly what the right inverse produces from compactly supported
    input and are attached by the operators themselves:

    * ``power``: ``u(q**l) = c + b * ratio**(l - N)``
    * ``log``:   ``u(q**l) = c + b * (l - N)``
    """

    kind: str = "zero"
    c: complex = 0j
    b: complex = 0j
    ratio: float = 1.0

    def __post_init__(self):
        if self.kind not in TAIL_KINDS:
            raise ValueError(f"unknown tail kind {self.kind!r}")
        object.__setattr__(self, "c", complex(self.c))
        object.__setattr__(self, "b", complex(self.b))
        object.__setattr__(self, "ratio", float(self.ratio))
        for name in ("c", "b", "ratio"):
            if not np.isfinite(getattr(self, name)):
                raise ValueError(f"non-finite tail parameter {name}")
        if self.kind == "zero" and (self.c != 0 or self.b != 0):
            raise ValueError("a zero tail carries no parameters")
        if self.kind == "power" and not self.ratio > 0:
            raise ValueError("power tail needs a positive ratio")

    @classmethod
    def zero(cls) -> "Tail":
        return cls("zero")

    @classmethod
    def constant(cls, c) -> "Tail":
        return cls("constant", c=c)

    @classmethod
    def power(cls, c, b, ratio) -> "Tail":
        return cls("power", c=c, b=b, ratio=ratio)

    @classmethod
    def log(cls, c, b) -> "Tail":
        return cls("log", c=c, b=b)

    @property
    def is_simple(self) -> bool:
        """Zero or constant continuation."""
        return self.kind in ("zero", "constant")

    @property
    def vanishes(self) -> bool:
        return self.kind == "zero" or (self.c == 0 and self.b == 0)

    def value(self, offset: int) -> complex:
        """Value at level ``N + offset`` (``offset >= 1``)."""
        if self.kind == "zero":
            return 0j
        if self.kind == "constant":
            return self.c
        if self.kind == "power":
            return self.c + self.b * self.ratio**offset
        return self.c + self.b * offset

    def rebased(self, shift: int) -> "Tail":
        """Same continuation described relative to the level ``N + shift``."""
        if self.kind == "power":
            return Tail.power(self.c, self.b * self.ratio**shift, self.ratio)
        if self.kind == "log":
            return Tail.log(self.c + self.b * shift, self.b)
        return self

    def plus(self, other: "Tail") -> "Tail":
        return self._sum(other)._normalized()

    def _sum(self, other: "Tail") -> "Tail":
        if self.kind == "zero":
            return other
        if other.kind == "zero":
            return self
        if self.kind == "constant" and other.kind == "constant":
            return Tail.constant(self.c + other.c)
        if self.kind == "constant":
            return other._sum(self)
        if other.kind == "constant":
            return Tail(self.kind, self.c + other.c, self.b, self.ratio)
        if self.kind == other.kind and self.ratio == other.ratio:
            return Tail(self.kind, self.c + other.c, self.b + other.b, self.ratio)
        raise ValueError(f"cannot add tails of kinds {self.kind!r} and {other.kind!r}")

    def scaled(self, s: complex) -> "Tail":
        if self.kind == "zero":
            return self
        return Tail(self.kind, self.c * s, self.b * s, self.ratio)._normalized()

    def _normalized(self) -> "Tail":
        # results of arithmetic that vanish identically are reported as ``zero``
        return Tail.zero() if self.vanishes else self


def _as_complex_array(values, name: str) -> np.ndarray:
    arr = np.array(values, dtype=complex)
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} contains non-finite entries")
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class RadialFunction:
    """Complex radial function known on a level window.

    ``values[i]`` is ``u(q**(n_min + i))``.  Below the window the function is
    equal to ``value_at_zero``; above it, it follows ``tail``.
    """

    grid: LevelGrid
    values: np.ndarray
    value_at_zero: complex = 0j
    tail: Tail = field(default_factory=Tail.zero)

    def __post_init__(self):
        if not isinstance(self.grid, LevelGrid):
            object.__setattr__(self, "grid", LevelGrid(*self.grid))
        values = _as_complex_array(self.values, "values")
        if values.ndim != 1 or values.shape[0] != self.grid.size:
            raise ValueError(
                f"values has shape {values.shape}, expected ({self.grid.size},) "
                f"for grid [{self.grid.n_min}, {self.grid.n_max}]"
            )
        object.__setattr__(self, "values", values)
        v0 = complex(self.value_at_zero)
        if not np.isfinite(v0):
            raise ValueError("value_at_zero is not finite")
        object.__setattr__(self, "value_at_zero", v0)
        if not isinstance(self.tail, Tail):
            raise TypeError("tail must be a Tail")

    @property
    def n_min(self) -> int:
        return self.grid.n_min

    @property
    def n_max(self) -> int:
        return self.grid.n_max

    @property
    def levels(self) -> np.ndarray:
        return self.grid.levels

    def eval_at_level(self, n: int) -> complex:
        if n < self.grid.n_min:
            return self.value_at_zero
        if n > self.grid.n_max:
            return self.tail.value(n - self.grid.n_max)
        return complex(self.values[n - self.grid.n_min])

    def __call__(self, levels):
        """Vectorized :meth:`eval_at_level`."""
        if np.ndim(levels) == 0:
            return self.eval_at_level(int(levels))
        return np.array([self.eval_at_level(int(n)) for n in levels], dtype=complex)

    def widened(self, n_min: int, n_max: int) -> "RadialFunction":
        """Same function stored on a larger window (exact, nothing is lost)."""
        if n_min > self.grid.n_min or n_max < self.grid.n_max:
            raise ValueError(
                f"window [{n_min}, {n_max}] does not contain "
                f"[{self.grid.n_min}, {self.grid.n_max}]"
            )
        grid = LevelGrid(n_min, n_max)
        values = self(grid.levels)
        return RadialFunction(
            grid, values, self.value_at_zero, self.tail.rebased(n_max - self.grid.n_max)
        )

    def shifted(self, j: int) -> "RadialFunction":
        """The dilated function ``x -> u(|x| q**j)``, i.e. level ``n`` reads level ``n + j``."""
        return RadialFunction(self.grid.shifted(-j), self.values, self.value_at_zero, self.tail)

    def _check_same_grid(self, other: "RadialFunction"):
        if self.grid != other.grid:
            raise ValueError(f"grid mismatch: {self.grid} vs {other.grid}")

    def __add__(self, other):
        if isinstance(other, RadialFunction):
            self._check_same_grid(other)
            return RadialFunction(
                self.grid,
                self.values + other.values,
                self.value_at_zero + other.value_at_zero,
                self.tail.plus(other.tail),
            )
        c = complex(other)
        return RadialFunction(
            self.grid, self.values + c, self.value_at_zero + c, self.tail.plus(Tail.constant(c))
        )

    __radd__ = __add__

    def __mul__(self, s):
        s = complex(s)
        return RadialFunction(self.grid, self.values * s, self.value_at_zero * s, self.tail.scaled(s))

    __rmul__ = __mul__

    def __neg__(self):
        return self * -1

    def __sub__(self, other):
        return self + (-other)

    def __eq__(self, other):
        if not isinstance(other, RadialFunction):
            return NotImplemented
        return (
            self.grid == other.grid
            and np.array_equal(self.values, other.values)
            and self.value_at_zero == other.value_at_zero
            and self.tail == other.tail
        )

    def __hash__(self):
        return hash((self.grid, self.values.tobytes(), self.value_at_zero, self.tail))

    def __repr__(self):
        return (
            f"RadialFunction(grid=[{self.n_min}, {self.n_max}], "
            f"value_at_zero={self.value_at_zero}, tail={self.tail.kind})"
        )


def make_radial(grid, values, value_at_zero=0j, tail: Tail | None = None) -> RadialFunction:
    if not isinstance(grid, LevelGrid):
        grid = LevelGrid(*grid)
    return RadialFunction(grid, values, value_at_zero, Tail.zero() if tail is None else tail)


def constant_function(grid, c=1.0) -> RadialFunction:
    if not isinstance(grid, LevelGrid):
        grid = LevelGrid(*grid)
    return RadialFunction(grid, np.full(grid.size, c, dtype=complex), c, Tail.constant(c))


def sphere_indicator(grid, level: int = 0) -> RadialFunction:
    """Indicator of the sphere ``|x| = q**level`` (the level must lie in the grid)."""
    if not isinstance(grid, LevelGrid):
        grid = LevelGrid(*grid)
    if level not in grid:
        raise ValueError(f"level {level} outside grid [{grid.n_min}, {grid.n_max}]")
    values = np.zeros(grid.size, dtype=complex)
    values[level - grid.n_min] = 1.0
    return RadialFunction(grid, values, 0j, Tail.zero())


def check_radial(u) -> RadialFunction:
    if not isinstance(u, RadialFunction):
        raise TypeError(f"expected a RadialFunction, got {type(u).__name__}")
    return u


@dataclass(frozen=True, eq=False)
class MatrixRadialFunction:
    """Square-matrix valued radial function; continuation rules apply entrywise.

    The tail is either zero or the constant matrix ``tail_value``.
    """

    grid: LevelGrid
    values: np.ndarray
    value_at_zero: np.ndarray
    tail_kind: str = "zero"
    tail_value: np.ndarray | None = None

    def __post_init__(self):
        if not isinstance(self.grid, LevelGrid):
            object.__setattr__(self, "grid", LevelGrid(*self.grid))
        values = _as_complex_array(self.values, "values")
        if values.ndim != 3 or values.shape[0] != self.grid.size or values.shape[1] != values.shape[2]:
            raise ValueError(
                f"values must have shape ({self.grid.size}, d, d), got {values.shape}"
            )
        d = values.shape[1]
        at_zero = _as_complex_array(self.value_at_zero, "value_at_zero")
        if at_zero.shape != (d, d):
            raise ValueError(f"value_at_zero must be {d}x{d}, got shape {at_zero.shape}")
        if self.tail_kind not in ("zero", "constant"):
            raise ValueError(f"matrix tails are 'zero' or 'constant', got {self.tail_kind!r}")
        if self.tail_kind == "zero":
            tail_value = np.zeros((d, d), dtype=complex)
            tail_value.setflags(write=False)
        else:
            tail_value = _as_complex_array(self.tail_value, "tail_value")
            if tail_value.shape != (d, d):
                raise ValueError(f"tail_value must be {d}x{d}")
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "value_at_zero", at_zero)
        object.__setattr__(self, "tail_value", tail_value)

    @property
    def dim(self) -> int:
        return self.values.shape[1]

    def eval_at_level(self, n: int) -> np.ndarray:
        if n < self.grid.n_min:
            return self.value_at_zero
        if n > self.grid.n_max:
            return self.tail_value
        return self.values[n - self.grid.n_min]

    def entry(self, i: int, j: int) -> RadialFunction:
        tail = Tail.zero() if self.tail_kind == "zero" else Tail.constant(self.tail_value[i, j])
        return RadialFunction(self.grid, self.values[:, i, j], self.value_at_zero[i, j], tail)

    @classmethod
    def from_scalar(cls, u: RadialFunction) -> "MatrixRadialFunction":
        if not u.tail.is_simple:
            raise ValueError("only zero or constant tails lift to matrices")
        return cls(
            u.grid,
            u.values.reshape(-1, 1, 1),
            np.array([[u.value_at_zero]]),
            u.tail.kind,
            np.array([[u.tail.c]]),
        )

    def __eq__(self, other):
        if not isinstance(other, MatrixRadialFunction):
            return NotImplemented
        return (
            self.grid == other.grid
            and np.array_equal(self.values, other.values)
            and np.array_equal(self.value_at_zero, other.value_at_zero)
            and self.tail_kind == other.tail_kind
            and np.array_equal(self.tail_value, other.tail_value)
        )

    __hash__ = None


# --- documents -------------------------------------------------------------


def _pair(z: complex) -> list:
    z = complex(z)
    return [z.real, z.imag]


def _unpair(obj, where: str) -> complex:
    if not isinstance(obj, (list, tuple)) or len(obj) != 2:
        raise DocumentError(f"{where}: expected a [re, im] pair, got {obj!r}")
    try:
        re, im = (float(x) for x in obj)
    except (TypeError, ValueError) as exc:
        raise DocumentError(f"{where}: non-numeric entry in {obj!r}") from exc
    if not (math.isfinite(re) and math.isfinite(im)):
        raise DocumentError(f"{where}: non-finite value {obj!r}")
    return complex(re, im)


def _require(doc: dict, key: str, where: str = "document"):
    if not isinstance(doc, dict):
        raise DocumentError(f"{where}: expected an object")
    if key not in doc:
        raise DocumentError(f"{where}: missing field {key!r}")
    return doc[key]


def _tail_to_document(tail: Tail) -> dict:
    out = {"kind": tail.kind}
    if tail.kind != "zero":
        out["c"] = _pair(tail.c)
    if tail.kind in ("power", "log"):
        out["b"] = _pair(tail.b)
    if tail.kind == "power":
        out["ratio"] = tail.ratio
    return out


def _tail_from_document(doc) -> Tail:
    kind = _require(doc, "kind", "tail")
    if kind not in TAIL_KINDS:
        raise DocumentError(f"tail: unknown kind {kind!r}")
    if kind == "zero":
        return Tail.zero()
    c = _unpair(_require(doc, "c", "tail"), "tail.c")
    if kind == "constant":
        return Tail.constant(c)
    b = _unpair(_require(doc, "b", "tail"), "tail.b")
    if kind == "log":
        return Tail.log(c, b)
    ratio = float(_require(doc, "ratio", "tail"))
    if not ratio > 0 or not math.isfinite(ratio):
        raise DocumentError(f"tail.ratio must be positive and finite, got {ratio!r}")
    return Tail.power(c, b, ratio)


def _grid_from_document(doc) -> LevelGrid:
    n_min = _require(doc, "n_min")
    n_max = _require(doc, "n_max")
    if not all(isinstance(n, int) and not isinstance(n, bool) for n in (n_min, n_max)):
        raise DocumentError("n_min and n_max must be integers")
    try:
        return LevelGrid(n_min, n_max)
    except ValueError as exc:
        raise DocumentError(str(exc)) from exc


def to_document(u: RadialFunction, q: int | None = None, alpha: float | None = None) -> dict:
    doc = {}
    if q is not None:
        doc["q"] = int(q)
    if alpha is not None:
        doc["alpha"] = float(alpha)
    doc.update(
        n_min=u.n_min,
        n_max=u.n_max,
        values=[_pair(z) for z in u.values],
        value_at_zero=_pair(u.value_at_zero),
        tail=_tail_to_document(u.tail),
    )
    return doc


def from_document(doc: dict) -> RadialFunction:
    grid = _grid_from_document(doc)
    raw = _require(doc, "values")
    if not isinstance(raw, list):
        raise DocumentError("values must be a list of [re, im] pairs")
    if len(raw) != grid.size:
        raise DocumentError(f"values has {len(raw)} entries, grid needs {grid.size}")
    values = [_unpair(z, f"values[{i}]") for i, z in enumerate(raw)]
    at_zero = _unpair(_require(doc, "value_at_zero"), "value_at_zero")
    tail = _tail_from_document(_require(doc, "tail"))
    return RadialFunction(grid, values, at_zero, tail)


def matrix_to_document(a: MatrixRadialFunction, q: int | None = None, alpha: float | None = None) -> dict:
    doc = {}
    if q is not None:
        doc["q"] = int(q)
    if alpha is not None:
        doc["alpha"] = float(alpha)

    def mat(m):
        return [[_pair(z) for z in row] for row in m]

    tail = {"kind": a.tail_kind}
    if a.tail_kind == "constant":
        tail["c"] = mat(a.tail_value)
    doc.update(
        dim=a.dim,
        n_min=a.grid.n_min,
        n_max=a.grid.n_max,
        values=[mat(m) for m in a.values],
        value_at_zero=mat(a.value_at_zero),
        tail=tail,
    )
    return doc


def matrix_from_document(doc: dict) -> MatrixRadialFunction:
    grid = _grid_from_document(doc)
    d = _require(doc, "dim")
    if not isinstance(d, int) or isinstance(d, bool) or d < 1:
        raise DocumentError(f"dim must be a positive integer, got {d!r}")

    def mat(obj, where):
        if not isinstance(obj, list) or len(obj) != d or any(
            not isinstance(row, list) or len(row) != d for row in obj
        ):
            raise DocumentError(f"{where}: expected a {d}x{d} array of [re, im] pairs")
        return [[_unpair(z, f"{where}[{i}][{j}]") for j, z in enumerate(row)] for i, row in enumerate(obj)]

    raw = _require(doc, "values")
    if not isinstance(raw, list) or len(raw) != grid.size:
        raise DocumentError(f"values must hold {grid.size} matrices")
    values = [mat(m, f"values[{k}]") for k, m in enumerate(raw)]
    at_zero = mat(_require(doc, "value_at_zero"), "value_at_zero")
    tail = _require(doc, "tail")
    kind = _require(tail, "kind", "tail")
    if kind == "zero":
        return MatrixRadialFunction(grid, values, at_zero)
    if kind == "constant":
        return MatrixRadialFunction(grid, values, at_zero, "constant", mat(_require(tail, "c", "tail"), "tail.c"))
    raise DocumentError(f"tail: matrix functions support 'zero' or 'constant', got {kind!r}")


def vector_to_document(components: Sequence[RadialFunction], q: int | None = None, alpha: float | None = None) -> dict:
    doc = {}
    if q is not None:
        doc["q"] = int(q)
    if alpha is not None:
        doc["alpha"] = float(alpha)
    doc["dim"] = len(components)
    doc["shape"] = "vector"
    doc["components"] = [to_document(u) for u in components]
    return doc


def vector_from_document(doc: dict) -> tuple:
    comps = _require(doc, "components")
    if not isinstance(comps, list) or not comps:
        raise DocumentError("components must be a non-empty list")
    d = doc.get("dim", len(comps))
    if d != len(comps):
        raise DocumentError(f"dim={d} but {len(comps)} components given")
    out = tuple(from_document(c) for c in comps)
    if len({u.grid for u in out}) != 1:
        raise DocumentError("vector components must share one grid")
    return out


def _format_float(x: float) -> str:
    if not math.isfinite(x):
        raise ValueError(f"cannot serialize non-finite number {x!r}")
    s = format(x, ".17g")
    if s.lstrip("-").isdigit():
        s += ".0"
    return s


def _encode(obj) -> str:
    if isinstance(obj, bool) or obj is None:
        return json.dumps(obj)
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        return _format_float(float(obj))
    if isinstance(obj, str):
        return json.dumps(obj)
    if isinstance(obj, dict):
        return "{" + ", ".join(f"{json.dumps(str(k))}: {_encode(v)}" for k, v in obj.items()) + "}"
    if isinstance(obj, (list, tuple)):
        return "[" + ", ".join(_encode(v) for v in obj) + "]"
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def dumps(obj) -> str:
    """JSON text with every float written to 17 significant digits."""
    return _encode(obj) + "\n"


def _reject_constant(token):
    raise DocumentError(f"non-finite number {token} in document")


def loads(text: str):
    try:
        return json.loads(text, parse_constant=_reject_constant)
    except json.JSONDecodeError as exc:
        raise DocumentError(f"malformed document: {exc}") from exc


def serialize(u: RadialFunction, q: int | None = None, alpha: float | None = None) -> str:
    return dumps(to_document(u, q, alpha))


def deserialize(text: str) -> RadialFunction:
    return from_document(loads(text))

