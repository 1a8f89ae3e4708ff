"""Scalar functions on a grid, and finite-dimensional spans of them.

A function is an evaluation rule, not a value vector: composing with a
point map or evaluating at off-grid kernel nodes stays exact. The sampled
value vector over the grid is computed lazily and cached on the function.

Span membership (and the unital / self-conjugate flags derived from it) is
decided by least-squares fitting over the grid value vectors with a fixed
residual tolerance; point separation uses a tolerance well below any grid
spacing used here.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from functools import cached_property
from typing import Callable, Sequence

import numpy as np

from .errors import InvalidFunctionError
from .space import CompactSpace, Field, SpaceKind

MEMBERSHIP_TOL = 1e-10
SEPARATION_TOL = 1e-12


def _point_key(x) -> tuple:
    if isinstance(x, (complex, np.complexfloating)):
        z = complex(x)
        return ("c", z.real, z.imag)
    arr = np.asarray(x, dtype=float)
    if arr.ndim == 0:
        return ("r", float(arr))
    return ("v",) + tuple(float(v) for v in arr)


@dataclass(frozen=True, eq=False)
class ScalarFunction:
    """An evaluation rule point -> scalar bound to one grid."""

    space: CompactSpace
    rule: Callable
    name: str = ""

    def __call__(self, x):
        return self.rule(x)

    @cached_property
    def values(self) -> np.ndarray:
        """Sampled value vector over the grid; validated once and cached."""
        raw = np.array([self.rule(p) for p in self.space.eval_points])
        if not np.all(np.isfinite(raw)):
            raise InvalidFunctionError(
                f"function {self.name!r} takes a non-finite value on the grid"
            )
        if self.space.field is Field.REAL:
            if np.iscomplexobj(raw) and np.max(np.abs(raw.imag)) > 0.0:
                raise InvalidFunctionError(
                    f"function {self.name!r} is complex-valued on a real-field grid"
                )
            out = np.asarray(raw.real if np.iscomplexobj(raw) else raw, dtype=float)
        else:
            out = np.asarray(raw, dtype=complex)
        out.setflags(write=False)
        return out


def function_from_values(space: CompactSpace, values, name: str = "") -> ScalarFunction:
    """Wrap a grid-sampled value vector as an evaluation rule.

    The returned function is only defined at the grid's own points; asking
    for any other point is an error rather than an interpolation.
    """
    vals = np.asarray(values)
    if vals.shape != (space.n_points,):
        raise ValueError("value vector length must match the grid")
    if space.field is Field.REAL:
        if np.iscomplexobj(vals):
            if np.max(np.abs(vals.imag)) > 0.0:
                raise InvalidFunctionError(
                    f"values for {name!r} are complex on a real-field grid"
                )
            vals = vals.real
        vals = np.asarray(vals, dtype=float)
    else:
        vals = np.asarray(vals, dtype=complex)
    vals = vals.copy()
    vals.setflags(write=False)
    index = {_point_key(p): i for i, p in enumerate(space.eval_points)}

    def rule(x):
        try:
            return vals[index[_point_key(x)]]
        except KeyError:
            raise InvalidFunctionError(
                f"{name!r} is grid-sampled and has no value at point {x!r}"
            ) from None

    return ScalarFunction(space, rule, name=name)


def conjugate(f: ScalarFunction) -> ScalarFunction:
    """Complex conjugate of a function; identity on real-field grids."""
    if f.space.field is Field.REAL:
        return f
    return ScalarFunction(f.space, lambda x: complex(f.rule(x)).conjugate(), name=f"conj({f.name})")


def sup_norm(f: ScalarFunction) -> float:
    """Maximum of |f| over the grid."""
    return float(np.max(np.abs(f.values)))


def oscillation(f: ScalarFunction) -> float:
    """Largest |f(x) - f(x')| over all grid pairs."""
    v = f.values
    if f.space.field is Field.REAL:
        return float(v.max() - v.min())
    return float(np.max(np.abs(v[:, None] - v[None, :])))


@dataclass(frozen=True, eq=False)
class FunctionSpan:
    """Finite-dimensional span of functions over one grid."""

    basis: tuple[ScalarFunction, ...]

    def __post_init__(self) -> None:
        basis = tuple(self.basis)
        if not basis:
            raise ValueError("a span needs at least one basis function")
        sp = basis[0].space
        if any(f.space is not sp for f in basis):
            raise ValueError("all basis functions must live on the same grid")
        object.__setattr__(self, "basis", basis)

    @property
    def space(self) -> CompactSpace:
        return self.basis[0].space

    @property
    def dim(self) -> int:
        return len(self.basis)

    @cached_property
    def value_matrix(self) -> np.ndarray:
        m = np.column_stack([f.values for f in self.basis])
        m.setflags(write=False)
        return m

    def fit_residual(self, target_values) -> float:
        """Max-abs residual of least-squares fitting target over the grid."""
        v = np.asarray(target_values)
        m = self.value_matrix
        if np.iscomplexobj(v) and not np.iscomplexobj(m):
            m = m.astype(complex)
        sol, *_ = np.linalg.lstsq(m, v, rcond=None)
        return float(np.max(np.abs(m @ sol - v)))

    def contains_values(self, target_values, tol: float = MEMBERSHIP_TOL) -> bool:
        return self.fit_residual(target_values) <= tol

    @cached_property
    def unital(self) -> bool:
        return self.contains_values(np.ones(self.space.n_points))

    @cached_property
    def self_conjugate(self) -> bool:
        if self.space.field is Field.REAL:
            return True
        return all(self.contains_values(np.conj(f.values)) for f in self.basis)

    @cached_property
    def separating(self) -> bool:
        return separates_points(self)[0]


def span_eval(span: FunctionSpan, coeffs: Sequence, x):
    """Evaluate the combination sum(coeffs[i] * basis[i]) at a point."""
    if len(coeffs) != span.dim:
        raise ValueError(
            f"expected {span.dim} coefficients, got {len(coeffs)}"
        )
    return sum(c * f.rule(x) for c, f in zip(coeffs, span.basis))


def combination_values(span: FunctionSpan, coeffs: Sequence) -> np.ndarray:
    """Grid value vector of the combination sum(coeffs[i] * basis[i])."""
    if len(coeffs) != span.dim:
        raise ValueError(f"expected {span.dim} coefficients, got {len(coeffs)}")
    return span.value_matrix @ np.asarray(coeffs)


def separates_points(span: FunctionSpan) -> tuple[bool, tuple[int, int] | None]:
    """Whether basis value vectors distinguish every grid pair.

    On failure, returns a witness pair of indistinguishable point indices.
    """
    b = span.value_matrix
    n = b.shape[0]
    for i in range(n - 1):
        diff = np.max(np.abs(b[i + 1 :] - b[i]), axis=1)
        bad = np.nonzero(diff <= SEPARATION_TOL)[0]
        if bad.size:
            return False, (i, i + 1 + int(bad[0]))
    return True, None


def conjugate_closure(span: FunctionSpan) -> FunctionSpan:
    """Smallest self-conjugate span containing the input; no-op on real grids."""
    if span.space.field is Field.REAL:
        return span
    basis = list(span.basis)
    current = span
    for f in span.basis:
        fb = conjugate(f)
        if not current.contains_values(fb.values):
            basis.append(fb)
            current = FunctionSpan(tuple(basis))
    return current


def span_union(first: FunctionSpan, *rest: FunctionSpan) -> FunctionSpan:
    """Span generated by several spans, skipping redundant basis members."""
    basis = list(first.basis)
    current = first
    for other in rest:
        if other.space is not first.space:
            raise ValueError("span union requires spans over the same grid")
        for f in other.basis:
            if not current.contains_values(f.values):
                basis.append(f)
                current = FunctionSpan(tuple(basis))
    return current


# ---------------------------------------------------------------------------
# named function catalog (used by configuration files and default probe sets)

_COORD_RE = re.compile(r"^coord\s+(\d+)(\^2)?$")


def _build_named(name: str, space: CompactSpace) -> Callable:
    real_1d = space.field is Field.REAL and space.dim == 1
    cx = space.field is Field.COMPLEX

    if name == "const1":
        return lambda x: 1.0

    if real_1d:
        table = {
            "x": lambda x: float(x),
            "x^2": lambda x: float(x) ** 2,
            "x^3": lambda x: float(x) ** 3,
            "abs(x-1/2)": lambda x: abs(float(x) - 0.5),
            "runge": lambda x: 1.0 / (1.0 + 25.0 * float(x) ** 2),
            "cos": lambda x: float(np.cos(2.0 * np.pi * float(x))),
            "sin": lambda x: float(np.sin(2.0 * np.pi * float(x))),
        }
        if name in table:
            return table[name]

    if cx:
        table = {
            "z": lambda z: complex(z),
            "zbar": lambda z: complex(z).conjugate(),
            "|z|^2": lambda z: abs(complex(z)) ** 2,
            "re_z2": lambda z: (complex(z) ** 2).real,
            "im_z2": lambda z: (complex(z) ** 2).imag,
            "abs_im_z": lambda z: abs(complex(z).imag),
            "abs(z-1/2)": lambda z: abs(complex(z) - 0.5),
            "cos": lambda z: complex(z).real,
            "sin": lambda z: complex(z).imag,
        }
        if name in table:
            return table[name]

    if space.field is Field.REAL:
        m = _COORD_RE.match(name)
        if m:
            k = int(m.group(1))
            if not 1 <= k <= space.dim:
                raise ValueError(
                    f"coordinate index {k} out of range for a {space.dim}-d grid"
                )
            if m.group(2):
                return lambda x, _k=k - 1: float(np.atleast_1d(np.asarray(x, float))[_k]) ** 2
            return lambda x, _k=k - 1: float(np.atleast_1d(np.asarray(x, float))[_k])
        table = {
            "sum_sq": lambda x: float(np.sum(np.atleast_1d(np.asarray(x, float)) ** 2)),
            "prod_coords": lambda x: float(np.prod(np.atleast_1d(np.asarray(x, float)))),
            "abs(x1-1/2)": lambda x: abs(float(np.atleast_1d(np.asarray(x, float))[0]) - 0.5),
        }
        if name in table:
            return table[name]

    raise ValueError(
        f"unknown function name {name!r} for a {space.kind.value}/{space.field.value} grid"
    )


def named_function(name: str, space: CompactSpace) -> ScalarFunction:
    """Look up a built-in function by its configuration-file name."""
    return ScalarFunction(space, _build_named(name, space), name=name)


def default_probe_names(space: CompactSpace) -> tuple[str, ...]:
    """Default 8-member probe battery for a grid kind.

    Each battery mixes exactly reproduced members, smooth functions, an
    oscillatory pair, and at least one non-smooth function.
    """
    if space.field is Field.REAL and space.dim == 1:
        return ("const1", "x", "x^2", "x^3", "abs(x-1/2)", "runge", "cos", "sin")
    if space.kind is SpaceKind.CIRCLE:
        return ("const1", "z", "zbar", "cos", "sin", "re_z2", "im_z2", "abs_im_z")
    if space.field is Field.COMPLEX:
        return ("const1", "z", "zbar", "|z|^2", "re_z2", "im_z2", "abs(z-1/2)", "cos")
    names = ["const1"]
    for k in range(1, min(space.dim, 2) + 1):
        names.append(f"coord {k}")
    for k in range(1, min(space.dim, 2) + 1):
        names.append(f"coord {k}^2")
    names.extend(["sum_sq", "prod_coords", "abs(x1-1/2)"])
    return tuple(names[:8])


def default_probes(space: CompactSpace) -> tuple[ScalarFunction, ...]:
    return tuple(named_function(n, space) for n in default_probe_names(space))
