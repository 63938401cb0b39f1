"""Exterior algebra over small coordinate charts.

Forms are stored densely: a degree-k form on an n-dimensional chart keeps one
coefficient per strictly increasing index set of size k, ordered
lexicographically. Coefficient arrays may carry leading batch dimensions so
whole sample grids are evaluated at once.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
from itertools import combinations
from math import comb
from typing import Callable, Optional

import numpy as np


@dataclass(frozen=True)
class Chart:
    """A coordinate frame. ``orientation`` is the sign of the basis-order top
    form relative to the declared positive volume form."""

    name: str
    coords: tuple[str, ...]
    orientation: int = 1

    @property
    def dim(self) -> int:
        return len(self.coords)


# (t, s, x, y): positive volume dt^ds^dx^dy
COLLAR = Chart("collar", ("t", "s", "x", "y"), 1)
# (p1, p2, x, y): positive volume dp2^dp1^dx^dy
BASE = Chart("base", ("p1", "p2", "x", "y"), -1)
# (s, t, theta) annulus chart: positive volume dt^ds^dtheta
ANNULUS = Chart("annulus", ("s", "t", "theta"), -1)
# (s, x, y) handlebody slice at t = 0: positive volume ds^dx^dy
SLICE = Chart("slice", ("s", "x", "y"), 1)
# Fubini-Study polar chart (r_l, theta_l, r_l+1, theta_l+1)
FS = Chart("fs", ("r_a", "theta_a", "r_b", "theta_b"), 1)
SURFACE = Chart("surface", ("x", "y"), 1)


class ChartMismatch(ValueError):
    pass


@lru_cache(maxsize=None)
def basis(n: int, k: int) -> tuple[tuple[int, ...], ...]:
    return tuple(combinations(range(n), k))


@lru_cache(maxsize=None)
def _index(n: int, k: int) -> dict:
    return {I: i for i, I in enumerate(basis(n, k))}


def _perm_sign(seq: tuple[int, ...]) -> int:
    sign = 1
    seq = list(seq)
    for i in range(len(seq)):
        for j in range(i + 1, len(seq)):
            if seq[i] > seq[j]:
                sign = -sign
    return sign


@lru_cache(maxsize=None)
def _wedge_tensor(n: int, k: int, l: int) -> np.ndarray:
    """T[i, j, m] = sign with e_I ^ e_J = T[i, j, m] e_M."""
    target = _index(n, k + l)
    T = np.zeros((comb(n, k), comb(n, l), comb(n, k + l)))
    for i, I in enumerate(basis(n, k)):
        for j, J in enumerate(basis(n, l)):
            if set(I) & set(J):
                continue
            merged = I + J
            T[i, j, target[tuple(sorted(merged))]] = _perm_sign(merged)
    return T


@dataclass(frozen=True, eq=False)
class FormValue:
    __array_ufunc__ = None

    degree: int
    coeffs: np.ndarray
    chart: Chart = COLLAR

    def __post_init__(self):
        c = np.asarray(self.coeffs, dtype=float)
        n = comb(self.chart.dim, self.degree) if 0 <= self.degree <= self.chart.dim else 0
        if self.degree < 0 or self.degree > self.chart.dim:
            raise ValueError(f"degree {self.degree} invalid on {self.chart.name}")
        if c.shape[-1:] != (n,):
            raise ValueError(f"expected {n} coefficients for degree {self.degree}, got {c.shape}")
        object.__setattr__(self, "coeffs", c)

    @property
    def batch_shape(self) -> tuple[int, ...]:
        return self.coeffs.shape[:-1]

    def _check(self, other: "FormValue"):
        if other.chart != self.chart:
            raise ChartMismatch(f"{self.chart.name} vs {other.chart.name}")

    def __add__(self, other: "FormValue") -> "FormValue":
        self._check(other)
        if other.degree != self.degree:
            raise ValueError("cannot add forms of different degree")
        return FormValue(self.degree, self.coeffs + other.coeffs, self.chart)

    def __sub__(self, other: "FormValue") -> "FormValue":
        return self + (-other)

    def __neg__(self) -> "FormValue":
        return FormValue(self.degree, -self.coeffs, self.chart)

    def scale(self, c) -> "FormValue":
        c = np.asarray(c, dtype=float)
        return FormValue(self.degree, self.coeffs * c[..., None], self.chart)

    __rmul__ = scale

    def __mul__(self, c):
        return self.scale(c)

    def __xor__(self, other: "FormValue") -> "FormValue":
        return wedge(self, other)

    def component(self, *idx: str) -> np.ndarray:
        """Coefficient of d(idx[0])^d(idx[1])^..., sign-adjusted for order."""
        pos = tuple(self.chart.coords.index(i) for i in idx)
        if len(set(pos)) < len(pos):
            return np.zeros(self.batch_shape)
        key = tuple(sorted(pos))
        return _perm_sign(pos) * self.coeffs[..., _index(self.chart.dim, self.degree)[key]]

    def top(self) -> np.ndarray:
        """Coefficient against the chart's positive volume form."""
        if self.degree != self.chart.dim:
            raise ValueError("not a top-degree form")
        return self.chart.orientation * self.coeffs[..., 0]

    def norm(self) -> np.ndarray:
        return np.sqrt(np.sum(self.coeffs**2, axis=-1))

    def __repr__(self) -> str:
        if self.batch_shape:
            return f"FormValue(deg={self.degree}, chart={self.chart.name}, batch={self.batch_shape})"
        terms = []
        for c, I in zip(self.coeffs, basis(self.chart.dim, self.degree)):
            if c != 0:
                terms.append(f"{c:+.6g} " + "^".join("d" + self.chart.coords[i] for i in I))
        return " ".join(terms) or "0"


def zero(degree: int, chart: Chart = COLLAR, batch: tuple[int, ...] = ()) -> FormValue:
    return FormValue(degree, np.zeros(batch + (comb(chart.dim, degree),)), chart)


def constant(value, chart: Chart = COLLAR) -> FormValue:
    value = np.asarray(value, dtype=float)
    return FormValue(0, value[..., None], chart)


def one_form(chart: Chart = COLLAR, **components) -> FormValue:
    """Build a 1-form from named coordinate coefficients, e.g. one_form(x=1, y=-2)."""
    arrays = {k: np.asarray(v, dtype=float) for k, v in components.items()}
    batch = np.broadcast_shapes(*(a.shape for a in arrays.values())) if arrays else ()
    c = np.zeros(batch + (chart.dim,))
    for name, a in arrays.items():
        c[..., chart.coords.index(name)] = a
    return FormValue(1, c, chart)


def d(name: str, chart: Chart = COLLAR) -> FormValue:
    return one_form(chart, **{name: 1.0})


def wedge(a: FormValue, b: FormValue) -> FormValue:
    a._check(b)
    n = a.chart.dim
    k = a.degree + b.degree
    batch = np.broadcast_shapes(a.batch_shape, b.batch_shape)
    if k > n:
        # degree overflow: the zero form of the top degree stands in
        return zero(n, a.chart, batch)
    T = _wedge_tensor(n, a.degree, b.degree)
    out = np.zeros(batch + (T.shape[2],))
    # T is sparse: accumulate only the nonzero index pairs
    for i, j, m in zip(*np.nonzero(T)):
        out[..., m] += T[i, j, m] * (a.coeffs[..., i] * b.coeffs[..., j])
    return FormValue(k, out, a.chart)


def wedge_all(*forms: FormValue) -> FormValue:
    out = forms[0]
    for f in forms[1:]:
        out = wedge(out, f)
    return out


def wedge_abs(*forms: FormValue) -> FormValue:
    """Wedge of the absolute coefficients with all signs dropped.

    Bounds the sum of absolute products entering each coefficient of the
    true wedge, the natural scale for rounding error.
    """
    out = FormValue(forms[0].degree, np.abs(forms[0].coeffs), forms[0].chart)
    for f in forms[1:]:
        out._check(f)
        n, k = out.chart.dim, out.degree + f.degree
        batch = np.broadcast_shapes(out.batch_shape, f.batch_shape)
        if k > n:
            return zero(n, out.chart, batch)
        T = _wedge_tensor(n, out.degree, f.degree)
        acc = np.zeros(batch + (T.shape[2],))
        for i, j, m in zip(*np.nonzero(T)):
            acc[..., m] += out.coeffs[..., i] * np.abs(f.coeffs[..., j])
        out = FormValue(k, acc, out.chart)
    return out


def orientation_sign(top: FormValue, tol: float = 0.0):
    """Sign of a top form against the chart's positive orientation."""
    v = top.top()
    return np.where(v > tol, 1, np.where(v < -tol, -1, 0))


def pullback(form: FormValue, jacobian: np.ndarray, target: Chart) -> FormValue:
    """Pull back along a map whose Jacobian is ``jacobian[..., i, j] = d(src_i)/d(tgt_j)``.

    A source covector dsrc_i becomes sum_j J[i, j] dtgt_j; k-forms transform by
    k x k minors.
    """
    src_n = form.chart.dim
    k = form.degree
    J = np.asarray(jacobian, dtype=float)
    if k == 0:
        return FormValue(0, form.coeffs, target)
    out = np.zeros(np.broadcast_shapes(form.batch_shape, J.shape[:-2]) + (comb(target.dim, k),))
    for i, I in enumerate(basis(src_n, k)):
        for j, K in enumerate(basis(target.dim, k)):
            minor = J[..., list(I), :][..., :, list(K)]
            out[..., j] += form.coeffs[..., i] * np.linalg.det(minor)
    return FormValue(k, out, target)


@dataclass(frozen=True)
class FormField:
    """A form-valued function on a chart with an analytic exterior derivative.

    ``evaluate`` and ``derivative`` accept point arrays of shape (..., dim).
    ``lower``/``upper`` bound the chart domain when the field is only defined
    on a box.
    """

    evaluate: Callable[[np.ndarray], FormValue]
    derivative: Callable[[np.ndarray], FormValue]
    chart: Chart = COLLAR
    lower: Optional[np.ndarray] = None
    upper: Optional[np.ndarray] = None
    name: str = field(default="field")

    def __call__(self, point) -> FormValue:
        return self.evaluate(np.asarray(point, dtype=float))


def exterior_derivative_fd(fld: FormField, point, h: float = 1e-5) -> FormValue:
    """Central-difference d of a field; antisymmetrised by wedging with dx_i."""
    if h <= 0:
        raise ValueError("step must be positive")
    p = np.asarray(point, dtype=float)
    n = fld.chart.dim
    if fld.lower is not None and np.any(p - h < np.asarray(fld.lower)):
        raise ValueError("point too close to the chart boundary for the stencil")
    if fld.upper is not None and np.any(p + h > np.asarray(fld.upper)):
        raise ValueError("point too close to the chart boundary for the stencil")
    out = None
    for i in range(n):
        step = np.zeros(n)
        step[i] = h
        fp = fld.evaluate(p + step)
        fm = fld.evaluate(p - step)
        di = FormValue(fp.degree, (fp.coeffs - fm.coeffs) / (2 * h), fld.chart)
        term = wedge(d(fld.chart.coords[i], fld.chart), di)
        out = term if out is None else out + term
    return out


def fd_error(fld: FormField, point, h: float = 1e-5) -> float:
    """Max abs difference between analytic and finite-difference d."""
    exact = fld.derivative(np.asarray(point, dtype=float))
    approx = exterior_derivative_fd(fld, point, h)
    return float(np.max(np.abs(exact.coeffs - approx.coeffs)))
