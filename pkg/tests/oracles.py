"""Independent reference implementations used as test oracles."""
from __future__ import annotations

import itertools
from math import factorial

import numpy as np

from trisymp.forms import FormValue, basis


def perm_sign(p) -> int:
    p = list(p)
    sign = 1
    for i in range(len(p)):
        while p[i] != i:
            j = p[i]
            p[i], p[j] = p[j], p[i]
            sign = -sign
    return sign


def to_tensor(form: FormValue) -> np.ndarray:
    """Fully antisymmetric coefficient tensor, batch axes first."""
    n, k = form.chart.dim, form.degree
    out = np.zeros(form.batch_shape + (n,) * k)
    for c, I in enumerate(basis(n, k)):
        for p in itertools.permutations(range(k)):
            idx = tuple(I[q] for q in p)
            out[(Ellipsis,) + idx] += perm_sign(p) * form.coeffs[..., c]
    return out


def from_tensor(T: np.ndarray, n: int, k: int) -> np.ndarray:
    return np.stack([T[(Ellipsis,) + I] for I in basis(n, k)], -1)


def wedge_oracle(a: FormValue, b: FormValue) -> np.ndarray:
    """(a ^ b)(v_1..v_{k+l}) = 1/(k! l!) sum over all permutations sigma of
    sign(sigma) a(v_sigma(1..k)) b(v_sigma(k+1..k+l))."""
    n, k, l = a.chart.dim, a.degree, b.degree
    if k + l > n:
        return np.zeros(np.broadcast_shapes(a.batch_shape, b.batch_shape) + (1,))
    A, B = to_tensor(a), to_tensor(b)
    batch = np.broadcast_shapes(a.batch_shape, b.batch_shape)
    out = np.zeros(batch + (len(basis(n, k + l)),))
    for c, I in enumerate(basis(n, k + l)):
        acc = np.zeros(batch)
        for p in itertools.permutations(range(k + l)):
            idx = [I[q] for q in p]
            acc = acc + perm_sign(p) * A[(Ellipsis,) + tuple(idx[:k])] * B[(Ellipsis,) + tuple(idx[k:])]
        out[..., c] = acc / (factorial(k) * factorial(l))
    return out
