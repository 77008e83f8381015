"""Dense monomial-array polynomials used to cross-check the coefficient hierarchy.

A polynomial in ``x1, x2, x3`` is an array ``p[e1, e2, e3]`` holding the
coefficient of ``x1**e1 x2**e2 x3**e3``. Products and derivatives are done
directly on these arrays, without reference to the tensor formulas.
"""
from __future__ import annotations

import itertools
import math

import numpy as np

from .taylor_hierarchy import ScalarHierarchy, TaylorHierarchy

SIZE = 4  # exponents 0..3 per variable for the factors
PSIZE = 2 * SIZE - 1  # products


def _empty(size: int = SIZE) -> np.ndarray:
    return np.zeros((size, size, size))


def _product_index() -> np.ndarray:
    e = np.indices((SIZE, SIZE, SIZE)).reshape(3, -1)
    tot = e[:, :, None] + e[:, None, :]
    return np.ravel_multi_index(tuple(tot), (PSIZE, PSIZE, PSIZE)).ravel()


_PRODUCT_INDEX = _product_index()


def _exponent(idx) -> tuple[int, int, int]:
    e = [0, 0, 0]
    for m in idx:
        e[m] += 1
    return tuple(e)


def tensor_to_poly(t: np.ndarray) -> np.ndarray:
    """Polynomial ``sum t[m1..mk] x^m1 ... x^mk`` for one component."""
    p = _empty()
    k = t.ndim
    if k == 0:
        p[0, 0, 0] = float(t)
        return p
    for idx in itertools.product(range(3), repeat=k):
        p[_exponent(idx)] += t[idx]
    return p


def poly_to_tensor(p: np.ndarray, k: int) -> np.ndarray:
    """Symmetric normalised-derivative tensor of the degree-``k`` part of ``p``."""
    if k == 0:
        return np.array(p[0, 0, 0])
    t = np.zeros((3,) * k)
    for idx in itertools.product(range(3), repeat=k):
        e = _exponent(idx)
        mult = math.factorial(k) / math.prod(math.factorial(n) for n in e)
        t[idx] = p[e] / mult
    return t


def field_to_polys(h: TaylorHierarchy) -> list[np.ndarray]:
    polys = []
    for j in range(3):
        p = _empty()
        for order in h.orders():
            p += tensor_to_poly(order[j])
        polys.append(p)
    return polys


def scalar_to_poly(s: ScalarHierarchy) -> np.ndarray:
    return tensor_to_poly(np.array(s.s0)) + tensor_to_poly(s.s1) + tensor_to_poly(s.s2)


def diff(p: np.ndarray, axis: int) -> np.ndarray:
    """Partial derivative; the result keeps the shape of ``p``."""
    size = p.shape[0]
    out = np.zeros_like(p)
    n = np.arange(1, size)
    shape = [1, 1, 1]
    shape[axis] = size - 1
    src = np.take(p, n, axis=axis) * n.reshape(shape)
    sl = [slice(None)] * 3
    sl[axis] = slice(0, size - 1)
    out[tuple(sl)] = src
    return out


def mul(p: np.ndarray, q: np.ndarray) -> np.ndarray:
    """Product of two factor-size polynomials (exponents add)."""
    w = np.outer(p.ravel(), q.ravel()).ravel()
    full = np.bincount(_PRODUCT_INDEX, weights=w, minlength=PSIZE**3)
    return full.reshape(PSIZE, PSIZE, PSIZE)


def bracket_polys(u: list[np.ndarray], q: list[np.ndarray]) -> list[np.ndarray]:
    """Components of ``q.grad(u) - u.grad(q)``."""
    out = []
    for j in range(3):
        acc = _empty(PSIZE)
        for i in range(3):
            acc += mul(q[i], diff(u[j], i)) - mul(u[i], diff(q[j], i))
        out.append(acc)
    return out


def hierarchy_rhs_oracle(u: TaylorHierarchy, q: TaylorHierarchy) -> TaylorHierarchy:
    b = bracket_polys(field_to_polys(u), field_to_polys(q))
    parts = [np.stack([poly_to_tensor(b[j], k) for j in range(3)]) for k in range(3)]
    return TaylorHierarchy(parts[0], parts[1], parts[2], np.zeros((3, 3, 3, 3)))


def mass_rhs_oracle(u: TaylorHierarchy, rho: ScalarHierarchy) -> ScalarHierarchy:
    """Coefficients of ``-div(rho u)`` up to second order."""
    up = field_to_polys(u)
    rp = scalar_to_poly(rho)
    div = _empty(PSIZE)
    for i in range(3):
        div += diff(mul(rp, up[i]), i)
    div = -div
    return ScalarHierarchy(poly_to_tensor(div, 0), poly_to_tensor(div, 1), poly_to_tensor(div, 2))


def max_difference(a: TaylorHierarchy, b: TaylorHierarchy) -> float:
    return float(np.max(np.abs(a.flat() - b.flat())))


def max_scalar_difference(a: ScalarHierarchy, b: ScalarHierarchy) -> float:
    return float(
        max(abs(a.s0 - b.s0), np.max(np.abs(a.s1 - b.s1)), np.max(np.abs(a.s2 - b.s2)))
    )
