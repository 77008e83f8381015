"""Truncated Lie-Taylor expansions of vector and scalar fields.

A vector field is stored through its normalised derivative coefficients at
the origin,

    u^j = U^j + U^j_m x^m + U^j_mn x^m x^n + U^j_mnq x^m x^n x^q,

where ``U^j_mn = (1/2!) d^2 u^j / dx^m dx^n`` and so on. The first index of
every array is the field component, the trailing indices are derivative
directions. Orders 0..3 are stored; orders 0..2 evolve.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "TaylorHierarchy",
    "ScalarHierarchy",
    "HierarchyDiagnostics",
    "bracket_linear",
    "hierarchy_rhs",
    "mass_hierarchy_rhs",
    "diagnostics",
    "symmetrize",
]

_PERM2 = list(itertools.permutations(range(2)))
_PERM3 = list(itertools.permutations(range(3)))


def symmetrize(a: np.ndarray) -> np.ndarray:
    """Average ``a`` over all permutations of its trailing indices (after the first)."""
    a = np.asarray(a, dtype=float)
    n = a.ndim - 1
    if n <= 1:
        return a.copy()
    perms = _PERM2 if n == 2 else _PERM3 if n == 3 else list(itertools.permutations(range(n)))
    out = np.zeros_like(a)
    for p in perms:
        out += np.transpose(a, (0,) + tuple(i + 1 for i in p))
    return out / len(perms)


def _frozen(a, shape) -> np.ndarray:
    arr = np.array(a, dtype=float).reshape(shape)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class TaylorHierarchy:
    """Coefficient tensors of a cubic polynomial vector field."""

    order0: np.ndarray = field(default_factory=lambda: np.zeros(3))
    order1: np.ndarray = field(default_factory=lambda: np.zeros((3, 3)))
    order2: np.ndarray = field(default_factory=lambda: np.zeros((3, 3, 3)))
    order3: np.ndarray = field(default_factory=lambda: np.zeros((3, 3, 3, 3)))

    def __post_init__(self):
        object.__setattr__(self, "order0", _frozen(self.order0, (3,)))
        object.__setattr__(self, "order1", _frozen(self.order1, (3, 3)))
        object.__setattr__(self, "order2", _frozen(self.order2, (3, 3, 3)))
        object.__setattr__(self, "order3", _frozen(self.order3, (3, 3, 3, 3)))

    @classmethod
    def zeros(cls) -> "TaylorHierarchy":
        return cls()

    @classmethod
    def random(cls, rng: np.random.Generator, low=-1.0, high=1.0, orders=(0, 1, 2, 3)):
        """Random hierarchy with entries in ``[low, high]``; higher orders symmetrised."""
        parts = [np.zeros(3), np.zeros((3, 3)), np.zeros((3, 3, 3)), np.zeros((3, 3, 3, 3))]
        for k in orders:
            parts[k] = symmetrize(rng.uniform(low, high, size=(3,) * (k + 1)))
        return cls(*parts)

    def orders(self) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
        return self.order0, self.order1, self.order2, self.order3

    def flat(self) -> np.ndarray:
        """All coefficients as one vector (orders 0..3 concatenated)."""
        return np.concatenate([a.ravel() for a in self.orders()])

    @classmethod
    def from_flat(cls, v) -> "TaylorHierarchy":
        v = np.asarray(v, dtype=float)
        return cls(v[:3], v[3:12], v[12:39], v[39:120])

    def symmetry_defect(self) -> float:
        """Largest deviation from trailing-index symmetry over orders 2 and 3."""
        d2 = np.max(np.abs(self.order2 - symmetrize(self.order2)))
        d3 = np.max(np.abs(self.order3 - symmetrize(self.order3)))
        return float(max(d2, d3))

    def evaluate(self, x) -> np.ndarray:
        """Value of the polynomial field at the point ``x``."""
        x = np.asarray(x, dtype=float)
        return (
            self.order0
            + self.order1 @ x
            + np.einsum("jmn,m,n->j", self.order2, x, x)
            + np.einsum("jmnq,m,n,q->j", self.order3, x, x, x)
        )


@dataclass(frozen=True)
class ScalarHierarchy:
    """Point-mass coefficients up to second order."""

    s0: float = 0.0
    s1: np.ndarray = field(default_factory=lambda: np.zeros(3))
    s2: np.ndarray = field(default_factory=lambda: np.zeros((3, 3)))

    def __post_init__(self):
        object.__setattr__(self, "s0", float(self.s0))
        object.__setattr__(self, "s1", _frozen(self.s1, (3,)))
        object.__setattr__(self, "s2", _frozen(self.s2, (3, 3)))

    @classmethod
    def random(cls, rng: np.random.Generator, low=-1.0, high=1.0):
        s2 = rng.uniform(low, high, size=(3, 3))
        return cls(rng.uniform(low, high), rng.uniform(low, high, size=3), 0.5 * (s2 + s2.T))


@dataclass(frozen=True)
class HierarchyDiagnostics:
    t: float
    trace_powers: tuple[float, float, float, float]
    frobenius1: float
    frobenius2: float
    a0: float
    # math.inf when the second-order coefficients vanish
    lam: float


def bracket_linear(a, b) -> np.ndarray:
    """Matrix commutator ``AB - BA``.

    This is the Lie bracket of the linear fields ``x -> A x`` and ``x -> B x``
    with the convention ``[v, w]^i = w^k d_k v^i - v^k d_k w^i``.
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    return a @ b - b @ a


def hierarchy_rhs(u: TaylorHierarchy, q: TaylorHierarchy) -> TaylorHierarchy:
    """Time derivative of the coefficients of ``q`` under ``dq/dt = [u, q]``.

    Orders 0, 1 and 2 are returned; the order-3 slot is zero. Order-3 input
    coefficients only enter the order-2 equation.
    """
    U0, U1, U2, U3 = u.orders()
    Q0, Q1, Q2, Q3 = q.orders()

    d0 = U1 @ Q0 - Q1 @ U0

    d1 = (
        U1 @ Q1
        - Q1 @ U1
        + 2.0 * np.einsum("jki,i->jk", U2, Q0)
        - 2.0 * np.einsum("jki,i->jk", Q2, U0)
    )

    # q.grad(u) - u.grad(q) collected at quadratic order, then symmetrised in (k, l)
    d2 = (
        2.0 * np.einsum("ik,jil->jkl", Q1, U2)
        - 2.0 * np.einsum("ik,jil->jkl", U1, Q2)
        + np.einsum("ji,ikl->jkl", U1, Q2)
        - np.einsum("ji,ikl->jkl", Q1, U2)
        + 3.0 * np.einsum("i,jikl->jkl", Q0, U3)
        - 3.0 * np.einsum("i,jikl->jkl", U0, Q3)
    )
    d2 = 0.5 * (d2 + d2.transpose(0, 2, 1))

    return TaylorHierarchy(d0, d1, d2, np.zeros((3, 3, 3, 3)))


def mass_hierarchy_rhs(u: TaylorHierarchy, rho: ScalarHierarchy) -> ScalarHierarchy:
    """Time derivative of the point-mass coefficients under ``d(rho)/dt = -div(rho u)``.

    ``rho`` is truncated at second order, so third-derivative coefficients of
    the density are taken as zero.
    """
    U0, U1, U2, U3 = u.orders()
    r0, r1, r2 = rho.s0, rho.s1, rho.s2

    div0 = np.trace(U1)
    div1 = np.einsum("jjk->k", U2)
    div2 = np.einsum("jjkl->kl", U3)

    d0 = -r0 * div0 - r1 @ U0

    d1 = -2.0 * r0 * div1 - r1 * div0 - r1 @ U1 - 2.0 * (U0 @ r2)

    d2 = (
        -3.0 * r0 * div2
        - np.outer(r1, div1)
        - np.outer(div1, r1)
        - r2 * div0
        - np.einsum("j,jkl->kl", r1, U2)
        - np.einsum("jk,jl->kl", r2, U1)
        - np.einsum("jl,jk->kl", r2, U1)
    )
    d2 = 0.5 * (d2 + d2.T)
    return ScalarHierarchy(d0, d1, d2)


def diagnostics(q: TaylorHierarchy, t: float = 0.0) -> HierarchyDiagnostics:
    """Trace powers, Frobenius sums and ordering lengthscales of ``q``."""
    q1 = q.order1
    powers = []
    m = np.eye(3)
    for _ in range(4):
        m = m @ q1
        powers.append(float(np.trace(m)))

    n0 = float(np.linalg.norm(q.order0))
    n1 = float(np.linalg.norm(q1))
    n2 = float(np.linalg.norm(q.order2))
    if n0 == 0.0:
        a0 = 0.0
    elif n1 == 0.0:
        a0 = np.inf
    else:
        a0 = n0 / n1
    lam = np.inf if n2 == 0.0 else n1 / n2

    return HierarchyDiagnostics(
        t=float(t),
        trace_powers=tuple(powers),
        frobenius1=float(np.sum(q1**2)),
        frobenius2=float(np.sum(q.order2**2)),
        a0=float(a0),
        lam=float(lam),
    )
