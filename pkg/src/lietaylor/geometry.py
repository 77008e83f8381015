"""Ellipsoid geometry of the anisotropic scaling and Dolzhansky's basis.

Conventions
-----------
Semi-axes ``a`` give moments ``I_i = a_j**2 + a_k**2`` and shape ratios
``r_1 = (I_3 - I_2)/I_1`` (cyclic). A linear field ``x -> E x`` is stored as
its gradient matrix ``E[q, r] = d u^q / d x^r``.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .taylor_hierarchy import bracket_linear

__all__ = [
    "GeometryError",
    "EllipsoidGeometry",
    "BasisSet",
    "CYCLIC",
    "LEVI_CIVITA",
    "geometry_from_axes",
    "geometry_from_moments",
    "axes_from_moments",
    "r3_from",
    "moment_ratios_from_r",
    "moments_from_r",
    "rotation_generator",
    "skew_from_vector",
    "vector_from_skew",
    "basis_set",
    "verify_algebra",
    "omega_from_varpi",
    "omega_general",
    "curl_linear",
]

# even permutations (i, j, k), zero-based
CYCLIC = ((0, 1, 2), (1, 2, 0), (2, 0, 1))

LEVI_CIVITA = np.zeros((3, 3, 3))
for _i, _j, _k in CYCLIC:
    LEVI_CIVITA[_i, _j, _k] = 1.0
    LEVI_CIVITA[_i, _k, _j] = -1.0
LEVI_CIVITA.setflags(write=False)


class GeometryError(ValueError):
    """Invalid axes, moments or shape-ratio constraint."""


@dataclass(frozen=True)
class EllipsoidGeometry:
    a: np.ndarray
    I: np.ndarray
    r: np.ndarray
    sqrt_g: float

    @property
    def G(self) -> np.ndarray:
        """Rescaled metric ``diag(a**2) / sqrt_g`` of the scaled coordinates."""
        return np.diag(self.a**2) / self.sqrt_g

    def constraint_residual(self) -> float:
        r1, r2, r3 = self.r
        return float(r1 + r2 + r3 + r1 * r2 * r3)


@dataclass(frozen=True)
class BasisSet:
    e: tuple[np.ndarray, np.ndarray, np.ndarray]
    c: tuple[np.ndarray, np.ndarray, np.ndarray]
    curl_e: tuple[np.ndarray, np.ndarray, np.ndarray]


def _ratios(I: np.ndarray) -> np.ndarray:
    return np.array([(I[k] - I[j]) / I[i] for i, j, k in CYCLIC])


def geometry_from_axes(a) -> EllipsoidGeometry:
    a = np.asarray(a, dtype=float).reshape(3)
    if not np.all(np.isfinite(a)) or np.any(a <= 0.0):
        raise GeometryError(f"semi-axes must be positive, got {a.tolist()}")
    a2 = a**2
    I = np.array([a2[j] + a2[k] for _, j, k in CYCLIC])
    return EllipsoidGeometry(a=a, I=I, r=_ratios(I), sqrt_g=float(np.prod(a)))


def axes_from_moments(I) -> np.ndarray:
    """Invert ``I_i = a_j**2 + a_k**2`` for the semi-axes."""
    I = np.asarray(I, dtype=float).reshape(3)
    a2 = np.array([(I[j] + I[k] - I[i]) / 2.0 for i, j, k in CYCLIC])
    for i in range(3):
        if not a2[i] > 0.0:
            raise GeometryError(
                f"moments {I.tolist()} give a{i + 1}^2 = {a2[i]:.6g} <= 0"
            )
    return np.sqrt(a2)


def geometry_from_moments(I) -> EllipsoidGeometry:
    """Geometry whose moments are exactly ``I`` (ratios computed from ``I`` itself)."""
    I = np.asarray(I, dtype=float).reshape(3)
    a = axes_from_moments(I)
    return EllipsoidGeometry(a=a, I=I.copy(), r=_ratios(I), sqrt_g=float(np.prod(a)))


def r3_from(r1: float, r2: float) -> float:
    den = 1.0 + r1 * r2
    if den == 0.0:
        raise GeometryError(f"1 + r1*r2 vanishes for r1={r1}, r2={r2}")
    return -(r1 + r2) / den


def moment_ratios_from_r(r) -> tuple[float, float]:
    """Return ``(I2/I1, I3/I1)`` for shape ratios ``r``."""
    r1, r2, r3 = (float(v) for v in r)
    if 1.0 + r2 == 0.0 or 1.0 - r3 == 0.0:
        raise GeometryError(f"moment ratios singular for r={[r1, r2, r3]}")
    return (1.0 - r1) / (1.0 + r2), (1.0 + r1) / (1.0 - r3)


def moments_from_r(r1: float, r2: float, I1: float = 1.0) -> tuple[np.ndarray, np.ndarray]:
    """Moments (scale fixed by ``I1``) and the full ratio triple for given ``r1, r2``."""
    r = np.array([r1, r2, r3_from(r1, r2)])
    q2, q3 = moment_ratios_from_r(r)
    return np.array([I1, I1 * q2, I1 * q3]), r


def rotation_generator(i: int) -> np.ndarray:
    """Gradient matrix of ``x -> xhat_i cross x`` (zero-based ``i``)."""
    return -LEVI_CIVITA[i].copy()


def skew_from_vector(v) -> np.ndarray:
    """Gradient matrix of ``x -> v cross x``."""
    return -np.einsum("kqr,k->qr", LEVI_CIVITA, np.asarray(v, dtype=float))


def vector_from_skew(m) -> np.ndarray:
    m = np.asarray(m, dtype=float)
    return np.array([m[2, 1] - m[1, 2], m[0, 2] - m[2, 0], m[1, 0] - m[0, 1]]) / 2.0


def basis_set(g: EllipsoidGeometry) -> BasisSet:
    a = g.a
    e, c, curl = [], [], []
    for i, j, k in CYCLIC:
        m = np.zeros((3, 3))
        m[j, k] = -a[j] / a[k]
        m[k, j] = a[k] / a[j]
        e.append(m)
        ci = np.zeros(3)
        ci[i] = a[i]
        c.append(ci)
        cu = np.zeros(3)
        cu[i] = a[j] / a[k] + a[k] / a[j]
        curl.append(cu)
    return BasisSet(e=tuple(e), c=tuple(c), curl_e=tuple(curl))


def verify_algebra(b: BasisSet) -> float:
    """Maximum deviation from the structure constants of the basis.

    Checks ``[e_i, e_j] = e_k``, ``[e_i, c_j] = c_k`` for even ``(ijk)``,
    ``[c_i, c_j] = 0`` and antisymmetry of the brackets.
    """
    dev = 0.0
    for i, j, k in CYCLIC:
        dev = max(dev, np.max(np.abs(bracket_linear(b.e[i], b.e[j]) - b.e[k])))
        dev = max(dev, np.max(np.abs(bracket_linear(b.e[j], b.e[i]) + b.e[k])))
        # bracket of linear field E x with a constant field c is E c
        dev = max(dev, np.max(np.abs(b.e[i] @ b.c[j] - b.c[k])))
        dev = max(dev, np.max(np.abs(b.e[j] @ b.c[i] + b.c[k])))
    # [e_i, c_i] = 0; [c_i, c_j] = 0 holds identically for constant fields
    for i in range(3):
        dev = max(dev, np.max(np.abs(b.e[i] @ b.c[i])))
    return float(dev)


def omega_from_varpi(varpi, g: EllipsoidGeometry) -> np.ndarray:
    """``Omega_i = I_i varpi_i / sqrt_g``."""
    return g.I * np.asarray(varpi, dtype=float) / g.sqrt_g


def omega_general(varpi, G) -> np.ndarray:
    """Metric form ``tr(G) varpi_i - G_ki varpi_k`` for a constant rescaled metric ``G``.

    Orientation follows the basis fields ``x -> xhat_i cross x``, which makes
    it coincide with :func:`omega_from_varpi` for diagonal ``G``.
    """
    varpi = np.asarray(varpi, dtype=float)
    G = np.asarray(G, dtype=float)
    return np.trace(G) * varpi - G.T @ varpi


def curl_linear(G, U) -> np.ndarray:
    """Curl ``omega^j = e^{jrs} G_sq U_qr`` of a linear field for constant ``G``."""
    return np.einsum("jrs,sq,qr->j", LEVI_CIVITA, np.asarray(G, float), np.asarray(U, float))
