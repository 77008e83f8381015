"""Linear stability of the aligned and orthogonal equilibria, effective potentials.

``aligned_spectrum`` solves the quartic for perturbations ``~exp(s t)`` about
``varpi = (0, 0, W)``, ``iota = (0, 0, J)`` as a quadratic in ``x = s**2``.
Eliminating the 2x2 block system for ``(varpi_2, iota_2)`` gives

    x**2 - beta x + c = 0,   beta = J**2 (r1 - r2) + W**2 (r1 r2 - 1),
                             c    = -r1 r2 (J**2 - W**2)**2.

``compat=True`` swaps in ``c = -r1 (J**2 - W**2)**2`` for comparison with
older published tables; that variant misclassifies stable states.
"""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .dk_dynamics import DKState, _ideal

__all__ = [
    "AlignedStabilityReport",
    "OrthogonalReport",
    "PotentialReport",
    "aligned_spectrum",
    "orthogonal_modes",
    "potential_coefficients",
    "classify_shape",
    "verify_reduction",
    "prony_frequencies",
    "fit_growth_rate",
    "measured_aligned_modes",
    "PUBLISHED_POTENTIALS",
]

STABLE = "stable-oscillatory"
MARGINAL = "marginal"
UNSTABLE_DIRECT = "unstable-direct"
UNSTABLE_OSC = "unstable-oscillatory"

ROOT_TOL = 1e-12

# Published coefficients of 2V_i at the start of the slowly-ramped Euler run,
# as (quadratic, quartic) per axis, two decimals, with shape letters.
PUBLISHED_POTENTIALS = {
    "coefficients": ((-0.11, 0.08), (-0.12, -0.24), (0.24, -0.12)),
    "shapes": ("M", "U", "W"),
    "shapes_after": ("W", "W", "M"),
    "no_sign_change": ((1, "quartic"),),
}


@dataclass(frozen=True)
class AlignedStabilityReport:
    W: float
    J: float
    r1: float
    r2: float
    beta: float
    c: float
    discriminant: float
    x_roots: tuple[complex, complex]
    s_roots: tuple[complex, complex, complex, complex]
    classification: str
    r2_threshold: float
    compat: bool = False

    @property
    def frequencies(self) -> tuple[float, ...]:
        """Oscillation frequencies ``|Im s|`` of the two modes, ascending."""
        return tuple(sorted(abs(cmath.sqrt(x).imag) for x in self.x_roots))

    @property
    def growth_rate(self) -> float:
        """Largest ``Re s`` over the four roots."""
        return max(s.real for s in self.s_roots)


def _classify(x_roots, discriminant: float, scale: float) -> str:
    tol = ROOT_TOL * max(1.0, scale)
    if discriminant < -tol * max(1.0, scale):
        return UNSTABLE_OSC
    xs = [x.real for x in x_roots]
    if any(x > tol for x in xs):
        return UNSTABLE_DIRECT
    if any(abs(x) <= tol for x in xs):
        return MARGINAL
    return STABLE


def aligned_spectrum(W: float, J: float, r1: float, r2: float, compat: bool = False) -> AlignedStabilityReport:
    beta = J**2 * (r1 - r2) + W**2 * (r1 * r2 - 1.0)
    if compat:
        c = -r1 * (J**2 - W**2) ** 2
    else:
        c = -r1 * r2 * (J**2 - W**2) ** 2
    disc = beta**2 - 4.0 * c
    if disc >= 0.0:
        sq = math.sqrt(disc)
        # avoid cancellation in the smaller root
        q = 0.5 * (beta + math.copysign(sq, beta)) if beta != 0.0 else 0.5 * sq
        x1 = q
        x2 = c / q if q != 0.0 else 0.0
        x_roots = tuple(sorted((complex(x1), complex(x2)), key=lambda z: z.real, reverse=True))
    else:
        sq = cmath.sqrt(disc)
        x_roots = ((beta + sq) / 2.0, (beta - sq) / 2.0)
    s_roots = []
    for x in x_roots:
        s = cmath.sqrt(x)
        s_roots.extend([s, -s])
    den = J**2 - r1 * W**2
    thr = (r1 * J**2 - W**2) / den if den != 0.0 else math.nan
    return AlignedStabilityReport(
        W=W,
        J=J,
        r1=r1,
        r2=r2,
        beta=beta,
        c=c,
        discriminant=disc,
        x_roots=x_roots,
        s_roots=tuple(s_roots),
        classification=_classify(x_roots, disc, max(abs(beta), math.sqrt(abs(c)))),
        r2_threshold=thr,
        compat=compat,
    )


@dataclass(frozen=True)
class OrthogonalReport:
    X: float
    K: float
    r: tuple[float, float, float]
    omega3_kind: str  # "frequency" or "growth"
    omega3_rate: float
    iota_frequencies: tuple[float, float]
    branch_x: float
    branch_kind: str  # "frequency", "growth" or "marginal"
    branch_rate: float


def orthogonal_modes(X: float, K: float, r) -> OrthogonalReport:
    """Small-oscillation rates about ``varpi_3 = X``, ``iota_1 = K``."""
    r1, r2, r3 = (float(v) for v in r)
    if r3 >= 0.0:
        w3_kind, w3_rate = "frequency", math.sqrt(r3) * abs(K)
    else:
        w3_kind, w3_rate = "growth", math.sqrt(-r3) * abs(K)
    arg = X**2 + r3 * K**2
    iota2 = math.sqrt(arg) if arg >= 0.0 else math.nan
    x = r2 * (K**2 + r1 * X**2)
    if abs(x) <= ROOT_TOL:
        kind, rate = "marginal", 0.0
    elif x < 0.0:
        kind, rate = "frequency", math.sqrt(-x)
    else:
        kind, rate = "growth", math.sqrt(x)
    return OrthogonalReport(
        X=X,
        K=K,
        r=(r1, r2, r3),
        omega3_kind=w3_kind,
        omega3_rate=w3_rate,
        iota_frequencies=(abs(X), iota2),
        branch_x=x,
        branch_kind=kind,
        branch_rate=rate,
    )


@dataclass(frozen=True)
class PotentialReport:
    """Coefficients ``(quadratic, quartic)`` of ``2 V_i`` and shapes of ``-V_i``."""

    coefficients: tuple[tuple[float, float], ...]
    shapes: tuple[str, str, str]
    # per axis: (quadratic carries r2, quartic carries r2)
    sign_change_flags: tuple[tuple[bool, bool], ...]


def classify_shape(quadratic: float, quartic: float) -> str:
    """Letter for the curve ``quadratic * w**2 + quartic * w**4``.

    U: single well, W: double well, M: central well between two humps,
    cap: single hump, flat: both coefficients zero.
    """
    if quartic == 0.0 and quadratic == 0.0:
        return "flat"
    if quartic > 0.0:
        return "U" if quadratic >= 0.0 else "W"
    if quartic < 0.0:
        return "M" if quadratic > 0.0 else "cap"
    return "U" if quadratic > 0.0 else "cap"


def potential_coefficients(C, r) -> PotentialReport:
    C1, C2, C3 = (float(v) for v in C)
    r1, r2, r3 = (float(v) for v in r)
    coefs = (
        (r2 * r3 * (C2 - C3) * r1, r2 * r3),
        (r1 * r3 * (C3 - C1) * r2, r1 * r3),
        (r1 * r2 * (C1 - C2) * r3, r1 * r2),
    )
    # the particle obeys w'' = +dV/dw, so the mechanical potential is -V
    shapes = tuple(classify_shape(-a, -b) for a, b in coefs)
    flags = ((True, True), (True, False), (True, True))
    return PotentialReport(coefficients=coefs, shapes=shapes, sign_change_flags=flags)


def verify_reduction(C, r, state: DKState) -> float:
    """Max deviation between ``w''`` from the equations of motion and the potential form.

    Requires ``iota = 0``. ``C`` may be ``None``, in which case it is computed
    from the state.
    """
    w = np.asarray(state.varpi, dtype=float)
    if np.any(state.iota != 0.0):
        raise ValueError("verify_reduction needs iota = 0")
    r1, r2, r3 = (float(v) for v in r)
    if C is None:
        q = w**2 / np.array([r1, r2, r3])
        C = (q[1] - q[2], -q[0] + q[2], q[0] - q[1])
    C1, C2, C3 = C
    y = np.concatenate([w, np.zeros(3)])
    wd = _ideal(y, (r1, r2, r3))[:3]
    # product rule on w1' = r1 w2 w3 and cyclic
    w_dd = np.array(
        [
            r1 * (wd[1] * w[2] + w[1] * wd[2]),
            r2 * (wd[0] * w[2] + w[0] * wd[2]),
            r3 * (wd[0] * w[1] + w[0] * wd[1]),
        ]
    )
    rhs = np.array(
        [
            r2 * r3 * w[0] * ((C2 - C3) * r1 + 2.0 * w[0] ** 2),
            r1 * r3 * w[1] * ((C3 - C1) * r2 + 2.0 * w[1] ** 2),
            r1 * r2 * w[2] * ((C1 - C2) * r3 + 2.0 * w[2] ** 2),
        ]
    )
    direct = np.array(
        [
            r1 * w[0] * (r2 * w[2] ** 2 + r3 * w[1] ** 2),
            r2 * w[1] * (r3 * w[0] ** 2 + r1 * w[2] ** 2),
            r3 * w[2] * (r1 * w[1] ** 2 + r2 * w[0] ** 2),
        ]
    )
    return float(max(np.max(np.abs(w_dd - rhs)), np.max(np.abs(w_dd - direct))))


def prony_frequencies(signal, dt: float, n_modes: int) -> np.ndarray:
    """Angular frequencies of ``n_modes`` real sinusoids in a uniformly sampled signal.

    Least-squares linear prediction of order ``2 n_modes``; the roots of the
    prediction polynomial are ``exp(+-i f dt)``.
    """
    x = np.asarray(signal, dtype=float)
    x = x / np.max(np.abs(x))
    p = 2 * n_modes
    A = np.column_stack([x[p - 1 - k : len(x) - 1 - k] for k in range(p)])
    b = x[p:]
    coef, *_ = np.linalg.lstsq(A, b, rcond=None)
    roots = np.roots(np.concatenate([[1.0], -coef]))
    freqs = np.abs(np.angle(roots)) / dt
    freqs = np.sort(freqs[np.angle(roots) > 0])
    return freqs


def fit_growth_rate(times, amplitude, lo: float, hi: float) -> float:
    """Slope of ``log(amplitude)`` over samples with ``lo <= amplitude <= hi``.

    Only samples before the amplitude first exceeds ``hi`` are used.
    """
    t = np.asarray(times, dtype=float)
    a = np.asarray(amplitude, dtype=float)
    above = np.nonzero(a > hi)[0]
    stop = above[0] if len(above) else len(a)
    mask = (a >= lo) & (a <= hi) & (np.arange(len(a)) < stop)
    if mask.sum() < 3:
        raise ValueError("too few samples in the fitting window")
    slope, _ = np.polyfit(t[mask], np.log(a[mask]), 1)
    return float(slope)


def measured_aligned_modes(W: float, J: float, r1: float, r2: float, eps: float = 1e-6,
                           t_end: float = 200.0, dt: float = 0.05, seed: Optional[int] = 0):
    """Integrate the full equations near the aligned state and return the sampled run."""
    from .dk_dynamics import ParameterSchedule, make_rhs
    from .integrator import IntegrationSettings, integrate

    rng = np.random.default_rng(seed)
    pert = eps * rng.uniform(0.5, 1.0, size=4)
    y0 = [pert[0], pert[1], W, pert[2], pert[3], J]
    f = make_rhs(ParameterSchedule.fixed_ratios(r1, r2))
    return integrate(f, y0, (0.0, t_end), IntegrationSettings(rtol=1e-11, atol=1e-16, sample_dt=dt))
