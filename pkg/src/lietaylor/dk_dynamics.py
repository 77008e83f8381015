"""Dolzhansky-Kirchhoff equations: state, right-hand sides, invariants, schedules."""
from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .geometry import (
    CYCLIC,
    EllipsoidGeometry,
    GeometryError,
    axes_from_moments,
    geometry_from_axes,
    geometry_from_moments,
    moments_from_r,
)

__all__ = [
    "DKState",
    "InvariantSet",
    "ParameterSchedule",
    "ScheduleError",
    "ResistiveGrowthWarning",
    "ideal_rhs",
    "resistive_rhs",
    "resistive_rates",
    "invariants",
    "schedule_eval",
    "schedule_geometry",
    "make_rhs",
    "C_ABSENT_TOL",
]

# below this |r_i| the Clebsch invariants are reported as absent
C_ABSENT_TOL = 1e-14

SCHEDULE_MODES = ("fixed-axes", "ramp-I3", "ramp-r1")


class ScheduleError(ValueError):
    """Schedule evaluated outside its validity window."""


class ResistiveGrowthWarning(UserWarning):
    """Positive eta2: resistivity is a minimum at the origin and the current grows."""


@dataclass(frozen=True)
class DKState:
    varpi: np.ndarray = field(default_factory=lambda: np.zeros(3))
    iota: np.ndarray = field(default_factory=lambda: np.zeros(3))

    def __post_init__(self):
        for name in ("varpi", "iota"):
            v = np.array(getattr(self, name), dtype=float).reshape(3)
            v.setflags(write=False)
            object.__setattr__(self, name, v)

    @classmethod
    def from_vector(cls, y) -> "DKState":
        y = np.asarray(y, dtype=float)
        return cls(y[:3], y[3:6])

    def vector(self) -> np.ndarray:
        return np.concatenate([self.varpi, self.iota])

    def is_finite(self) -> bool:
        return bool(np.all(np.isfinite(self.varpi)) and np.all(np.isfinite(self.iota)))


@dataclass(frozen=True)
class InvariantSet:
    H0: float
    H1: float
    C0: float
    # None when some r_i vanishes
    C: Optional[tuple[float, float, float]] = None

    def as_row(self) -> list[Optional[float]]:
        c = list(self.C) if self.C is not None else [None, None, None]
        return [self.H0, self.H1, self.C0, *c]


def _ideal(y: np.ndarray, r) -> np.ndarray:
    w1, w2, w3, i1, i2, i3 = y
    r1, r2, r3 = r
    return np.array(
        [
            r1 * (w2 * w3 - i2 * i3),
            r2 * (w1 * w3 - i1 * i3),
            r3 * (w1 * w2 - i1 * i2),
            w2 * i3 - w3 * i2,
            w3 * i1 - w1 * i3,
            w1 * i2 - w2 * i1,
        ]
    )


def resistive_rates(a, eta2: float) -> np.ndarray:
    """Coefficients ``eta2 * (1/a_j**2 + 1/a_k**2)`` multiplying ``iota_i``."""
    inv = 1.0 / np.asarray(a, dtype=float) ** 2
    return eta2 * np.array([inv[j] + inv[k] for _, j, k in CYCLIC])


def ideal_rhs(s: DKState, r) -> DKState:
    """Time derivative of the ideal equations at shape ratios ``r``."""
    return DKState.from_vector(_ideal(s.vector(), r))


def resistive_rhs(s: DKState, r, a, eta2: float) -> DKState:
    """Ideal right-hand side plus the quadratic-resistivity current terms.

    Raises GeometryError when ``r`` disagrees with the ratios implied by ``a``.
    A :class:`ResistiveGrowthWarning` is issued for ``eta2 > 0``.
    """
    r = np.asarray(r, dtype=float)
    implied = geometry_from_axes(a).r
    if np.max(np.abs(implied - r)) > 1e-9:
        raise GeometryError(f"ratios {r.tolist()} inconsistent with axes {list(a)}")
    if eta2 > 0.0:
        warnings.warn(
            f"eta2 = {eta2} > 0: resistivity minimal at the origin, current energy grows",
            ResistiveGrowthWarning,
            stacklevel=2,
        )
    dy = _ideal(s.vector(), r)
    dy[3:] += resistive_rates(a, eta2) * s.iota
    return DKState.from_vector(dy)


def invariants(s: DKState, g: EllipsoidGeometry) -> InvariantSet:
    w, i = s.varpi, s.iota
    I, r = g.I, g.r
    H0 = float(np.sum(I * (w**2 + i**2)))
    H1 = float(np.sum(I * w * i))
    C0 = float(np.sum(i**2))
    C = None
    if np.all(np.abs(r) >= C_ABSENT_TOL):
        q = w**2 / r
        C = (
            float(i[0] ** 2 + q[1] - q[2]),
            float(i[1] ** 2 - q[0] + q[2]),
            float(i[2] ** 2 + q[0] - q[1]),
        )
    return InvariantSet(H0, H1, C0, C)


@dataclass(frozen=True)
class ParameterSchedule:
    """Geometry as a function of time.

    ``base`` holds the axes for ``fixed-axes``, the initial moments for
    ``ramp-I3`` (``I3`` decreases at ``rate``) and ``(r1(0), r2)`` for
    ``ramp-r1`` (``r1`` increases at ``rate``, moments scaled to ``I1 = 1``).
    """

    mode: str
    base: tuple[float, ...]
    rate: float = 0.0
    r2_fixed: Optional[float] = None

    def __post_init__(self):
        if self.mode not in SCHEDULE_MODES:
            raise ScheduleError(f"unknown schedule mode {self.mode!r}")
        object.__setattr__(self, "base", tuple(float(v) for v in self.base))
        if self.mode == "ramp-r1":
            # (r1_0, r2) accepted as shorthand
            if len(self.base) == 2 and self.r2_fixed is None:
                object.__setattr__(self, "r2_fixed", self.base[1])
            if self.r2_fixed is None:
                raise ScheduleError("ramp-r1 needs r2_fixed")
            object.__setattr__(self, "base", (self.base[0],))
            object.__setattr__(self, "r2_fixed", float(self.r2_fixed))
        elif len(self.base) != 3:
            raise ScheduleError(f"{self.mode} needs three base values")

    @classmethod
    def fixed_axes(cls, a) -> "ParameterSchedule":
        geometry_from_axes(a)
        return cls("fixed-axes", tuple(a))

    @classmethod
    def fixed_moments(cls, I) -> "ParameterSchedule":
        return cls("fixed-axes", tuple(axes_from_moments(I)))

    @classmethod
    def fixed_ratios(cls, r1: float, r2: float) -> "ParameterSchedule":
        """Fixed geometry given by ``r1, r2`` (``I1 = 1``); evaluated exactly in r-form."""
        return cls("ramp-r1", (r1,), rate=0.0, r2_fixed=r2)

    @classmethod
    def ramp_I3(cls, I0, rate: float) -> "ParameterSchedule":
        return cls("ramp-I3", tuple(I0), rate=rate)

    @classmethod
    def ramp_r1(cls, r1_0: float, rate: float, r2: float) -> "ParameterSchedule":
        return cls("ramp-r1", (r1_0,), rate=rate, r2_fixed=r2)

    @property
    def is_constant(self) -> bool:
        return self.mode == "fixed-axes" or self.rate == 0.0

    def check_window(self, t0: float, t1: float) -> None:
        """Raise ScheduleError unless the schedule is valid over ``[t0, t1]``."""
        if self.is_constant:
            schedule_eval(self, t0)
            return
        for t in np.linspace(t0, t1, 201):
            schedule_eval(self, float(t))


def schedule_geometry(sched: ParameterSchedule, t: float) -> EllipsoidGeometry:
    """Geometry at time ``t``; ratios and moments are mutually exact."""
    if sched.mode == "fixed-axes":
        return geometry_from_axes(sched.base)
    if sched.mode == "ramp-I3":
        I = np.array(sched.base)
        I[2] -= sched.rate * t
        try:
            return geometry_from_moments(I)
        except GeometryError as exc:
            raise ScheduleError(f"ramp-I3 invalid at t={t}: {exc}") from None
    r1 = sched.base[0] + sched.rate * t
    if abs(r1) > 1.0:
        raise ScheduleError(f"ramp-r1 gives |r1| = {abs(r1):.6g} > 1 at t={t}")
    try:
        I, r = moments_from_r(r1, sched.r2_fixed, I1=1.0)
        a = axes_from_moments(I)
    except GeometryError as exc:
        raise ScheduleError(f"ramp-r1 invalid at t={t}: {exc}") from None
    return EllipsoidGeometry(a=a, I=I, r=r, sqrt_g=float(np.prod(a)))


def schedule_eval(sched: ParameterSchedule, t: float) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Return ``(r, I, a)`` at time ``t``."""
    g = schedule_geometry(sched, t)
    return g.r, g.I, g.a


def make_rhs(sched: ParameterSchedule, eta2: float = 0.0) -> Callable[[float, np.ndarray], np.ndarray]:
    """Vector right-hand side ``f(t, y)`` on the 6-vector ``(varpi, iota)``."""
    if eta2 > 0.0:
        warnings.warn(
            f"eta2 = {eta2} > 0: resistivity minimal at the origin, current energy grows",
            ResistiveGrowthWarning,
            stacklevel=2,
        )

    if sched.is_constant:
        g = schedule_geometry(sched, 0.0)
        r = tuple(g.r)
        damp = resistive_rates(g.a, eta2) if eta2 != 0.0 else None

        def f(t, y):
            dy = _ideal(y, r)
            if damp is not None:
                dy[3:] += damp * y[3:]
            return dy

        return f

    if sched.mode == "ramp-r1" and eta2 == 0.0:
        # r-form only: avoid rebuilding the full geometry every stage
        r1_0, rate, r2 = sched.base[0], sched.rate, sched.r2_fixed

        def f(t, y):
            r1 = r1_0 + rate * t
            return _ideal(y, (r1, r2, -(r1 + r2) / (1.0 + r1 * r2)))

        return f

    if sched.mode == "ramp-I3" and eta2 == 0.0:
        I1, I2, I3_0 = sched.base
        rate = sched.rate

        def f(t, y):
            I3 = I3_0 - rate * t
            return _ideal(y, ((I3 - I2) / I1, (I1 - I3) / I2, (I2 - I1) / I3))

        return f

    def f(t, y):
        g = schedule_geometry(sched, t)
        dy = _ideal(y, g.r)
        if eta2 != 0.0:
            dy[3:] += resistive_rates(g.a, eta2) * y[3:]
        return dy

    return f
