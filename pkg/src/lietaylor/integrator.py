"""Explicit ODE integration with dense output and zero-crossing location.

Two methods are provided: an adaptive Dormand-Prince 5(4) pair with a PI
step-size controller, and classical RK4 with constant steps equal to the
output interval (bitwise reproducible, used for regression runs).
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence, Union

import numpy as np

__all__ = [
    "IntegrationSettings",
    "Trajectory",
    "DenseOutput",
    "IntegrationError",
    "StepSizeUnderflow",
    "DivergenceError",
    "integrate",
    "first_zero_crossing",
    "COMPONENTS",
]

COMPONENTS = ("w1", "w2", "w3", "i1", "i2", "i3")

# Dormand-Prince 5(4) tableau
_C = np.array([0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0, 1.0])
_A = [
    np.array([]),
    np.array([1 / 5]),
    np.array([3 / 40, 9 / 40]),
    np.array([44 / 45, -56 / 15, 32 / 9]),
    np.array([19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729]),
    np.array([9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656]),
    np.array([35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84]),
]
_B = np.array([35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84, 0.0])
# difference between 5th and embedded 4th order weights
_E = np.array(
    [71 / 57600, 0.0, -71 / 16695, 71 / 1920, -17253 / 339200, 22 / 525, -1 / 40]
)
# continuous extension: y(t0 + th*h) = y0 + h * K^T P [th, th^2, th^3, th^4]
_P = np.array(
    [
        [1.0, -8048581381 / 2820520608, 8663915743 / 2820520608, -12715105075 / 11282082432],
        [0.0, 0.0, 0.0, 0.0],
        [0.0, 131558114200 / 32700410799, -68118460800 / 10900136933, 87487479700 / 32700410799],
        [0.0, -1754552775 / 470086768, 14199869525 / 1410260304, -10690763975 / 1880347072],
        [0.0, 127303824393 / 49829197408, -318862633887 / 49829197408, 701980252875 / 199316789632],
        [0.0, -282668133 / 205662961, 2019193451 / 616988883, -1453857185 / 822651844],
        [0.0, 40617522 / 29380423, -110615467 / 29380423, 69997945 / 29380423],
    ]
)

_SAFETY = 0.9
_FAC_MIN = 0.2
_FAC_MAX = 10.0
_BETA = 0.04  # PI controller: proportional exponent on the previous error
_ALPHA = 0.2 - 0.75 * _BETA


class IntegrationError(RuntimeError):
    """Integration failure at time ``t``."""

    def __init__(self, message: str, t: float):
        super().__init__(f"{message} (t = {t:.10g})")
        self.t = t


class StepSizeUnderflow(IntegrationError):
    pass


class DivergenceError(IntegrationError):
    pass


@dataclass(frozen=True)
class IntegrationSettings:
    rtol: float = 1e-10
    atol: float = 1e-12
    sample_dt: float = 0.1
    max_step: float = math.inf
    method: str = "dp54"

    def __post_init__(self):
        if not (self.rtol > 0 and self.atol > 0):
            raise ValueError("rtol and atol must be positive")
        if not self.sample_dt > 0:
            raise ValueError("sample_dt must be positive")
        if not self.max_step > 0:
            raise ValueError("max_step must be positive")
        if self.method not in ("dp54", "rk4"):
            raise ValueError(f"unknown method {self.method!r}; use 'dp54' or 'rk4'")


class DenseOutput:
    """Piecewise polynomial solution assembled from accepted steps."""

    def __init__(self, t0s, hs, y0s, coefs, kind: str):
        self.t0s = np.asarray(t0s)
        self.hs = np.asarray(hs)
        self.y0s = np.asarray(y0s)
        self.coefs = np.asarray(coefs)
        self.kind = kind
        self.t_min = float(self.t0s[0])
        self.t_max = float(self.t0s[-1] + self.hs[-1])

    def __call__(self, t: float) -> np.ndarray:
        n = int(np.searchsorted(self.t0s, t, side="right")) - 1
        n = min(max(n, 0), len(self.t0s) - 1)
        h = self.hs[n]
        th = (t - self.t0s[n]) / h
        if self.kind == "dp54":
            return self.y0s[n] + h * (self.coefs[n] @ np.array([th, th**2, th**3, th**4]))
        # cubic Hermite from endpoint values and slopes
        y0, y1, f0, f1 = self.coefs[n]
        h00 = 2 * th**3 - 3 * th**2 + 1
        h10 = th**3 - 2 * th**2 + th
        h01 = -2 * th**3 + 3 * th**2
        h11 = th**3 - th**2
        return h00 * y0 + h10 * h * f0 + h01 * y1 + h11 * h * f1


@dataclass
class Trajectory:
    """Samples of one run. ``invariants`` and ``params`` may be left empty."""

    times: np.ndarray
    states: np.ndarray
    invariants: list = field(default_factory=list)
    params: list = field(default_factory=list)
    dense: Optional[DenseOutput] = None
    n_steps: int = 0
    n_rejected: int = 0

    def __len__(self) -> int:
        return len(self.times)

    def component(self, sel) -> np.ndarray:
        return _select(self.states, sel)


def _error_norm(err, y, y_new, rtol, atol) -> float:
    scale = atol + rtol * np.maximum(np.abs(y), np.abs(y_new))
    return math.sqrt(float(np.mean((err / scale) ** 2)))


def _initial_step(f, t0, y0, f0, rtol, atol, span) -> float:
    scale = atol + rtol * np.abs(y0)
    d0 = math.sqrt(float(np.mean((y0 / scale) ** 2)))
    d1 = math.sqrt(float(np.mean((f0 / scale) ** 2)))
    h0 = 1e-6 if d0 < 1e-5 or d1 < 1e-5 else 0.01 * d0 / d1
    h0 = min(h0, span)
    y1 = y0 + h0 * f0
    f1 = f(t0 + h0, y1)
    d2 = math.sqrt(float(np.mean(((f1 - f0) / scale) ** 2))) / h0
    if max(d1, d2) <= 1e-15:
        h1 = max(1e-6, h0 * 1e-3)
    else:
        h1 = (0.01 / max(d1, d2)) ** 0.2
    return min(100 * h0, h1, span)


def _sample_grid(t0: float, t1: float, dt: float) -> np.ndarray:
    n = int(math.floor((t1 - t0) / dt + 1e-9))
    grid = t0 + dt * np.arange(n + 1)
    if t1 - grid[-1] > 1e-9 * dt:
        grid = np.append(grid, t1)
    else:
        grid[-1] = t1 if abs(grid[-1] - t1) < 1e-9 * dt else grid[-1]
    return grid


def _integrate_dp54(f, y0, t0, t1, s: IntegrationSettings):
    span = t1 - t0
    h_min = 1e-14 * span
    grid = _sample_grid(t0, t1, s.sample_dt)
    out = np.empty((len(grid), len(y0)))
    out[0] = y0
    gi = 1

    t = t0
    y = y0.copy()
    K = np.empty((7, len(y0)))
    K[0] = f(t, y)
    if not np.all(np.isfinite(K[0])):
        raise DivergenceError("non-finite derivative", t)
    h = min(_initial_step(f, t, y, K[0], s.rtol, s.atol, span), s.max_step)
    err_old = 1e-4
    t0s, hs, y0s, coefs = [], [], [], []
    n_acc = n_rej = 0
    rejected_last = False

    while t < t1:
        if t + h >= t1 or t + 1.01 * h >= t1:
            h = t1 - t
        if not h >= h_min:
            raise StepSizeUnderflow("step size underflow, possible blow-up or stiffness", t)
        for i in range(1, 7):
            K[i] = f(t + _C[i] * h, y + h * (_A[i] @ K[:i]))
        y_new = y + h * (_B[:6] @ K[:6])
        # stage 7 is evaluated at y_new (FSAL)
        err = _error_norm(h * (_E @ K), y, y_new, s.rtol, s.atol)

        if not np.all(np.isfinite(y_new)) or not math.isfinite(err):
            h *= _FAC_MIN
            n_rej += 1
            if not h >= h_min:
                raise DivergenceError("non-finite state", t)
            continue

        if err <= 1.0:
            fac = err**_ALPHA / err_old**_BETA if err > 0 else 0.0
            fac = max(1.0 / _FAC_MAX, min(1.0 / _FAC_MIN, fac / _SAFETY))
            h_next = h / fac
            if rejected_last:
                h_next = min(h_next, h)
            err_old = max(err, 1e-4)

            t_new = t1 if t + h >= t1 else t + h
            Q = K.T @ _P
            t0s.append(t)
            hs.append(h)
            y0s.append(y.copy())
            coefs.append(Q)
            while gi < len(grid) and grid[gi] <= t_new:
                th = (grid[gi] - t) / h
                out[gi] = y + h * (Q @ np.array([th, th**2, th**3, th**4]))
                gi += 1
            t = t_new
            y = y_new
            K[0] = K[6]
            n_acc += 1
            rejected_last = False
            h = min(h_next, s.max_step)
        else:
            fac = max(1.0 / _FAC_MAX, min(1.0 / _FAC_MIN, err**_ALPHA / _SAFETY))
            h = h / fac
            n_rej += 1
            rejected_last = True

    if gi < len(grid):
        out[gi:] = y
    dense = DenseOutput(t0s, hs, y0s, coefs, "dp54")
    return grid, out, dense, n_acc, n_rej


def _integrate_rk4(f, y0, t0, t1, s: IntegrationSettings):
    grid = _sample_grid(t0, t1, s.sample_dt)
    out = np.empty((len(grid), len(y0)))
    out[0] = y0
    y = y0.copy()
    k1 = f(grid[0], y)
    t0s, hs, y0s, coefs = [], [], [], []
    for n in range(len(grid) - 1):
        t = grid[n]
        h = grid[n + 1] - t
        k2 = f(t + h / 2, y + h / 2 * k1)
        k3 = f(t + h / 2, y + h / 2 * k2)
        k4 = f(t + h, y + h * k3)
        y_new = y + h / 6 * (k1 + 2 * k2 + 2 * k3 + k4)
        if not np.all(np.isfinite(y_new)):
            raise DivergenceError("non-finite state", t)
        f_new = f(t + h, y_new)
        t0s.append(t)
        hs.append(h)
        y0s.append(y)
        coefs.append(np.stack([y, y_new, k1, f_new]))
        out[n + 1] = y_new
        y, k1 = y_new, f_new
    dense = DenseOutput(t0s, hs, y0s, coefs, "rk4") if t0s else None
    return grid, out, dense, len(grid) - 1, 0


def integrate(
    rhs: Callable[[float, np.ndarray], np.ndarray],
    y0: Sequence[float],
    t_span: tuple[float, float],
    settings: IntegrationSettings = IntegrationSettings(),
) -> Trajectory:
    """Integrate ``y' = rhs(t, y)`` over ``t_span``, sampling every ``settings.sample_dt``.

    Raises
    ------
    StepSizeUnderflow
        The adaptive step fell below ``1e-14`` times the span.
    DivergenceError
        The state became non-finite.
    """
    t0, t1 = (float(v) for v in t_span)
    if not t1 > t0:
        raise ValueError(f"t_span must be increasing, got {t_span}")
    y0 = np.array(y0, dtype=float)
    if not np.all(np.isfinite(y0)):
        raise DivergenceError("non-finite initial state", t0)
    # overflow is detected and reported as DivergenceError, not as a float warning
    with np.errstate(over="ignore", invalid="ignore"):
        if settings.method == "rk4":
            grid, out, dense, n_acc, n_rej = _integrate_rk4(rhs, y0, t0, t1, settings)
        else:
            grid, out, dense, n_acc, n_rej = _integrate_dp54(rhs, y0, t0, t1, settings)
    return Trajectory(times=grid, states=out, dense=dense, n_steps=n_acc, n_rejected=n_rej)


Selector = Union[int, str, Callable[[np.ndarray], float]]


def _select(states: np.ndarray, sel: Selector) -> np.ndarray:
    if callable(sel):
        return np.array([sel(y) for y in states])
    if isinstance(sel, str):
        sel = COMPONENTS.index(sel)
    return np.asarray(states)[:, sel]


def _select_one(y: np.ndarray, sel: Selector) -> float:
    if callable(sel):
        return float(sel(y))
    if isinstance(sel, str):
        sel = COMPONENTS.index(sel)
    return float(y[sel])


def first_zero_crossing(
    traj: Trajectory, sel: Selector, after: float = -math.inf, tol: float = 1e-6
) -> Optional[float]:
    """Earliest time later than ``after`` at which the selected component changes sign.

    The bracketing sample interval is found first; the root is then refined by
    bisection on the dense output to ``tol``. Without dense output the linear
    interpolate between samples is returned. ``None`` if there is no crossing.
    """
    t = traj.times
    v = traj.component(sel)
    start = int(np.searchsorted(t, after, side="right"))
    if start >= len(t):
        return None

    def value(tt: float) -> float:
        return _select_one(traj.dense(tt), sel)

    lo_t = None
    lo_v = None
    if start > 0:
        if traj.dense is not None and after > t[0]:
            lo_t, lo_v = float(after), value(float(after))
        else:
            lo_t, lo_v = float(t[start - 1]), float(v[start - 1])
            if lo_t <= after:
                lo_t = None
    for n in range(start, len(t)):
        hi_t, hi_v = float(t[n]), float(v[n])
        if hi_v == 0.0:
            return hi_t
        if lo_t is not None and lo_v * hi_v < 0.0:
            return _refine(lo_t, lo_v, hi_t, hi_v, value if traj.dense is not None else None, tol)
        lo_t, lo_v = hi_t, hi_v
    return None


def _refine(a, fa, b, fb, value, tol) -> float:
    guess = a - fa * (b - a) / (fb - fa)
    if value is None:
        return guess
    fg = value(guess)
    if fg == 0.0:
        return guess
    # shrink the bracket with the linear estimate before bisecting
    if fa * fg < 0:
        b, fb = guess, fg
    else:
        a, fa = guess, fg
    while b - a > tol:
        m = 0.5 * (a + b)
        fm = value(m)
        if fm == 0.0:
            return m
        if fa * fm < 0:
            b, fb = m, fm
        else:
            a, fa = m, fm
    return 0.5 * (a + b)
