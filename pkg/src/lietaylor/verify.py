"""Self-check suites driven by ``lietaylor verify``."""
from __future__ import annotations

import time
from dataclasses import dataclass
from typing import Callable, Iterable, Optional

import numpy as np

from . import polyoracle
from .dk_dynamics import DKState
from .geometry import basis_set, geometry_from_axes, moments_from_r, verify_algebra
from .integrator import IntegrationSettings, integrate
from .stability import verify_reduction
from .taylor_hierarchy import (
    ScalarHierarchy,
    TaylorHierarchy,
    bracket_linear,
    diagnostics,
    hierarchy_rhs,
    mass_hierarchy_rhs,
)

__all__ = ["SuiteResult", "SUITES", "run_suites", "commutator_flow", "skew_flow"]

ORACLE_TOL = 1e-12
CONSERVATION_TOL = 1e-8
ALGEBRA_TOL = 1e-12
REDUCTION_TOL = 1e-12


@dataclass(frozen=True)
class SuiteResult:
    name: str
    passed: bool
    worst: float
    tolerance: float
    detail: str
    seconds: float

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        return (f"{status} {self.name:12s} worst {self.worst:.3e} "
                f"(tol {self.tolerance:.0e}) {self.detail} [{self.seconds:.2f} s]")


def _hierarchy(rng, n: int) -> tuple[float, str]:
    worst = 0.0
    for _ in range(n):
        u = TaylorHierarchy.random(rng)
        q = TaylorHierarchy.random(rng)
        worst = max(worst, polyoracle.max_difference(
            hierarchy_rhs(u, q), polyoracle.hierarchy_rhs_oracle(u, q)))
    return worst, f"{n} random pairs against the polynomial oracle"


def _mass(rng, n: int) -> tuple[float, str]:
    worst = 0.0
    for _ in range(n):
        u = TaylorHierarchy.random(rng)
        rho = ScalarHierarchy.random(rng)
        worst = max(worst, polyoracle.max_scalar_difference(
            mass_hierarchy_rhs(u, rho), polyoracle.mass_rhs_oracle(u, rho)))
    return worst, f"{n} random pairs against the divergence oracle"


def commutator_flow(U1: np.ndarray, Q1: np.ndarray, t_end: float = 10.0):
    """Integrate ``dQ/dt = [U, Q]`` with constant ``U``; returns the trajectory."""
    U1 = np.asarray(U1, dtype=float)

    def f(t, y):
        return bracket_linear(U1, y.reshape(3, 3)).ravel()

    return integrate(f, np.asarray(Q1, dtype=float).ravel(), (0.0, t_end),
                     IntegrationSettings(rtol=1e-12, atol=1e-14, sample_dt=0.5))


def skew_flow(U1: np.ndarray, q: TaylorHierarchy, t_end: float = 10.0):
    """Integrate the order 1 and 2 coefficients of ``q`` under a linear field ``U1``."""
    u = TaylorHierarchy(np.zeros(3), U1, np.zeros((3, 3, 3)), np.zeros((3, 3, 3, 3)))
    n = 3 + 9 + 27

    def f(t, y):
        h = TaylorHierarchy.from_flat(np.concatenate([y, np.zeros(81)]))
        return hierarchy_rhs(u, h).flat()[:n]

    return integrate(f, q.flat()[:n], (0.0, t_end),
                     IntegrationSettings(rtol=1e-12, atol=1e-14, sample_dt=0.5))


def _rel_spread(values: np.ndarray) -> float:
    values = np.asarray(values, dtype=float)
    ref = np.max(np.abs(values[0]))
    return float(np.max(np.abs(values - values[0])) / max(ref, 1e-300))


def _conservation(rng, n: int) -> tuple[float, str]:
    worst = 0.0
    for _ in range(n):
        # moderate U keeps exp(U t) Q exp(-U t) well scaled over the window
        U1 = rng.uniform(-0.2, 0.2, (3, 3))
        Q1 = rng.uniform(-1, 1, (3, 3))
        traj = commutator_flow(U1, Q1)
        norm = np.linalg.norm(Q1)
        for L in range(1, 5):
            tr = np.array([np.trace(np.linalg.matrix_power(y.reshape(3, 3), L))
                           for y in traj.states])
            worst = max(worst, float(np.max(np.abs(tr - tr[0]))) / max(abs(tr[0]), norm**L))

        A = rng.uniform(-1, 1, (3, 3))
        S = A - A.T
        q = TaylorHierarchy.random(rng, orders=(1, 2))
        traj = skew_flow(S, q)
        f1, f2 = [], []
        for y in traj.states:
            d = diagnostics(TaylorHierarchy.from_flat(np.concatenate([y, np.zeros(81)])))
            f1.append(d.frobenius1)
            f2.append(d.frobenius2)
        worst = max(worst, _rel_spread(f1), _rel_spread(f2))
    return worst, f"{n} flows, trace powers L=1..4 and Frobenius sums over t in [0, 10]"


def _algebra(rng, n: int) -> tuple[float, str]:
    worst = 0.0
    for _ in range(n):
        g = geometry_from_axes(rng.uniform(0.2, 5.0, 3))
        worst = max(worst, verify_algebra(basis_set(g)))
    return worst, f"{n} random positive axis triples"


def _reduction(rng, n: int) -> tuple[float, str]:
    worst = 0.0
    for _ in range(n):
        r1, r2 = rng.uniform(-0.9, 0.9, 2)
        _, r = moments_from_r(r1, r2)
        s = DKState(rng.uniform(-1, 1, 3), np.zeros(3))
        worst = max(worst, verify_reduction(None, r, s))
    return worst, f"{n} random Euler states"


_Suite = tuple[Callable[[np.random.Generator, int], tuple[float, str]], float, int]

SUITES: dict[str, _Suite] = {
    "hierarchy": (_hierarchy, ORACLE_TOL, 100),
    "mass": (_mass, ORACLE_TOL, 100),
    "conservation": (_conservation, CONSERVATION_TOL, 3),
    "algebra": (_algebra, ALGEBRA_TOL, 100),
    "reduction": (_reduction, REDUCTION_TOL, 100),
}


def run_suites(names: Optional[Iterable[str]] = None, seed: int = 12345) -> list[SuiteResult]:
    """Run the named suites (all when ``names`` is empty or ``None``)."""
    names = list(names) if names else list(SUITES)
    unknown = [n for n in names if n not in SUITES]
    if unknown:
        raise KeyError(f"unknown suite(s) {unknown}; choose from {sorted(SUITES)}")
    results = []
    for name in names:
        fn, tol, n = SUITES[name]
        rng = np.random.default_rng(seed)
        t0 = time.perf_counter()
        worst, detail = fn(rng, n)
        results.append(SuiteResult(name, bool(worst <= tol), worst, tol, detail,
                                   time.perf_counter() - t0))
    return results
