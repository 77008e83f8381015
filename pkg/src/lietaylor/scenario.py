"""Scenario configuration, preset experiments, runs and delimited output."""
from __future__ import annotations

import configparser
import csv
import io
import math
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Optional

import numpy as np

from .dk_dynamics import (
    DKState,
    InvariantSet,
    ParameterSchedule,
    ScheduleError,
    invariants,
    make_rhs,
    schedule_geometry,
)
from .geometry import GeometryError
from .integrator import (
    COMPONENTS,
    IntegrationSettings,
    Trajectory,
    first_zero_crossing,
    integrate,
)
from .stability import AlignedStabilityReport, aligned_spectrum

__all__ = [
    "ConfigError",
    "ScenarioConfig",
    "RunReport",
    "PRESETS",
    "CSV_COLUMNS",
    "load_config",
    "parse_config",
    "preset",
    "simulate",
    "run",
    "write_csv",
    "read_csv",
    "write_plot_data",
    "drift_summary",
    "clebsch_residuals",
    "PotentialTable",
    "potential_report",
]

CSV_COLUMNS = (
    "t", "w1", "w2", "w3", "i1", "i2", "i3",
    "H0", "H1", "C0", "C1", "C2", "C3", "r1", "r2", "r3",
)
INVARIANT_NAMES = ("H0", "H1", "C0", "C1", "C2", "C3")

METHOD_ALIASES = {
    "dp54": "dp54",
    "adaptive": "dp54",
    "adaptive-embedded-rk": "dp54",
    "rk4": "rk4",
    "fixed-rk4": "rk4",
}

_SECTIONS = {
    "geometry": {"a1", "a2", "a3", "I1", "I2", "I3", "r1", "r2"},
    "schedule": {"mode", "base", "rate"},
    "initial": {"w1", "w2", "w3", "i1", "i2", "i3"},
    "resistivity": {"eta2"},
    "integration": {"t_end", "rtol", "atol", "sample_dt", "method", "max_step"},
}
_GEOMETRY_FORMS = {
    "axes": ("a1", "a2", "a3"),
    "moments": ("I1", "I2", "I3"),
    "ratios": ("r1", "r2"),
}


class ConfigError(ValueError):
    """Invalid scenario configuration; the message names the offending field."""


@dataclass(frozen=True)
class ScenarioConfig:
    geometry_form: str  # "axes", "moments" or "ratios"
    geometry: tuple[float, ...]
    initial: tuple[float, float, float, float, float, float]
    mode: str = "fixed-axes"
    rate: float = 0.0
    base: Optional[float] = None
    eta2: float = 0.0
    t_end: float = 100.0
    rtol: float = 1e-10
    atol: float = 1e-12
    sample_dt: float = 0.1
    method: str = "dp54"
    max_step: float = math.inf
    name: str = "scenario"

    def __post_init__(self):
        if self.geometry_form not in _GEOMETRY_FORMS:
            raise ConfigError(f"geometry: unknown form {self.geometry_form!r}")
        if len(self.geometry) != len(_GEOMETRY_FORMS[self.geometry_form]):
            raise ConfigError(f"geometry: {self.geometry_form} needs "
                              f"{len(_GEOMETRY_FORMS[self.geometry_form])} values")
        if len(self.initial) != 6:
            raise ConfigError("initial: six values w1..w3, i1..i3 required")
        if self.method not in METHOD_ALIASES:
            raise ConfigError(f"integration.method: unknown method {self.method!r}")
        object.__setattr__(self, "method", METHOD_ALIASES[self.method])
        if not self.t_end > 0:
            raise ConfigError("integration.t_end must be positive")
        for key in ("rtol", "atol", "sample_dt", "max_step"):
            if not getattr(self, key) > 0:
                raise ConfigError(f"integration.{key} must be positive")
        allowed = {
            "fixed-axes": ("axes", "moments", "ratios"),
            "ramp-I3": ("axes", "moments"),
            "ramp-r1": ("ratios",),
        }
        if self.mode not in allowed:
            raise ConfigError(f"schedule.mode: unknown mode {self.mode!r}")
        if self.geometry_form not in allowed[self.mode]:
            raise ConfigError(
                f"schedule.mode: {self.mode} is incompatible with a {self.geometry_form} geometry"
            )

    def schedule(self) -> ParameterSchedule:
        try:
            if self.geometry_form == "ratios":
                r1, r2 = self.geometry
                r1 = self.base if self.base is not None else r1
                rate = self.rate if self.mode == "ramp-r1" else 0.0
                return ParameterSchedule.ramp_r1(r1, rate, r2)
            if self.geometry_form == "axes":
                sched = ParameterSchedule.fixed_axes(self.geometry)
                if self.mode == "fixed-axes":
                    return sched
                I0 = schedule_geometry(sched, 0.0).I
            else:
                I0 = np.array(self.geometry)
                if self.mode == "fixed-axes":
                    return ParameterSchedule.fixed_moments(I0)
            I0 = np.array(I0, dtype=float)
            if self.base is not None:
                I0[2] = self.base
            return ParameterSchedule.ramp_I3(I0, self.rate)
        except (GeometryError, ScheduleError) as exc:
            raise ConfigError(f"geometry: {exc}") from None

    def settings(self) -> IntegrationSettings:
        return IntegrationSettings(
            rtol=self.rtol, atol=self.atol, sample_dt=self.sample_dt,
            max_step=self.max_step, method=self.method,
        )

    def initial_state(self) -> DKState:
        return DKState.from_vector(self.initial)

    def to_ini(self) -> str:
        cp = configparser.ConfigParser()
        cp.optionxform = str
        cp["geometry"] = {
            k: repr(v) for k, v in zip(_GEOMETRY_FORMS[self.geometry_form], self.geometry)
        }
        sched = {"mode": self.mode, "rate": repr(self.rate)}
        if self.base is not None:
            sched["base"] = repr(self.base)
        cp["schedule"] = sched
        cp["initial"] = {k: repr(v) for k, v in zip(COMPONENTS, self.initial)}
        cp["resistivity"] = {"eta2": repr(self.eta2)}
        integ = {
            "t_end": repr(self.t_end), "rtol": repr(self.rtol), "atol": repr(self.atol),
            "sample_dt": repr(self.sample_dt), "method": self.method,
        }
        if math.isfinite(self.max_step):
            integ["max_step"] = repr(self.max_step)
        cp["integration"] = integ
        buf = io.StringIO()
        cp.write(buf)
        return buf.getvalue()


def _float(section: str, key: str, text: str) -> float:
    try:
        return float(text)
    except ValueError:
        raise ConfigError(f"{section}.{key}: not a number: {text!r}") from None


def parse_config(text: str, name: str = "scenario") -> ScenarioConfig:
    """Parse the sectioned key-value format; unknown sections or keys are errors."""
    cp = configparser.ConfigParser()
    cp.optionxform = str
    try:
        cp.read_string(text)
    except configparser.Error as exc:
        raise ConfigError(f"syntax: {exc}") from None

    for section in cp.sections():
        if section not in _SECTIONS:
            raise ConfigError(f"unknown section [{section}]")
        for key in cp[section]:
            if key not in _SECTIONS[section]:
                raise ConfigError(f"{section}.{key}: unknown key")

    if "geometry" not in cp:
        raise ConfigError("geometry: section missing")
    geo = cp["geometry"]
    forms = [f for f, keys in _GEOMETRY_FORMS.items() if any(k in geo for k in keys)]
    if len(forms) != 1:
        raise ConfigError(
            "geometry: give exactly one of axes (a1..a3), moments (I1..I3) or ratios (r1, r2)"
        )
    form = forms[0]
    values = []
    for key in _GEOMETRY_FORMS[form]:
        if key not in geo:
            raise ConfigError(f"geometry.{key}: missing")
        values.append(_float("geometry", key, geo[key]))

    kwargs: dict = {"geometry_form": form, "geometry": tuple(values), "name": name}

    if "initial" not in cp:
        raise ConfigError("initial: section missing")
    init = cp["initial"]
    kwargs["initial"] = tuple(_float("initial", k, init.get(k, "0")) for k in COMPONENTS)

    if "schedule" in cp:
        s = cp["schedule"]
        kwargs["mode"] = s.get("mode", "fixed-axes").strip()
        if "rate" in s:
            kwargs["rate"] = _float("schedule", "rate", s["rate"])
        if "base" in s:
            kwargs["base"] = _float("schedule", "base", s["base"])
    if "resistivity" in cp and "eta2" in cp["resistivity"]:
        kwargs["eta2"] = _float("resistivity", "eta2", cp["resistivity"]["eta2"])
    if "integration" in cp:
        integ = cp["integration"]
        for key in ("t_end", "rtol", "atol", "sample_dt", "max_step"):
            if key in integ:
                kwargs[key] = _float("integration", key, integ[key])
        if "method" in integ:
            kwargs["method"] = integ["method"].strip()
    return ScenarioConfig(**kwargs)


def load_config(path) -> ScenarioConfig:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc}") from None
    return parse_config(text, name=path.stem)


PRESETS: dict[str, ScenarioConfig] = {
    # Euler top, I3 ramped down through I1 = 2.25 at t = 500
    "euler-flopl": ScenarioConfig(
        name="euler-flopl",
        geometry_form="moments",
        geometry=(2.25, 1.25, 2.5),
        mode="ramp-I3",
        rate=0.0005,
        initial=(0.01, 0.01, 1.0, 0.0, 0.0, 0.0),
        t_end=1000.0,
    ),
    "dk-dz3ln": ScenarioConfig(
        name="dk-dz3ln",
        geometry_form="ratios",
        geometry=(-0.5, 0.25),
        mode="ramp-r1",
        rate=0.001,
        initial=(0.01, 0.01, 0.1, 0.01, 0.01, 1.0),
        t_end=700.0,
    ),
    "dk-dz5ln": ScenarioConfig(
        name="dk-dz5ln",
        geometry_form="ratios",
        geometry=(-0.005, 0.25),
        mode="ramp-r1",
        rate=0.00001,
        initial=(0.01, 0.01, 0.1, 0.01, 0.01, 1.0),
        t_end=800.0,
    ),
}


def preset(name: str, **overrides) -> ScenarioConfig:
    try:
        cfg = PRESETS[name]
    except KeyError:
        raise ConfigError(f"unknown preset {name!r}; choose from {sorted(PRESETS)}") from None
    overrides = {k: v for k, v in overrides.items() if v is not None}
    return replace(cfg, **overrides) if overrides else cfg


def simulate(cfg: ScenarioConfig) -> Trajectory:
    """Integrate a scenario and attach invariants and parameters at every sample."""
    sched = cfg.schedule()
    try:
        sched.check_window(0.0, cfg.t_end)
    except ScheduleError as exc:
        raise ConfigError(f"schedule: {exc}") from None
    f = make_rhs(sched, cfg.eta2)
    traj = integrate(f, cfg.initial, (0.0, cfg.t_end), cfg.settings())
    for t, y in zip(traj.times, traj.states):
        g = schedule_geometry(sched, float(t))
        traj.invariants.append(invariants(DKState.from_vector(y), g))
        traj.params.append((g.r.copy(), g.I.copy()))
    return traj


def parameter_zero_time(cfg: ScenarioConfig) -> Optional[float]:
    """Time at which the ramped shape ratio passes through zero, if it does."""
    sched = cfg.schedule()
    if sched.is_constant:
        return None
    if sched.mode == "ramp-r1":
        t = -sched.base[0] / sched.rate
    else:
        I1, _, I3 = sched.base
        t = (I3 - I1) / sched.rate
    return t if 0.0 <= t <= cfg.t_end else None


def _invariant_matrix(invs: list[InvariantSet]) -> np.ndarray:
    rows = [[np.nan if v is None else v for v in inv.as_row()] for inv in invs]
    return np.array(rows, dtype=float)


def drift_summary(traj: Trajectory) -> dict[str, float]:
    """Max relative drift of each invariant from its first sample.

    Absolute drift is reported for invariants that start at zero.
    """
    m = _invariant_matrix(traj.invariants)
    out = {}
    for k, name in enumerate(INVARIANT_NAMES):
        col = m[:, k]
        if np.any(np.isnan(col)):
            continue
        ref = abs(col[0])
        dev = float(np.max(np.abs(col - col[0])))
        out[name] = dev / ref if ref > 0 else dev
    return out


def clebsch_residuals(traj: Trajectory) -> tuple[float, float]:
    """Largest relative residuals of ``H0 = sum I_i C_i`` and ``C0 = sum C_i`` over samples."""
    worst_h = worst_c = 0.0
    for inv, (_, I) in zip(traj.invariants, traj.params):
        if inv.C is None:
            continue
        terms = np.asarray(I) * np.asarray(inv.C)
        scale = max(abs(inv.H0), float(np.max(np.abs(terms))))
        worst_h = max(worst_h, abs(inv.H0 - float(np.sum(terms))) / scale)
        cs = np.asarray(inv.C)
        scale = max(abs(inv.C0), float(np.max(np.abs(cs))))
        if scale > 0:
            worst_c = max(worst_c, abs(inv.C0 - float(np.sum(cs))) / scale)
    return worst_h, worst_c


@dataclass
class RunReport:
    scenario: str
    csv_path: Optional[Path]
    drift: dict[str, float]
    events: list[tuple[str, float]]
    stability_start: AlignedStabilityReport
    stability_end: AlignedStabilityReport
    parameter_zero: Optional[float] = None
    clebsch: tuple[float, float] = (0.0, 0.0)
    figures: list[Path] = field(default_factory=list)
    plot_data: list[Path] = field(default_factory=list)

    def event_time(self, label: str) -> Optional[float]:
        for name, t in self.events:
            if name == label:
                return t
        return None

    def text(self) -> str:
        lines = [f"scenario: {self.scenario}"]
        if self.csv_path is not None:
            lines.append(f"trajectory: {self.csv_path}")
        if self.drift:
            lines.append("invariant drift (max relative, fixed parameters):")
            for k, v in self.drift.items():
                lines.append(f"  {k:3s} {v:.3e}")
        else:
            lines.append("invariant drift: not computed (parameters vary over the run)")
        lines.append(
            f"clebsch identity residuals: H0 {self.clebsch[0]:.2e}, C0 {self.clebsch[1]:.2e}"
        )
        if self.parameter_zero is not None:
            lines.append(f"ramped ratio crosses zero at t = {self.parameter_zero:.6g}")
        lines.append("events:")
        for name, t in self.events:
            lines.append(f"  {name:28s} t = {t:.6f}")
        for label, st in (("start", self.stability_start), ("end", self.stability_end)):
            lines.append(
                f"aligned stability at {label}: {st.classification} "
                f"(W={st.W:.4g}, J={st.J:.4g}, r1={st.r1:.4g}, r2={st.r2:.4g}, "
                f"x={_fmt_complex(st.x_roots[0])}, {_fmt_complex(st.x_roots[1])})"
            )
        for p in self.figures:
            lines.append(f"figure: {p}")
        return "\n".join(lines)


def _fmt_complex(z: complex) -> str:
    if abs(z.imag) < 1e-15:
        return f"{z.real:.6g}"
    return f"{z.real:.6g}{z.imag:+.6g}i"


def _events(cfg: ScenarioConfig, traj: Trajectory, t_zero: Optional[float]) -> list[tuple[str, float]]:
    events = []
    for comp in COMPONENTS:
        t = first_zero_crossing(traj, comp, after=traj.times[0])
        if t is not None:
            events.append((f"{comp} first sign change", t))
    if t_zero is not None:
        for comp in ("w3", "i3"):
            t = first_zero_crossing(traj, comp, after=t_zero)
            if t is not None:
                events.append((f"{comp} reversal after ratio zero", t))
    return events


def _stability_at(traj: Trajectory, k: int, compat: bool) -> AlignedStabilityReport:
    y = traj.states[k]
    r = traj.params[k][0]
    return aligned_spectrum(float(y[2]), float(y[5]), float(r[0]), float(r[1]), compat=compat)


def run(
    cfg: ScenarioConfig,
    out: Optional[Path] = None,
    plot_data: bool = False,
    figures: bool = False,
    compat_stabpoly: bool = False,
) -> tuple[RunReport, Trajectory]:
    """Integrate ``cfg``, write the CSV (when ``out`` is given) and build the report."""
    traj = simulate(cfg)
    t_zero = parameter_zero_time(cfg)
    report = RunReport(
        scenario=cfg.name,
        csv_path=None,
        drift=drift_summary(traj) if cfg.schedule().is_constant else {},
        events=_events(cfg, traj, t_zero),
        stability_start=_stability_at(traj, 0, compat_stabpoly),
        stability_end=_stability_at(traj, -1, compat_stabpoly),
        parameter_zero=t_zero,
        clebsch=clebsch_residuals(traj),
    )
    if out is not None:
        out = Path(out)
        out.parent.mkdir(parents=True, exist_ok=True)
        write_csv(out, traj)
        report.csv_path = out
        if plot_data:
            report.plot_data = write_plot_data(out, traj)
        if figures:
            from .plotting import render_run

            report.figures = render_run(out, traj, report)
    return report, traj


def _rows(traj: Trajectory):
    for t, y, inv, (r, _) in zip(traj.times, traj.states, traj.invariants, traj.params):
        yield [t, *y, *inv.as_row(), *r]


def _fmt(v) -> str:
    return "" if v is None else format(float(v), ".17g")


def write_csv(path, traj: Trajectory) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(CSV_COLUMNS)
        for row in _rows(traj):
            w.writerow([_fmt(v) for v in row])


def read_csv(path) -> dict[str, np.ndarray]:
    """Columns of a trajectory CSV; empty fields become NaN."""
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        if tuple(header) != CSV_COLUMNS:
            raise ValueError(f"unexpected header {header}")
        rows = [[float(v) if v != "" else np.nan for v in row] for row in reader]
    data = np.array(rows, dtype=float).reshape(-1, len(CSV_COLUMNS))
    return {name: data[:, k] for k, name in enumerate(CSV_COLUMNS)}


def write_plot_data(csv_path, traj: Trajectory) -> list[Path]:
    """One two-column ``t value`` file per variable, next to the CSV."""
    csv_path = Path(csv_path)
    rows = list(_rows(traj))
    paths = []
    for k, name in enumerate(CSV_COLUMNS[1:], start=1):
        p = csv_path.with_name(f"{csv_path.stem}_{name}.dat")
        with open(p, "w") as fh:
            fh.write(f"# t {name}\n")
            for row in rows:
                if row[k] is not None:
                    fh.write(f"{_fmt(row[0])} {_fmt(row[k])}\n")
        paths.append(p)
    return paths


TABLE_TOL = 0.02
TABLE_FLAG_TOL = 0.005


@dataclass
class PotentialTable:
    t: float
    C: tuple[float, float, float]
    r: tuple[float, float, float]
    coefficients: tuple[tuple[float, float], ...]
    shapes: tuple[str, str, str]
    shapes_after: tuple[str, str, str]
    sign_change_flags: tuple[tuple[bool, bool], ...]
    # (axis, term, computed, published) where they differ by more than TABLE_FLAG_TOL
    discrepancies: list[tuple[int, str, float, float]] = field(default_factory=list)

    def text(self) -> str:
        lines = [
            f"effective potentials at t = {self.t:g}",
            f"r = ({self.r[0]:.6g}, {self.r[1]:.6g}, {self.r[2]:.6g})",
            f"C = ({self.C[0]:.6g}, {self.C[1]:.6g}, {self.C[2]:.6g})",
            "axis  quadratic   quartic  shape  after r2 sign change",
        ]
        for k, ((a, b), s, s2, (fa, fb)) in enumerate(
            zip(self.coefficients, self.shapes, self.shapes_after, self.sign_change_flags), start=1
        ):
            da = "" if fa else "*"
            db = "" if fb else "*"
            lines.append(f"2V{k}  {a:+9.4f}{da:1s} {b:+9.4f}{db:1s}  {s:5s}  {s2}")
        lines.append("* coefficient keeps its sign when r2 changes sign")
        for axis, term, got, pub in self.discrepancies:
            lines.append(
                f"note: 2V{axis + 1} {term} coefficient {got:+.4f} differs from the "
                f"published {pub:+.2f}"
            )
        return "\n".join(lines)


def potential_report(cfg: ScenarioConfig, t: float = 0.0) -> PotentialTable:
    """Coefficient table of the effective potentials at time ``t``.

    Needs ``iota = 0`` at ``t``. Coefficients are compared with the published
    table whenever ``t = 0`` and the scenario is the ``euler-flopl`` preset.
    """
    from .stability import PUBLISHED_POTENTIALS, classify_shape, potential_coefficients

    if t > 0.0:
        traj = simulate(replace(cfg, t_end=t))
        y = traj.states[-1]
    else:
        y = np.asarray(cfg.initial, dtype=float)
    if np.any(y[3:] != 0.0):
        raise ConfigError("potential: iota must vanish (Euler sub-dynamics)")
    g = schedule_geometry(cfg.schedule(), t)
    inv = invariants(DKState.from_vector(y), g)
    if inv.C is None:
        raise ConfigError("potential: a shape ratio vanishes, C_i undefined")
    rep = potential_coefficients(inv.C, g.r)
    after = tuple(
        classify_shape(-(a if not fa else -a), -(b if not fb else -b))
        for (a, b), (fa, fb) in zip(rep.coefficients, rep.sign_change_flags)
    )
    table = PotentialTable(
        t=t, C=inv.C, r=tuple(float(v) for v in g.r), coefficients=rep.coefficients,
        shapes=rep.shapes, shapes_after=after, sign_change_flags=rep.sign_change_flags,
    )
    if t == 0.0 and cfg == PRESETS["euler-flopl"]:
        for axis, (got, pub) in enumerate(zip(rep.coefficients, PUBLISHED_POTENTIALS["coefficients"])):
            for term, g_, p_ in (("quadratic", got[0], pub[0]), ("quartic", got[1], pub[1])):
                if abs(g_ - p_) > TABLE_FLAG_TOL:
                    table.discrepancies.append((axis, term, g_, p_))
    return table
