"""Exact solutions and homothetic-soliton diagnostics.

The catalog is the equality backbone of the whole suite: scalar ODE
solutions (round spheres, Minkowski hyperboloids, geodesic spheres in the
sphere and hyperbolic space, de Sitter time slices) packaged as ordinary
FlowTraces whose per-node geometry is exact to round-off because umbilic
states differentiate exactly on any grid.

Homothetic solitons in flat ambients are characterized by
f = C0 <x, nu>; the scale obeys lambda(t) = (1 - (p+1) C0 t)^(1/(p+1)) and
the Harnack quantity solves du/dt = ((p+1)/p) u^2.  The Minkowski
hyperboloid catalog entry pins its initial scale to the expanding-soliton
clock so the absolute trace time coincides with the soliton time and the
Harnack inequality is an exact equality along it.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .ambient import AmbientSpec
from .flow import FlowSpec, FlowTrace, TraceRecord, curvature_of, _speed
from .grids import CircleGrid, ProfileGrid, RadialHyperbolicGrid, SphereGrid
from .shape import CurvatureField, ProfileState, SupportState
from .symfun import CurvatureFunctionSpec, DomainError, SymFn, sym_eval

__all__ = [
    "SolitonSpec",
    "SolitonODEResult",
    "soliton_residual",
    "soliton_ode",
    "exact_trace",
    "CATALOG_NAMES",
]

CATALOG_NAMES = (
    "euclid_round",
    "mink_hyperboloid",
    "sphere_geodesic",
    "hyperbolic_geodesic",
    "desitter_umbilic",
)


@dataclass(frozen=True)
class SolitonSpec:
    ambient: AmbientSpec
    speed: CurvatureFunctionSpec
    C0: float
    x0: str = "round"

    def scale(self, t: np.ndarray) -> np.ndarray:
        """lambda(t) = (1 - (p+1) C0 t)^(1/(p+1)); real and positive on the
        run interval or a DomainError is raised."""
        p = self.speed.p
        base = 1.0 - (p + 1.0) * self.C0 * np.asarray(t, dtype=float)
        if np.any(base <= 0.0):
            raise DomainError("soliton scale leaves the positive branch on this interval")
        return base ** (1.0 / (p + 1.0))


@dataclass
class SolitonODEResult:
    t: np.ndarray
    u: np.ndarray  # closed form
    lam: np.ndarray  # closed form
    u_rk4: np.ndarray
    truncated: bool


def soliton_residual(curv: CurvatureField, spec: CurvatureFunctionSpec) -> tuple[float, float]:
    """Least-squares fit of C0 in f = C0 <x, nu> over the nodes of a flat
    ambient field; returns (C0, max relative residual)."""
    w = curv.dot(curv.x, curv.nu)
    if np.any(np.abs(w) < 1e-14):
        raise DomainError("degenerate <x, nu>: soliton fit undefined")
    s = curv.sigma * w  # support function
    f = spec.value(curv.kappa, s=s, theta=curv.theta)
    C0 = float(np.sum(f * w) / np.sum(w * w))
    residual = float(np.max(np.abs(f - C0 * w) / np.abs(f)))
    return C0, residual


def soliton_ode(p: float, C0: float, t_grid: np.ndarray, dt_max: float = 1e-4) -> SolitonODEResult:
    """Closed forms u(t) = p C0 lambda^-(p+1), lambda = (1-(p+1)C0 t)^(1/(p+1)),
    next to an RK4 integration of du/dt = ((p+1)/p) u^2, u(0) = p C0.

    Truncates with a flag where the scale hits its blow-up time.
    """
    if p in (0.0, -1.0):
        raise DomainError("soliton ODE needs p != 0, -1")
    t = np.asarray(t_grid, dtype=float)
    base = 1.0 - (p + 1.0) * C0 * t
    valid = base > 1e-12
    truncated = not bool(valid.all())
    t = t[valid]
    base = base[valid]
    lam = base ** (1.0 / (p + 1.0))
    u = p * C0 / base

    a = (p + 1.0) / p
    u_rk4 = np.empty_like(t)
    uc = p * C0
    prev = 0.0
    for i, ti in enumerate(t):
        span = ti - prev
        m = max(1, int(np.ceil(span / dt_max)))
        dt = span / m if m else 0.0
        for _ in range(m):
            k1 = a * uc * uc
            u2 = uc + 0.5 * dt * k1
            k2 = a * u2 * u2
            u3 = uc + 0.5 * dt * k2
            k3 = a * u3 * u3
            u4 = uc + dt * k3
            k4 = a * u4 * u4
            uc = uc + dt / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4)
        prev = ti
        u_rk4[i] = uc
    return SolitonODEResult(t=t, u=u, lam=lam, u_rk4=u_rk4, truncated=truncated)


# ---------------------------------------------------------------------------
# exact-trace catalog
# ---------------------------------------------------------------------------


def _sample_times(t0: float, t_end: float, samples: int, spacing: str) -> np.ndarray:
    if spacing == "log":
        return t0 * (t_end / t0) ** (np.arange(samples) / (samples - 1))
    return np.linspace(t0, t_end, samples)


def _rk4_scalar(rhs, y0: float, times: np.ndarray, substeps: int = 8) -> np.ndarray:
    """Dense classical RK4 along `times`; enough substeps per interval to sit
    at the 1e-10 tolerance for the catalog's smooth scalar fields."""
    out = np.full_like(times, np.nan)
    y = float(y0)
    out[0] = y
    for i in range(1, times.size):
        span = times[i] - times[i - 1]
        m = substeps
        dt = span / m
        t = times[i - 1]
        try:
            for _ in range(m):
                k1 = rhs(t, y)
                k2 = rhs(t + 0.5 * dt, y + 0.5 * dt * k1)
                k3 = rhs(t + 0.5 * dt, y + 0.5 * dt * k2)
                k4 = rhs(t + dt, y + dt * k3)
                y = y + dt / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4)
                t += dt
        except (DomainError, FloatingPointError, ValueError):
            break
        if not np.isfinite(y):
            break
        out[i] = y
    return out


def exact_trace(
    name: str,
    speed: CurvatureFunctionSpec,
    n: int = 2,
    t0: float = 0.01,
    t_end: float = 1.0,
    samples: int = 512,
    spacing: str = "log",
    grid_nodes: int = 16,
    initial: Optional[float] = None,
) -> FlowTrace:
    """Generate a catalog trace from its governing scalar ODE.

    initial: scale/radius at t0.  The Minkowski hyperboloid defaults to the
    expanding-soliton value ((1+p) f(1,..,1) t0)^(1/(1+p)) so the Harnack
    equality holds in absolute time; the others default to 1 (radius) or
    pi/4 (sphere geodesic radius).
    """
    if name not in CATALOG_NAMES:
        raise ValueError(f"unknown exact solution {name!r}; catalog: {CATALOG_NAMES}")
    times = _sample_times(t0, t_end, samples, spacing)
    p = speed.p
    if not (speed.phi.is_one and speed.psi.is_one):
        raise DomainError("catalog traces use phi = psi = 1")
    F1 = sym_eval(speed.base, np.ones(n))
    f1 = speed.sign * F1**p
    sgn = speed.sign

    def f_umb(kappa_scalar: float) -> float:
        # speed on an umbilic state, f = sgn(p) (F(1,..,1) kappa)^p
        if kappa_scalar <= 0.0:
            raise DomainError("umbilic curvature left the positive cone")
        return sgn * (F1 * kappa_scalar) ** p

    if name == "euclid_round":
        amb = AmbientSpec("euclidean", n)

        def rhs(t, s):
            return -f_umb(1.0 / s)

        s0 = 1.0 if initial is None else float(initial)
        values = _rk4_scalar(rhs, s0, times)
        grid = CircleGrid(grid_nodes) if n == 1 else SphereGrid(grid_nodes, 1)

        def make_state(v, t):
            arr = np.full(grid_nodes, v) if n == 1 else np.full((grid_nodes, 1), v)
            return SupportState(amb, grid, arr, t)

    elif name == "mink_hyperboloid":
        amb = AmbientSpec("minkowski", n)

        def rhs(t, s):
            return f_umb(1.0 / s)  # sdot = -sigma f = f

        if initial is None:
            base = (1.0 + p) * f1 * t0
            if base <= 0.0:
                raise DomainError(
                    "expanding hyperboloid soliton needs (1+p) f(1,..,1) > 0; "
                    "pass an explicit initial scale instead"
                )
            s0 = base ** (1.0 / (1.0 + p))
        else:
            s0 = float(initial)
        values = _rk4_scalar(rhs, s0, times)
        grid = RadialHyperbolicGrid(grid_nodes, 2.0)

        def make_state(v, t):
            return SupportState(amb, grid, np.full(grid_nodes, v), t)

    elif name == "sphere_geodesic":
        amb = AmbientSpec("sphere", n)

        def rhs(t, rho):
            return -f_umb(1.0 / np.tan(rho))

        rho0 = np.pi / 4 if initial is None else float(initial)
        values = _rk4_scalar(rhs, rho0, times)
        grid = ProfileGrid(grid_nodes)

        def make_state(v, t):
            return ProfileState(amb, grid, np.full(grid_nodes, v), t)

    elif name == "hyperbolic_geodesic":
        amb = AmbientSpec("hyperbolic", n)

        def rhs(t, rho):
            return -f_umb(1.0 / np.tanh(rho))

        rho0 = 1.0 if initial is None else float(initial)
        values = _rk4_scalar(rhs, rho0, times)
        grid = ProfileGrid(grid_nodes)

        def make_state(v, t):
            return ProfileState(amb, grid, np.full(grid_nodes, v), t)

    else:  # desitter_umbilic
        amb = AmbientSpec("desitter", n)

        def rhs(t, tau):
            return f_umb(np.tanh(tau))  # taudot = f

        tau0 = np.arcsinh(1.0) if initial is None else float(initial)
        values = _rk4_scalar(rhs, tau0, times)
        grid = ProfileGrid(grid_nodes)

        def make_state(v, t):
            return ProfileState(amb, grid, np.full(grid_nodes, v), t)

    fspec = FlowSpec(ambient=amb, speed=speed, t0=t0)
    trace = FlowTrace(spec=fspec, termination="completed")
    values = np.asarray(values, dtype=float)
    for t, v in zip(times, values):
        if not np.isfinite(v):
            trace.termination = "chart_exit"
            break
        try:
            state = make_state(v, t)
            curv = curvature_of(state)
            f = _speed(state, curv, speed)
        except Exception:
            trace.termination = "chart_exit"
            break
        trace.records.append(TraceRecord(float(t), state, curv, f))
    if len(trace.records) < 2:
        raise DomainError(f"exact trace {name!r} leaves its chart immediately")
    trace.check_monotone_times()
    return trace
