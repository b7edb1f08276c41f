"""Polar/Gauss-map duality for strictly convex hypersurfaces in the quadric
models: sphere <-> sphere and hyperbolic <-> de Sitter.

The dual sample is computed pointwise from the extrinsic picture: the pair
(x, nu) maps to (nu, x), principal curvatures reciprocate, and the shared
second fundamental form shows up as <d nu, dx> = h.  The variational
polar-set characterization sup_x <x, y> = 0 is used only as a test.  Dual
speeds follow the correspondence f_dual = -f expressed through the inverse
curvature function with the exponent negated.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Optional

import numpy as np

from .ambient import AmbientSpec, minkowski_dot
from .flow import FlowSpec, FlowTrace, integrate
from .grids import ProfileGrid
from .shape import CurvatureField, ProfileState, curvature_from_profile
from .symfun import CurvatureFunctionSpec, DomainError, SymFn

__all__ = [
    "EmbeddedSample",
    "embedded_from_profile",
    "polar_dual",
    "polar_sphere",
    "gauss_hyperbolic",
    "dual_ambient",
    "dual_speed",
    "dual_profile_state",
    "dual_flow_commutes",
    "polar_set_gap",
]

_DUAL_AMBIENT = {"sphere": "sphere", "hyperbolic": "desitter", "desitter": "hyperbolic"}


@dataclass
class EmbeddedSample:
    """Codimension-2 sample of a convex hypersurface in a quadric model."""

    ambient: AmbientSpec
    x: np.ndarray  # (N, d) embedding points
    nu_tilde: np.ndarray  # (N, d) Gauss-map image (= unit normal representation)
    tangents: np.ndarray  # (N, n_frame, d)
    kappa: np.ndarray  # (N, n)
    theta: np.ndarray  # (N,) meridian coordinate of the source chart
    dual_of: Optional[str] = None

    @property
    def lorentzian(self) -> bool:
        return self.ambient.name in ("hyperbolic", "desitter")

    def dot(self, a, b):
        if self.lorentzian:
            return minkowski_dot(a, b)
        return np.sum(np.asarray(a) * np.asarray(b), axis=-1)

    def validate(self, atol=1e-10) -> None:
        xx = self.dot(self.x, self.x)
        model = {"sphere": 1.0, "hyperbolic": -1.0, "desitter": 1.0}[self.ambient.name]
        if not np.allclose(xx, model, atol=atol):
            raise AssertionError("sample does not sit on its model quadric")
        if self.ambient.name == "hyperbolic" and not np.all(self.x[:, 0] > 0.0):
            raise AssertionError("hyperbolic points must have positive time coordinate")
        if not np.allclose(self.dot(self.x, self.nu_tilde), 0.0, atol=atol):
            raise AssertionError("<x, x~> must vanish")


def dual_ambient(ambient: AmbientSpec) -> AmbientSpec:
    if ambient.name not in _DUAL_AMBIENT:
        raise DomainError(f"no duality for ambient {ambient.name!r}")
    return AmbientSpec(_DUAL_AMBIENT[ambient.name], ambient.n)


def embedded_from_profile(state: ProfileState, trace_id: Optional[str] = None) -> EmbeddedSample:
    field = curvature_from_profile(state)
    return EmbeddedSample(
        ambient=state.ambient,
        x=field.x,
        nu_tilde=field.nu,
        tangents=field.tangents,
        kappa=field.kappa,
        theta=field.theta,
        dual_of=trace_id,
    )


def polar_dual(sample: EmbeddedSample) -> EmbeddedSample:
    """The dual sample: points and normals swap, curvatures reciprocate.

    For a convex source the dual is again strictly convex; the hyperbolic
    dual lies in the future half of the de Sitter model.
    """
    if np.any(sample.kappa <= 0.0):
        raise DomainError("polar dual needs a strictly convex sample")
    damb = dual_ambient(sample.ambient)
    if damb.name == "hyperbolic" and not np.all(sample.nu_tilde[:, 0] > 0.0):
        raise DomainError("de Sitter normals must be future directed for the dual map")
    return EmbeddedSample(
        ambient=damb,
        x=sample.nu_tilde.copy(),
        nu_tilde=sample.x.copy(),
        tangents=None if sample.tangents is None else sample.tangents.copy(),
        kappa=1.0 / sample.kappa,
        theta=sample.theta.copy(),
        dual_of=sample.dual_of,
    )


def polar_sphere(sample: EmbeddedSample) -> EmbeddedSample:
    if sample.ambient.name != "sphere":
        raise DomainError("polar_sphere acts on spherical samples")
    return polar_dual(sample)


def gauss_hyperbolic(sample: EmbeddedSample) -> EmbeddedSample:
    if sample.ambient.name not in ("hyperbolic", "desitter"):
        raise DomainError("gauss_hyperbolic acts on hyperbolic or de Sitter samples")
    return polar_dual(sample)


def polar_set_gap(sample: EmbeddedSample, dual: EmbeddedSample, pairs: int, seed: int = 0) -> dict:
    """Discrete polar-set characterization sup_i <x_i, y_j> = 0 at randomly
    chosen dual points y_j.

    The sup is attained exactly at the node that generated y_j, so `gap` is
    ~0 by construction; `contact` is |sup| with that node excluded and
    shrinks at second order with the grid (touching-point contact).  All
    other inner products must be negative (convexity side condition).
    """
    rng = np.random.default_rng(seed)
    N = dual.x.shape[0]
    idx = rng.integers(0, N, size=pairs)
    gap = 0.0
    contact = 0.0
    side_ok = True
    for j in idx:
        vals = sample.dot(sample.x, dual.x[j])
        gap = max(gap, abs(float(vals.max())))
        others = np.delete(vals, j)
        contact = max(contact, abs(float(others.max())))
        side_ok = side_ok and bool(np.all(others < 0.0))
    return {"gap": gap, "contact": contact, "strictly_below": side_ok}


def dual_speed(spec: CurvatureFunctionSpec) -> CurvatureFunctionSpec:
    """Speed of the dual flow: base -> inverse function, p -> -p (the sign
    flips through sgn(p)); an involution."""
    if not (spec.phi.is_one and spec.psi.is_one):
        raise DomainError("dual speeds are defined for isotropic, support-free speeds")
    return CurvatureFunctionSpec(SymFn.inverse(spec.base), -spec.p)


# ---------------------------------------------------------------------------
# rebuilding dual profile states
# ---------------------------------------------------------------------------


def _dual_polar_coordinates(sample: EmbeddedSample) -> tuple[np.ndarray, np.ndarray]:
    """(theta~, radial~) of the dual points in the dual chart.

    Spherical duals are re-centered at the antipode of the source pole (the
    polar set of a cap around P sits around -P)."""
    y = sample.nu_tilde
    name = sample.ambient.name
    if name == "sphere":
        A, B, w = -y[:, 0], -y[:, 1], y[:, 2]
        radial = np.arccos(np.clip(A, -1.0, 1.0))
        theta = np.arctan2(w, B)
        return theta, radial
    if name == "hyperbolic":  # dual lives in de Sitter: radial is proper time
        radial = np.arcsinh(y[:, 0])
        theta = np.arctan2(y[:, 2], y[:, 1])
        return theta, radial
    # desitter -> hyperbolic
    radial = np.arccosh(np.maximum(y[:, 0], 1.0))
    theta = np.arctan2(y[:, 2], y[:, 1])
    return theta, radial


def dual_profile_state(sample: EmbeddedSample, grid: Optional[ProfileGrid] = None, t: float = 0.0) -> ProfileState:
    """Resample the dual points onto a profile grid in the dual ambient;
    the independent route to the dual's curvature (finite differences on
    the rebuilt graph, not reciprocals)."""
    from scipy.interpolate import CubicSpline

    theta, radial = _dual_polar_coordinates(sample)
    order = np.argsort(theta)
    theta, radial = theta[order], radial[order]
    if np.any(np.diff(theta) <= 0.0):
        raise DomainError("dual meridian angles are not monotone; cannot rebuild a graph")
    if grid is None:
        grid = ProfileGrid(theta.size)
    # even reflection through both poles keeps the spline C^2 where the
    # target grid reaches past the sampled angles
    k = min(4, theta.size)
    th_ext = np.concatenate([-theta[:k][::-1], theta, 2.0 * np.pi - theta[-k:][::-1]])
    ra_ext = np.concatenate([radial[:k][::-1], radial, radial[-k:][::-1]])
    rho = CubicSpline(th_ext, ra_ext)(grid.theta)
    damb = dual_ambient(sample.ambient)
    return ProfileState(damb, grid, rho, t)


def dual_flow_commutes(
    primal0: ProfileState,
    speed: CurvatureFunctionSpec,
    t_end: float,
    samples: int = 24,
    grid: Optional[ProfileGrid] = None,
) -> dict:
    """Evolve the primal profile under `speed` and its polar dual under the
    dual speed; return the max graph distance between 'polar of evolved
    primal' and 'evolved polar' at matching sample times."""
    amb = primal0.ambient
    primal_spec = FlowSpec(amb, speed, t0=primal0.t)
    primal = integrate(primal_spec, primal0, t_end, samples=samples)

    dual0 = dual_profile_state(embedded_from_profile(primal0), grid=grid, t=primal0.t)
    damb = dual0.ambient
    dspec = FlowSpec(damb, dual_speed(speed), t0=dual0.t)
    dual = integrate(dspec, dual0, t_end, samples=samples)

    m = min(primal.size, dual.size)
    worst = 0.0
    for i in range(m):
        if abs(primal.times[i] - dual.times[i]) > 1e-12 * max(1.0, primal.times[i]):
            raise AssertionError("sample clocks diverged")
        via_polar = dual_profile_state(
            embedded_from_profile(primal.records[i].state), grid=dual0.grid, t=primal.times[i]
        )
        worst = max(worst, float(np.abs(via_polar.rho - dual.records[i].state.rho).max()))
    return {
        "residual": worst,
        "compared_records": m,
        "primal_termination": primal.termination,
        "dual_termination": dual.termination,
    }
