"""Discrete convex hypersurfaces and curvature extraction.

Two state families:

  SupportState   support function s on the Gauss-map domain of a flat
                 ambient: S^1 or S^2 for Euclidean space, the radial H^n
                 chart for Minkowski space.  All geometry flows from the
                 radii-of-curvature form: Hess s + s g on the sphere domain,
                 s g - Hess s on the hyperbolic domain (the Minkowski sign
                 is pinned by the oracle s = const -> kappa = 1/s).
  ProfileState   rotationally symmetric geodesic radial graph in a curved
                 ambient (sphere, hyperbolic, de Sitter), handled through
                 the codimension-2 quadric models.

curvature_from_* returns a CurvatureField carrying, per node: the principal
curvatures, the Weingarten matrix and metric/second-fundamental-form
matrices in the chart coordinates (azimuthal blocks in an orthonormal orbit
frame), the ambient embedding point and unit normal.  States are immutable
value objects; extraction never mutates them.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, replace
from typing import Optional, Union

import numpy as np

from .ambient import AmbientSpec, minkowski_dot
from .grids import (
    CircleGrid,
    ProfileGrid,
    RadialHyperbolicGrid,
    SphereGrid,
    grid_from_descriptor,
)
from .symfun import CurvatureFunctionSpec, DomainError

__all__ = [
    "DegenerateShapeError",
    "SupportState",
    "ProfileState",
    "CurvatureField",
    "curvature_from_support",
    "curvature_from_profile",
    "speed_field",
    "state_to_json",
    "state_from_json",
    "state_to_csv",
]


class DegenerateShapeError(RuntimeError):
    """Convexity or chart validity lost; carries the worst node."""

    def __init__(self, message: str, node: int, value: float):
        super().__init__(f"{message} (node {node}, value {value:.6g})")
        self.node = node
        self.value = value


@dataclass(frozen=True)
class SupportState:
    ambient: AmbientSpec
    grid: Union[CircleGrid, SphereGrid, RadialHyperbolicGrid]
    s: np.ndarray
    t: float

    def __post_init__(self):
        if self.ambient.name not in ("euclidean", "minkowski"):
            raise ValueError("support states live in flat ambients")
        s = np.asarray(self.s, dtype=float)
        if self.ambient.name == "euclidean":
            if self.ambient.n == 1 and not isinstance(self.grid, CircleGrid):
                raise ValueError("euclidean n=1 needs a circle grid")
            if self.ambient.n == 2 and not isinstance(self.grid, SphereGrid):
                raise ValueError("euclidean n=2 needs a sphere grid")
            if self.ambient.n > 2:
                raise ValueError("euclidean support states implemented for n <= 2")
            expected = (self.grid.m,) if isinstance(self.grid, CircleGrid) else (
                self.grid.n_theta,
                self.grid.n_phi,
            )
        else:
            if not isinstance(self.grid, RadialHyperbolicGrid):
                raise ValueError("minkowski states use the radial hyperbolic grid")
            expected = (self.grid.m,)
        if s.shape != expected:
            raise ValueError(f"support samples shaped {s.shape}, grid wants {expected}")
        object.__setattr__(self, "s", s)

    @property
    def values(self) -> np.ndarray:
        return self.s

    def with_values(self, v: np.ndarray, t: Optional[float] = None) -> "SupportState":
        return replace(self, s=v.reshape(self.s.shape), t=self.t if t is None else t)


@dataclass(frozen=True)
class ProfileState:
    ambient: AmbientSpec
    grid: ProfileGrid
    rho: np.ndarray
    t: float

    def __post_init__(self):
        if self.ambient.name not in ("sphere", "hyperbolic", "desitter"):
            raise ValueError("profile states live in curved ambients")
        r = np.asarray(self.rho, dtype=float)
        if r.shape != (self.grid.m,):
            raise ValueError(f"profile samples shaped {r.shape}, grid wants ({self.grid.m},)")
        if self.ambient.name == "sphere" and (np.any(r <= 0) or np.any(r >= np.pi)):
            raise DegenerateShapeError(
                "sphere chart exit", int(np.argmin(np.minimum(r, np.pi - r))), float(r.min())
            )
        if self.ambient.name == "hyperbolic" and np.any(r <= 0):
            raise DegenerateShapeError("hyperbolic chart exit", int(np.argmin(r)), float(r.min()))
        object.__setattr__(self, "rho", r)

    @property
    def values(self) -> np.ndarray:
        return self.rho

    def with_values(self, v: np.ndarray, t: Optional[float] = None) -> "ProfileState":
        return replace(self, rho=v.reshape(self.rho.shape), t=self.t if t is None else t)


@dataclass
class CurvatureField:
    """Per-node geometry in chart coordinates (meridian first, azimuthal
    blocks in an orthonormal orbit frame)."""

    kappa: np.ndarray  # (N, n)
    W: np.ndarray  # (N, n, n)
    g: np.ndarray  # (N, n, n)
    h: np.ndarray  # (N, n, n)
    nu: np.ndarray  # (N, d) ambient coordinates
    x: np.ndarray  # (N, d)
    theta: np.ndarray  # (N,) meridian coordinate
    sigma: int
    interior: np.ndarray  # (N,) bool
    lorentzian_model: bool = False  # ambient coordinates carry a -+...+ product
    tangents: Optional[np.ndarray] = None  # (N, n_frame, d) chart tangent vectors
    er_dot_nu: Optional[np.ndarray] = None  # profile states: <e_r, nu> per node
    er_dot_t: Optional[np.ndarray] = None  # profile states: <e_r, t_theta> per node

    @property
    def size(self) -> int:
        return self.kappa.shape[0]

    @property
    def n(self) -> int:
        return self.kappa.shape[1]

    def dot(self, a: np.ndarray, b: np.ndarray) -> np.ndarray:
        """Inner product of ambient-coordinate vectors."""
        if self.lorentzian_model:
            return minkowski_dot(a, b)
        return np.sum(np.asarray(a) * np.asarray(b), axis=-1)

    def validate(self, rtol: float = 1e-9) -> None:
        gw = np.einsum("nij,njk->nik", self.g, self.W)
        scale = max(1.0, float(np.abs(gw).max()))
        if not np.allclose(gw, self.h, rtol=rtol, atol=rtol * scale):
            raise AssertionError("g W != h")
        if not np.allclose(gw, np.swapaxes(gw, 1, 2), rtol=rtol, atol=rtol * scale):
            raise AssertionError("g W not symmetric")
        nn = self.dot(self.nu, self.nu)
        if not np.allclose(nn, self.sigma, atol=1e-9):
            raise AssertionError("normal normalization does not match the ambient sign")


def _diag_embed(cols: list[np.ndarray]) -> np.ndarray:
    """Stack per-node diagonal matrices from per-node diagonal entries."""
    N = cols[0].shape[0]
    n = len(cols)
    out = np.zeros((N, n, n))
    for i, c in enumerate(cols):
        out[:, i, i] = c
    return out


# ---------------------------------------------------------------------------
# support-function geometry (flat ambients)
# ---------------------------------------------------------------------------


def _support_circle(state: SupportState) -> CurvatureField:
    grid: CircleGrid = state.grid
    s = state.s
    th = grid.theta
    r = grid.d2(s) + s
    if np.any(r <= 0.0):
        i = int(np.argmin(r))
        raise DegenerateShapeError("convexity lost", i, float(r[i]))
    z = np.stack([np.cos(th), np.sin(th)], axis=-1)
    zp = np.stack([-np.sin(th), np.cos(th)], axis=-1)
    x = s[:, None] * z + grid.d1(s)[:, None] * zp
    kappa = (1.0 / r)[:, None]
    field = CurvatureField(
        kappa=kappa,
        W=kappa[:, :, None],
        g=(r**2)[:, None, None],
        h=r[:, None, None],
        nu=z,
        x=x,
        theta=th,
        sigma=1,
        interior=np.ones(grid.m, dtype=bool),
        tangents=(r[:, None] * zp)[:, None, :],
    )
    return field


def _support_sphere(state: SupportState) -> CurvatureField:
    grid: SphereGrid = state.grid
    s = state.s
    th = grid.theta[:, None] * np.ones((1, grid.n_phi))
    ph = np.ones((grid.n_theta, 1)) * grid.phi[None, :]
    sin_t, cos_t = np.sin(th), np.cos(th)
    cot_t = cos_t / sin_t

    s_t = grid.d1_theta(s)
    s_tt = grid.d2_theta(s)
    s_p = grid.d1_phi(s)
    s_pp = grid.d2_phi(s)
    s_tp = grid.d2_theta_phi(s)

    # covariant Hessian on the round sphere plus s * metric
    r_tt = s_tt + s
    r_tp = s_tp - cot_t * s_p
    r_pp = s_pp + sin_t * cos_t * s_t + s * sin_t**2

    # radii operator (mixed form) and its eigenvalues
    m_tt = r_tt
    m_tp = r_tp
    m_pt = r_tp / sin_t**2
    m_pp = r_pp / sin_t**2
    tr = m_tt + m_pp
    disc = np.sqrt(np.maximum((m_tt - m_pp) ** 2 + 4.0 * m_tp * m_pt, 0.0))
    r1 = 0.5 * (tr - disc)
    r2 = 0.5 * (tr + disc)
    if np.any(r1 <= 0.0):
        flat_r1 = r1.reshape(-1)
        i = int(np.argmin(flat_r1))
        raise DegenerateShapeError("convexity lost", i, float(flat_r1[i]))

    z = np.stack([sin_t * np.cos(ph), sin_t * np.sin(ph), cos_t], axis=-1)
    e_t = np.stack([cos_t * np.cos(ph), cos_t * np.sin(ph), -sin_t], axis=-1)
    e_p = np.stack([-sin_t * np.sin(ph), sin_t * np.cos(ph), np.zeros_like(th)], axis=-1)
    x = s[..., None] * z + s_t[..., None] * e_t + (s_p / sin_t**2)[..., None] * e_p

    N = grid.size

    def flat(a):
        return a.reshape(N)

    R = np.empty((N, 2, 2))
    R[:, 0, 0] = flat(m_tt)
    R[:, 0, 1] = flat(m_tp)
    R[:, 1, 0] = flat(m_pt)
    R[:, 1, 1] = flat(m_pp)
    G_can = _diag_embed([np.ones(N), flat(sin_t**2)])
    W = np.linalg.inv(R)
    g = np.einsum("nki,nkl,nlj->nij", R, G_can, R)
    h = np.empty((N, 2, 2))
    h[:, 0, 0] = flat(r_tt)
    h[:, 0, 1] = flat(r_tp)
    h[:, 1, 0] = flat(r_tp)
    h[:, 1, 1] = flat(r_pp)
    kappa = np.stack([flat(1.0 / r2), flat(1.0 / r1)], axis=-1)

    e_t_f = e_t.reshape(N, 3)
    e_p_f = e_p.reshape(N, 3)
    tangents = np.empty((N, 2, 3))
    tangents[:, 0] = R[:, 0, 0, None] * e_t_f + R[:, 1, 0, None] * e_p_f
    tangents[:, 1] = R[:, 0, 1, None] * e_t_f + R[:, 1, 1, None] * e_p_f

    field = CurvatureField(
        kappa=kappa,
        W=W,
        g=g,
        h=h,
        nu=z.reshape(N, 3),
        x=x.reshape(N, 3),
        theta=flat(th),
        sigma=1,
        interior=np.ones(N, dtype=bool),
        tangents=tangents,
    )
    return field


def _support_minkowski(state: SupportState) -> CurvatureField:
    grid: RadialHyperbolicGrid = state.grid
    n = state.ambient.n
    s = state.s
    rho = grid.rho
    sh, ch = np.sinh(rho), np.cosh(rho)

    s_r = grid.d1(s)
    s_rr = grid.d2(s)
    r_rad = s - s_rr
    r_az = s - (ch / sh) * s_r
    worst = np.minimum(r_rad, r_az)
    if np.any(worst <= 0.0):
        i = int(np.argmin(worst))
        raise DegenerateShapeError("convexity (spacelikeness) lost", i, float(worst[i]))

    # meridian representative omega = e1 in R^n; ambient coords (t, x1, ..., xn)
    d = n + 1
    N = grid.m
    z = np.zeros((N, d))
    z[:, 0] = ch
    z[:, 1] = sh
    x = np.zeros((N, d))
    x[:, 0] = s * ch - s_r * sh
    x[:, 1] = s * sh - s_r * ch

    C = r_az * sh  # orbit radius of the embedded hypersurface
    kappa = np.concatenate(
        [(1.0 / r_rad)[:, None], np.repeat((1.0 / r_az)[:, None], n - 1, axis=1)], axis=1
    )
    g = _diag_embed([r_rad**2] + [C**2] * (n - 1))
    h = _diag_embed([r_rad] + [r_az * sh**2] * (n - 1))
    W = _diag_embed([1.0 / r_rad] + [1.0 / r_az] * (n - 1))

    e_rho = np.zeros((N, d))
    e_rho[:, 0] = sh
    e_rho[:, 1] = ch
    field = CurvatureField(
        kappa=kappa,
        W=W,
        g=g,
        h=h,
        nu=z,
        x=x,
        theta=rho,
        sigma=-1,
        interior=grid.interior.copy(),
        lorentzian_model=True,
        tangents=(r_rad[:, None] * e_rho)[:, None, :],
    )
    return field


def curvature_from_support(state: SupportState) -> CurvatureField:
    """Geometry of the hypersurface with support function state.s."""
    if state.ambient.name == "euclidean":
        if isinstance(state.grid, CircleGrid):
            return _support_circle(state)
        return _support_sphere(state)
    return _support_minkowski(state)


# ---------------------------------------------------------------------------
# rotationally symmetric profiles (curved ambients)
# ---------------------------------------------------------------------------

def curvature_from_profile(state: ProfileState) -> CurvatureField:
    """Geometry of the rotationally symmetric radial graph rho(theta).

    Works in the codimension-2 quadric model reduced to the 3-space spanned
    by the two axis-plane coordinates and the orbit direction: point
    X = (A, B, w * omega), tangent and normal solved per node, azimuthal
    curvature nu_w / w.
    """
    grid = state.grid
    amb = state.ambient
    n = amb.n
    th = grid.theta
    rho = state.rho
    r_t = grid.d1(rho)
    r_tt = grid.d2(rho)
    ct, st = np.cos(th), np.sin(th)

    if amb.name == "sphere":
        f, fp, fpp = np.sin(rho), np.cos(rho), -np.sin(rho)
        A, A_r, A_rr = np.cos(rho), -np.sin(rho), -np.cos(rho)
        lorentz = False
        sigma = 1
    elif amb.name == "hyperbolic":
        f, fp, fpp = np.sinh(rho), np.cosh(rho), np.sinh(rho)
        A, A_r, A_rr = np.cosh(rho), np.sinh(rho), np.cosh(rho)
        lorentz = True
        sigma = 1
    else:  # desitter: rho is the proper-time coordinate tau
        f, fp, fpp = np.cosh(rho), np.sinh(rho), np.cosh(rho)
        A, A_r, A_rr = np.sinh(rho), np.cosh(rho), np.sinh(rho)
        lorentz = True
        sigma = -1

    # X = (A(rho), f(rho) cos(theta), f(rho) sin(theta) * omega)
    B = f * ct
    w = f * st
    X3 = np.stack([A, B, w], axis=-1)

    A_t = A_r * r_t
    B_t = fp * r_t * ct - f * st
    w_t = fp * r_t * st + f * ct
    T3 = np.stack([A_t, B_t, w_t], axis=-1)

    A_tt = A_rr * r_t**2 + A_r * r_tt
    B_tt = (fpp * r_t**2 + fp * r_tt - f) * ct - 2.0 * fp * r_t * st
    w_tt = (fpp * r_t**2 + fp * r_tt - f) * st + 2.0 * fp * r_t * ct
    Xtt3 = np.stack([A_tt, B_tt, w_tt], axis=-1)

    eta = np.array([-1.0, 1.0, 1.0]) if lorentz else np.ones(3)

    def dot3(a, b):
        return np.sum(eta * a * b, axis=-1)

    g_tt = dot3(T3, T3)
    if np.any(g_tt <= 0.0):
        i = int(np.argmin(g_tt))
        raise DegenerateShapeError("profile not spacelike", i, float(g_tt[i]))

    v = np.cross(X3, T3) * eta  # orthogonal to X and T in the model metric
    vv = dot3(v, v)
    norm = np.sqrt(np.abs(vv))
    nu3 = v / norm[:, None]
    Er3 = np.stack([A_r, fp * ct, fp * st], axis=-1)
    if sigma == -1:
        # future-directed timelike normal
        flip = nu3[:, 0] < 0.0
    else:
        # outward: positive component along the radial coordinate vector
        flip = dot3(nu3, Er3) < 0.0
    nu3[flip] *= -1.0
    er_nu = dot3(Er3, nu3)
    er_t = dot3(Er3, T3)

    h_tt = -dot3(Xtt3, nu3)
    kap_rad = h_tt / g_tt
    kap_az = nu3[:, 2] / w
    worst = np.minimum(kap_rad, kap_az)
    if np.any(worst <= 0.0):
        i = int(np.argmin(worst))
        raise DegenerateShapeError("convexity lost", i, float(worst[i]))

    N = grid.m
    kappa = np.concatenate(
        [kap_rad[:, None], np.repeat(kap_az[:, None], n - 1, axis=1)], axis=1
    )
    g = _diag_embed([g_tt] + [w**2] * (n - 1))
    h = _diag_embed([h_tt] + [kap_az * w**2] * (n - 1))
    W = _diag_embed([kap_rad] + [kap_az] * (n - 1))

    # full ambient coordinates: (A, B, w*e1, 0...) with d = n + 2
    d = n + 2
    x = np.zeros((N, d))
    x[:, 0] = A
    x[:, 1] = B
    x[:, 2] = w
    nu = np.zeros((N, d))
    nu[:, 0] = nu3[:, 0]
    nu[:, 1] = nu3[:, 1]
    nu[:, 2] = nu3[:, 2]
    tangents = np.zeros((N, 1, d))
    tangents[:, 0, 0] = T3[:, 0]
    tangents[:, 0, 1] = T3[:, 1]
    tangents[:, 0, 2] = T3[:, 2]

    field = CurvatureField(
        kappa=kappa,
        W=W,
        g=g,
        h=h,
        nu=nu,
        x=x,
        theta=th,
        sigma=sigma,
        interior=np.ones(N, dtype=bool),
        lorentzian_model=lorentz,
        tangents=tangents,
        er_dot_nu=er_nu,
        er_dot_t=er_t,
    )
    return field


# ---------------------------------------------------------------------------
# light geometry for integrator stages (principal curvatures only)
# ---------------------------------------------------------------------------


def stage_geometry(state) -> tuple[np.ndarray, np.ndarray, Optional[np.ndarray]]:
    """(kappa, theta, er_dot_nu) without assembling the full field; the
    cheap path for RK4 stage evaluations.  Raises exactly like the full
    constructors on convexity or chart loss."""
    if isinstance(state, SupportState):
        if isinstance(state.grid, CircleGrid):
            grid, s = state.grid, state.s
            r = grid.d2(s) + s
            if np.any(r <= 0.0):
                i = int(np.argmin(r))
                raise DegenerateShapeError("convexity lost", i, float(r[i]))
            return (1.0 / r)[:, None], grid.theta, None
        if isinstance(state.grid, SphereGrid):
            grid, s = state.grid, state.s
            th = grid.theta[:, None] * np.ones((1, grid.n_phi))
            sin_t, cos_t = np.sin(th), np.cos(th)
            s_t = grid.d1_theta(s)
            r_tt = grid.d2_theta(s) + s
            r_tp = grid.d2_theta_phi(s) - (cos_t / sin_t) * grid.d1_phi(s)
            r_pp = grid.d2_phi(s) + sin_t * cos_t * s_t + s * sin_t**2
            m_pp = r_pp / sin_t**2
            tr = r_tt + m_pp
            disc = np.sqrt(np.maximum((r_tt - m_pp) ** 2 + 4.0 * r_tp * (r_tp / sin_t**2), 0.0))
            r1 = 0.5 * (tr - disc)
            r2 = 0.5 * (tr + disc)
            if np.any(r1 <= 0.0):
                flat_r1 = r1.reshape(-1)
                i = int(np.argmin(flat_r1))
                raise DegenerateShapeError("convexity lost", i, float(flat_r1[i]))
            kappa = np.stack([1.0 / r2.reshape(-1), 1.0 / r1.reshape(-1)], axis=-1)
            return kappa, th.reshape(-1), None
        grid, s = state.grid, state.s
        rho = grid.rho
        r_rad = s - grid.d2(s)
        r_az = s - (np.cosh(rho) / np.sinh(rho)) * grid.d1(s)
        worst = np.minimum(r_rad, r_az)
        if np.any(worst <= 0.0):
            i = int(np.argmin(worst))
            raise DegenerateShapeError("convexity (spacelikeness) lost", i, float(worst[i]))
        n = state.ambient.n
        kappa = np.concatenate(
            [(1.0 / r_rad)[:, None], np.repeat((1.0 / r_az)[:, None], n - 1, axis=1)], axis=1
        )
        return kappa, rho, None
    # profiles need the normal direction for the graph velocity anyway
    field = curvature_from_profile(state)
    return field.kappa, field.theta, field.er_dot_nu


# ---------------------------------------------------------------------------
# speed field
# ---------------------------------------------------------------------------


def speed_field(
    curv: CurvatureField,
    spec: CurvatureFunctionSpec,
    s_values: Optional[np.ndarray] = None,
) -> np.ndarray:
    """Normal speed sgn(p) phi(s) psi F^p(kappa) per node.

    Raises with the node location on a curvature-function domain violation;
    the sign must be constant over the field (non-vanishing velocity).
    """
    s_flat = None if s_values is None else np.asarray(s_values, dtype=float).reshape(-1)
    try:
        f = spec.value(curv.kappa, s=s_flat, theta=curv.theta)
    except DomainError as exc:
        bad = np.where(~np.all(curv.kappa > 0, axis=1))[0]
        node = int(bad[0]) if bad.size else -1
        raise DomainError(f"{exc} (first offending node {node})") from exc
    f = np.asarray(f, dtype=float)
    if not np.all(np.isfinite(f)):
        raise DomainError("speed field is not finite")
    if np.any(f == 0.0) or (np.any(f > 0.0) and np.any(f < 0.0)):
        raise DomainError("speed changes sign or vanishes on the field")
    return f


# ---------------------------------------------------------------------------
# serialization
# ---------------------------------------------------------------------------


def state_to_json(state) -> str:
    d = {
        "ambient": {"name": state.ambient.name, "n": state.ambient.n},
        "grid": state.grid.descriptor(),
        "t": state.t,
        "samples": np.asarray(state.values, dtype=float).reshape(-1).tolist(),
    }
    d["kind"] = "support" if isinstance(state, SupportState) else "profile"
    return json.dumps(d)


def state_from_json(text: str):
    d = json.loads(text)
    amb = AmbientSpec(d["ambient"]["name"], int(d["ambient"]["n"]))
    grid = grid_from_descriptor(d["grid"])
    vals = np.asarray(d["samples"], dtype=float)
    if d["kind"] == "support":
        if isinstance(grid, SphereGrid):
            vals = vals.reshape(grid.n_theta, grid.n_phi)
        return SupportState(amb, grid, vals, float(d["t"]))
    return ProfileState(amb, grid, vals, float(d["t"]))


def state_to_csv(state, path) -> None:
    """One row per node: node index, meridian coordinate, sample value."""
    vals = np.asarray(state.values, dtype=float).reshape(-1)
    if isinstance(state.grid, SphereGrid):
        coord = (state.grid.theta[:, None] * np.ones((1, state.grid.n_phi))).reshape(-1)
    elif isinstance(state.grid, RadialHyperbolicGrid):
        coord = state.grid.rho
    else:
        coord = state.grid.theta
    with open(path, "w") as fh:
        fh.write("node,coord,value\n")
        for i, (c, v) in enumerate(zip(coord, vals)):
            fh.write(f"{i},{c!r},{v!r}\n")
