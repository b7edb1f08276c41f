"""Sampling grids for the Gauss-map domains and profile charts.

Four families, all with second-order centered stencils:

  CircleGrid             uniform angles on S^1 (curves in the plane)
  SphereGrid             latitude-longitude on S^2, theta rows cell-centered
                         so no node sits on a pole; pole closure by
                         reflection through the pole with a half-turn in
                         longitude (n_phi = 1 collapses the longitude
                         direction: axisymmetric fields)
  RadialHyperbolicGrid   radial coordinate on H^n for rotationally symmetric
                         spacelike hypersurfaces; even reflection at rho = 0,
                         linear extrapolation at the truncation radius
  ProfileGrid            polar angle on [0, pi] for rotationally symmetric
                         radial graphs in curved ambients; even reflection
                         at both poles

The latitude-longitude pole treatment is the documented accuracy bottleneck
of the S^2 machinery.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = ["CircleGrid", "SphereGrid", "RadialHyperbolicGrid", "ProfileGrid", "grid_from_descriptor"]


@dataclass(frozen=True)
class CircleGrid:
    m: int

    def __post_init__(self):
        if self.m < 8:
            raise ValueError("circle grid needs at least 8 nodes")

    @property
    def theta(self) -> np.ndarray:
        return 2.0 * np.pi * np.arange(self.m) / self.m

    @property
    def dtheta(self) -> float:
        return 2.0 * np.pi / self.m

    @property
    def size(self) -> int:
        return self.m

    def d1(self, v: np.ndarray) -> np.ndarray:
        return (np.roll(v, -1, axis=0) - np.roll(v, 1, axis=0)) / (2.0 * self.dtheta)

    def d2(self, v: np.ndarray) -> np.ndarray:
        return (np.roll(v, -1, axis=0) - 2.0 * v + np.roll(v, 1, axis=0)) / self.dtheta**2

    @property
    def min_spacing(self) -> float:
        return self.dtheta

    def descriptor(self) -> dict:
        return {"kind": "circle", "m": self.m}


@dataclass(frozen=True)
class SphereGrid:
    n_theta: int
    n_phi: int = 1

    def __post_init__(self):
        if self.n_theta < 8:
            raise ValueError("sphere grid needs at least 8 latitude rows")
        if self.n_phi != 1 and self.n_phi % 2 != 0:
            raise ValueError("longitude count must be 1 (axisymmetric) or even")

    @property
    def theta(self) -> np.ndarray:
        return (np.arange(self.n_theta) + 0.5) * np.pi / self.n_theta

    @property
    def phi(self) -> np.ndarray:
        return 2.0 * np.pi * np.arange(self.n_phi) / self.n_phi

    @property
    def dtheta(self) -> float:
        return np.pi / self.n_theta

    @property
    def dphi(self) -> float:
        return 2.0 * np.pi / max(self.n_phi, 1)

    @property
    def size(self) -> int:
        return self.n_theta * self.n_phi

    @property
    def axisymmetric(self) -> bool:
        return self.n_phi == 1

    def _pad_theta(self, v: np.ndarray) -> np.ndarray:
        """One ghost row on each side, reflected through the pole (half-turn
        in longitude)."""
        shift = self.n_phi // 2
        top = np.roll(v[0:1], shift, axis=1)
        bot = np.roll(v[-1:], shift, axis=1)
        return np.concatenate([top, v, bot], axis=0)

    def d1_theta(self, v: np.ndarray) -> np.ndarray:
        p = self._pad_theta(v)
        return (p[2:] - p[:-2]) / (2.0 * self.dtheta)

    def d2_theta(self, v: np.ndarray) -> np.ndarray:
        p = self._pad_theta(v)
        return (p[2:] - 2.0 * p[1:-1] + p[:-2]) / self.dtheta**2

    def d1_phi(self, v: np.ndarray) -> np.ndarray:
        if self.n_phi == 1:
            return np.zeros_like(v)
        return (np.roll(v, -1, axis=1) - np.roll(v, 1, axis=1)) / (2.0 * self.dphi)

    def d2_phi(self, v: np.ndarray) -> np.ndarray:
        if self.n_phi == 1:
            return np.zeros_like(v)
        return (np.roll(v, -1, axis=1) - 2.0 * v + np.roll(v, 1, axis=1)) / self.dphi**2

    def d2_theta_phi(self, v: np.ndarray) -> np.ndarray:
        return self.d1_phi(self.d1_theta(v))

    @property
    def min_spacing(self) -> float:
        # physical spacing: longitude circles shrink like sin(theta)
        if self.n_phi == 1:
            return self.dtheta
        return min(self.dtheta, float(np.sin(self.theta[0])) * self.dphi)

    def descriptor(self) -> dict:
        return {"kind": "sphere", "n_theta": self.n_theta, "n_phi": self.n_phi}


@dataclass(frozen=True)
class RadialHyperbolicGrid:
    m: int
    rho_max: float = 2.0
    interior_fraction: float = 0.8

    def __post_init__(self):
        if self.m < 8:
            raise ValueError("radial grid needs at least 8 nodes")
        if self.rho_max <= 0:
            raise ValueError("truncation radius must be positive")

    @property
    def rho(self) -> np.ndarray:
        return (np.arange(self.m) + 0.5) * self.rho_max / self.m

    @property
    def drho(self) -> float:
        return self.rho_max / self.m

    @property
    def size(self) -> int:
        return self.m

    def _pad(self, v: np.ndarray) -> np.ndarray:
        # even reflection at 0, linear extrapolation at rho_max
        return np.concatenate([v[0:1], v, (2.0 * v[-1] - v[-2])[None]])

    def d1(self, v: np.ndarray) -> np.ndarray:
        p = self._pad(v)
        return (p[2:] - p[:-2]) / (2.0 * self.drho)

    def d2(self, v: np.ndarray) -> np.ndarray:
        p = self._pad(v)
        return (p[2:] - 2.0 * p[1:-1] + p[:-2]) / self.drho**2

    @property
    def interior(self) -> np.ndarray:
        """Mask of nodes where diagnostics are trusted (away from the
        truncation boundary)."""
        return self.rho <= self.interior_fraction * self.rho_max

    @property
    def min_spacing(self) -> float:
        return self.drho

    def descriptor(self) -> dict:
        return {"kind": "h_radial", "m": self.m, "rho_max": self.rho_max}


@dataclass(frozen=True)
class ProfileGrid:
    m: int

    def __post_init__(self):
        if self.m < 8:
            raise ValueError("profile grid needs at least 8 nodes")

    @property
    def theta(self) -> np.ndarray:
        return (np.arange(self.m) + 0.5) * np.pi / self.m

    @property
    def dtheta(self) -> float:
        return np.pi / self.m

    @property
    def size(self) -> int:
        return self.m

    def _pad(self, v: np.ndarray) -> np.ndarray:
        return np.concatenate([v[0:1], v, v[-1:]])

    def d1(self, v: np.ndarray) -> np.ndarray:
        p = self._pad(v)
        return (p[2:] - p[:-2]) / (2.0 * self.dtheta)

    def d2(self, v: np.ndarray) -> np.ndarray:
        p = self._pad(v)
        return (p[2:] - 2.0 * p[1:-1] + p[:-2]) / self.dtheta**2

    @property
    def min_spacing(self) -> float:
        return self.dtheta

    def descriptor(self) -> dict:
        return {"kind": "profile", "m": self.m}


def grid_from_descriptor(d: dict):
    kind = d["kind"]
    if kind == "circle":
        return CircleGrid(int(d["m"]))
    if kind == "sphere":
        return SphereGrid(int(d["n_theta"]), int(d.get("n_phi", 1)))
    if kind == "h_radial":
        return RadialHyperbolicGrid(int(d["m"]), float(d.get("rho_max", 2.0)))
    if kind == "profile":
        return ProfileGrid(int(d["m"]))
    raise ValueError(f"unknown grid kind {kind!r}")
