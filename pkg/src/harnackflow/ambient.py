"""Ambient spaceform models.

Identifies the five ambient spaces by name, metric-type sign sigma and
sectional curvature K_N, provides the curvature bilinear form entering the
Harnack computations, and the exact umbilic slices (geodesic spheres,
hyperboloids, de Sitter time slices) that anchor every convention in the
test suite.

Curved spaces are represented extrinsically through their quadric models
one dimension up: the sphere in R^(n+2), hyperbolic and de Sitter space in
R^(n+1,1) with the time coordinate first.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = ["AmbientSpec", "lambda_form", "umbilic_slice", "minkowski_dot"]

_TABLE = {
    # name: (sigma, K_N)
    "euclidean": (1, 0.0),
    "minkowski": (-1, 0.0),
    "sphere": (1, 1.0),
    "hyperbolic": (1, -1.0),
    "desitter": (-1, 1.0),
}


@dataclass(frozen=True)
class AmbientSpec:
    """Ambient space identity: name, metric-type sign, curvature, dimension."""

    name: str
    n: int

    def __post_init__(self):
        key = self.name.lower()
        if key not in _TABLE:
            raise ValueError(f"unknown ambient {self.name!r}")
        object.__setattr__(self, "name", key)
        if self.n < 1:
            raise ValueError("hypersurface dimension must be >= 1")

    @property
    def sigma(self) -> int:
        return _TABLE[self.name][0]

    @property
    def K_N(self) -> float:
        return _TABLE[self.name][1]

    @property
    def flat(self) -> bool:
        return self.K_N == 0.0

    @property
    def smoke_dimension(self) -> bool:
        """n = 1 is below the theorem-level dimension and is flagged."""
        return self.n == 1

    @property
    def scalar_curvature(self) -> float:
        """Scalar curvature of the spaceform, n(n+1) K_N."""
        return self.n * (self.n + 1) * self.K_N


def minkowski_dot(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Lorentzian inner product with the time coordinate first (-+...+)."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    return np.sum(a * b, axis=-1) - 2.0 * a[..., 0] * b[..., 0]


def lambda_form(ambient: AmbientSpec, f: float, g: np.ndarray) -> np.ndarray:
    """Ambient-curvature bilinear form Lambda = K_N * f * g of a spaceform."""
    return ambient.K_N * f * np.asarray(g, dtype=float)


def umbilic_slice(ambient: AmbientSpec, param: float) -> tuple[float, float]:
    """Common principal curvature and intrinsic (area) radius of the umbilic
    hypersurface with the given parameter.

    sphere      param = geodesic radius rho in (0, pi):   kappa = cot(rho)
    hyperbolic  param = geodesic radius rho > 0:          kappa = coth(rho)
    desitter    param = slice height c = z^0 >= 0:        kappa = c/sqrt(1+c^2)
    minkowski   param = hyperboloid scale lambda > 0:     kappa = 1/lambda
    """
    p = float(param)
    if ambient.name == "sphere":
        if not 0.0 < p < np.pi:
            raise ValueError(f"geodesic radius must lie in (0, pi), got {p}")
        return 1.0 / np.tan(p), np.sin(p)
    if ambient.name == "hyperbolic":
        if p <= 0.0:
            raise ValueError(f"geodesic radius must be positive, got {p}")
        return 1.0 / np.tanh(p), np.sinh(p)
    if ambient.name == "desitter":
        if p < 0.0:
            raise ValueError(f"slice height must be nonnegative, got {p}")
        return p / np.sqrt(1.0 + p * p), np.sqrt(1.0 + p * p)
    if ambient.name == "minkowski":
        if p <= 0.0:
            raise ValueError(f"hyperboloid scale must be positive, got {p}")
        return 1.0 / p, p
    raise ValueError(f"no umbilic slice catalog for ambient {ambient.name!r}")
