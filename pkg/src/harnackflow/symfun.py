"""Symmetric curvature-function calculus.

Evaluation, first and second derivatives, inverse functions and the
structural inequalities for the 1-homogeneous curvature functions that
drive the flows: mean curvature s1, elementary symmetric polynomials sk,
the quotients qk = sk/s(k-1), the normalized determinant det^(1/n), power
sums pk, and the inverse-function wrapper inv(.).

Principal-curvature vectors are plain numpy arrays.  Operator-level
quantities (second derivatives in matrix directions, the inverse-concavity
residual) are evaluated in an eigenbasis of the Weingarten sample, which is
self-adjoint with respect to the sample metric g, never symmetric on its
own; the eigenproblem is therefore the generalized symmetric one on
(g W, g).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np
import scipy.linalg

__all__ = [
    "DomainError",
    "Kappa",
    "SymFn",
    "ScalarFn",
    "DomainFn",
    "CurvatureFunctionSpec",
    "WeingartenSample",
    "sym_eval",
    "sym_grad",
    "sym_hess",
    "inverse_fn",
    "d2",
    "inv_concavity_check",
    "d2f_bound_check",
    "phi_admissible",
    "elem_sym_all",
]

# Relative threshold below which two principal curvatures count as coincident
# and the divided difference is replaced by its analytic limit.
COINCIDENCE_RTOL = 1e-9


class DomainError(ValueError):
    """Input outside the domain of a curvature function."""


@dataclass(frozen=True)
class Kappa:
    """Ordered vector of principal curvatures (units 1/length)."""

    values: np.ndarray

    def __post_init__(self):
        v = np.atleast_1d(np.asarray(self.values, dtype=float))
        if v.ndim != 1 or v.size < 1:
            raise DomainError("kappa must be a vector of length >= 1")
        object.__setattr__(self, "values", v)

    @property
    def n(self) -> int:
        return self.values.size

    def in_gamma_plus(self) -> bool:
        return bool(np.all(self.values > 0.0))

    def in_gamma_k(self, k: int) -> bool:
        e = elem_sym_all(self.values)
        return bool(np.all(e[1 : k + 1] > 0.0))


# ---------------------------------------------------------------------------
# elementary symmetric polynomials
# ---------------------------------------------------------------------------


def elem_sym_all(kappa: np.ndarray) -> np.ndarray:
    """All elementary symmetric polynomials e_0..e_n of kappa.

    Built by the stable product recurrence over the factors (1 + t*kappa_i);
    supports a batch leading axis: kappa (..., n) -> (..., n+1).
    """
    kappa = np.asarray(kappa, dtype=float)
    n = kappa.shape[-1]
    e = np.zeros(kappa.shape[:-1] + (n + 1,), dtype=float)
    e[..., 0] = 1.0
    for i in range(n):
        ki = kappa[..., i]
        e[..., 1 : i + 2] = e[..., 1 : i + 2] + ki[..., None] * e[..., 0 : i + 1]
    return e


def _elem_sym_without(kappa: np.ndarray, idx: int) -> np.ndarray:
    """e_0..e_(n-1) of kappa with entry idx removed (batch-aware)."""
    reduced = np.delete(kappa, idx, axis=-1)
    return elem_sym_all(reduced)


# ---------------------------------------------------------------------------
# SymFn: the curvature-function zoo
# ---------------------------------------------------------------------------

_KINDS = ("mean", "elem", "quotient", "gauss_root", "power", "power_root", "inv")


@dataclass(frozen=True)
class SymFn:
    """A named symmetric curvature function.

    kind/k:
      mean            s1
      elem(k)         sk
      quotient(k)     sk / s(k-1),  2 <= k <= n
      gauss_root      det^(1/n) = sn^(1/n)
      power(k)        pk = sum kappa_i^k
      power_root(k)   pk^(1/k)  (1-homogeneous power sum)
      inv             kappa -> 1/inner(1/kappa)
    """

    kind: str
    k: int = 0
    inner: Optional["SymFn"] = None

    def __post_init__(self):
        if self.kind not in _KINDS:
            raise DomainError(f"unknown curvature function kind {self.kind!r}")
        if self.kind in ("elem", "quotient", "power", "power_root") and self.k < 1:
            raise DomainError(f"{self.kind} needs k >= 1")
        if self.kind == "quotient" and self.k < 2:
            raise DomainError("quotient needs k >= 2")
        if self.kind == "inv" and self.inner is None:
            raise DomainError("inv needs an inner function")

    # -- constructors ------------------------------------------------------
    @staticmethod
    def mean() -> "SymFn":
        return SymFn("mean")

    @staticmethod
    def elem(k: int) -> "SymFn":
        return SymFn("elem", k)

    @staticmethod
    def quotient(k: int) -> "SymFn":
        return SymFn("quotient", k)

    @staticmethod
    def gauss_root() -> "SymFn":
        return SymFn("gauss_root")

    @staticmethod
    def power(k: int) -> "SymFn":
        return SymFn("power", k)

    @staticmethod
    def power_root(k: int) -> "SymFn":
        return SymFn("power_root", k)

    @staticmethod
    def inverse(inner: "SymFn") -> "SymFn":
        if inner.kind == "inv":
            return inner.inner
        if inner.kind == "gauss_root":
            return inner
        return SymFn("inv", inner=inner)

    # -- bookkeeping -------------------------------------------------------
    @property
    def degree(self) -> float:
        """Homogeneity degree (verified by the scaling tests)."""
        if self.kind in ("mean", "quotient", "gauss_root", "power_root"):
            return 1.0
        if self.kind in ("elem", "power"):
            return float(self.k)
        return self.inner.degree

    @property
    def name(self) -> str:
        if self.kind == "mean":
            return "s1"
        if self.kind == "elem":
            return f"s{self.k}"
        if self.kind == "quotient":
            return f"q{self.k}"
        if self.kind == "gauss_root":
            return "det^(1/n)"
        if self.kind == "power":
            return f"p{self.k}"
        if self.kind == "power_root":
            return f"p{self.k}^(1/{self.k})"
        return f"inv({self.inner.name})"

    @staticmethod
    def parse(name: str) -> "SymFn":
        """Resolve a canonical text name ("s1", "q2", "det^(1/n)", ...)."""
        name = name.strip()
        if name.startswith("inv(") and name.endswith(")"):
            return SymFn.inverse(SymFn.parse(name[4:-1]))
        if name == "det^(1/n)":
            return SymFn.gauss_root()
        if name == "s1":
            return SymFn.mean()
        for prefix, ctor in (("s", SymFn.elem), ("q", SymFn.quotient)):
            if name.startswith(prefix) and name[len(prefix) :].isdigit():
                return ctor(int(name[len(prefix) :]))
        if name.startswith("p") and name[1:].isdigit():
            return SymFn.power(int(name[1:]))
        if name.startswith("p") and "^(1/" in name:
            k = int(name[1 : name.index("^")])
            if name != f"p{k}^(1/{k})":
                raise DomainError(f"malformed power-root name {name!r}")
            return SymFn.power_root(k)
        raise DomainError(f"unknown curvature function name {name!r}")

    # -- domain ------------------------------------------------------------
    def check_domain(self, kappa: np.ndarray) -> None:
        kappa = np.asarray(kappa, dtype=float)
        n = kappa.shape[-1]
        if self.kind == "elem":
            if self.k > n:
                raise DomainError(f"s{self.k} undefined for n={n}")
        elif self.kind == "quotient":
            if self.k > n:
                raise DomainError(f"q{self.k} undefined for n={n}")
            if not np.all(elem_sym_all(kappa)[..., self.k - 1] != 0.0):
                raise DomainError(f"q{self.k} denominator vanishes")
        elif self.kind in ("gauss_root", "inv"):
            if not np.all(kappa > 0.0):
                raise DomainError(f"{self.name} needs kappa in Gamma_+")
        if self.kind == "inv":
            self.inner.check_domain(1.0 / kappa)


# -- evaluation / derivatives (batch-aware over a leading axis) -------------


def sym_eval(fn: SymFn, kappa) -> np.ndarray | float:
    """Evaluate fn at kappa; kappa may be (n,) or (..., n).

    Entries are sorted first so the value is exactly permutation invariant
    (canonical summation order).
    """
    k = kappa.values if isinstance(kappa, Kappa) else np.asarray(kappa, dtype=float)
    fn.check_domain(k)
    out = _eval(fn, np.sort(k, axis=-1))
    return float(out) if out.ndim == 0 else out


def _eval(fn: SymFn, k: np.ndarray) -> np.ndarray:
    if fn.kind == "mean":
        return np.sum(k, axis=-1)
    if fn.kind == "elem":
        return elem_sym_all(k)[..., fn.k]
    if fn.kind == "quotient":
        e = elem_sym_all(k)
        return e[..., fn.k] / e[..., fn.k - 1]
    if fn.kind == "gauss_root":
        n = k.shape[-1]
        return np.exp(np.mean(np.log(k), axis=-1)) if n > 0 else np.ones(k.shape[:-1])
    if fn.kind == "power":
        return np.sum(k**fn.k, axis=-1)
    if fn.kind == "power_root":
        return np.sum(k**fn.k, axis=-1) ** (1.0 / fn.k)
    # inv
    return 1.0 / _eval(fn.inner, 1.0 / k)


def sym_grad(fn: SymFn, kappa) -> np.ndarray:
    """Gradient (dPhi/dkappa_i); batch-aware like sym_eval."""
    k = kappa.values if isinstance(kappa, Kappa) else np.asarray(kappa, dtype=float)
    fn.check_domain(k)
    return _grad(fn, k)


def _grad(fn: SymFn, k: np.ndarray) -> np.ndarray:
    n = k.shape[-1]
    if fn.kind == "mean":
        return np.ones_like(k)
    if fn.kind == "elem":
        out = np.empty_like(k)
        for i in range(n):
            out[..., i] = _elem_sym_without(k, i)[..., fn.k - 1]
        return out
    if fn.kind == "quotient":
        num = SymFn.elem(fn.k)
        den = SymFn.elem(fn.k - 1)
        a, b = _eval(num, k), _eval(den, k)
        da, db = _grad(num, k), _grad(den, k)
        return (da * b[..., None] - a[..., None] * db) / (b**2)[..., None]
    if fn.kind == "gauss_root":
        F = _eval(fn, k)
        return F[..., None] / (n * k)
    if fn.kind == "power":
        return fn.k * k ** (fn.k - 1)
    if fn.kind == "power_root":
        P = np.sum(k**fn.k, axis=-1)
        return P[..., None] ** (1.0 / fn.k - 1.0) * k ** (fn.k - 1)
    # inv: Phi~(kappa) = 1/Phi(1/kappa)
    ik = 1.0 / k
    val = _eval(fn, k)
    gi = _grad(fn.inner, ik)
    return (val**2)[..., None] * gi / k**2


def sym_hess(fn: SymFn, kappa) -> np.ndarray:
    """Hessian (d2Phi/dkappa_i dkappa_j); batch-aware, (..., n, n)."""
    k = kappa.values if isinstance(kappa, Kappa) else np.asarray(kappa, dtype=float)
    fn.check_domain(k)
    return _hess(fn, k)


def _hess(fn: SymFn, k: np.ndarray) -> np.ndarray:
    n = k.shape[-1]
    shape = k.shape[:-1] + (n, n)
    if fn.kind == "mean":
        return np.zeros(shape)
    if fn.kind == "elem":
        H = np.zeros(shape)
        if fn.k >= 2:
            for i in range(n):
                for j in range(i + 1, n):
                    red = np.delete(k, (i, j), axis=-1)
                    v = elem_sym_all(red)[..., fn.k - 2]
                    H[..., i, j] = v
                    H[..., j, i] = v
        return H
    if fn.kind == "quotient":
        num = SymFn.elem(fn.k)
        den = SymFn.elem(fn.k - 1)
        a, b = _eval(num, k), _eval(den, k)
        da, db = _grad(num, k), _grad(den, k)
        Ha, Hb = _hess(num, k), _hess(den, k)
        binv = 1.0 / b
        # d(a/b) = da/b - a db/b^2 ; differentiate once more
        t1 = Ha * binv[..., None, None]
        t2 = -(da[..., :, None] * db[..., None, :] + db[..., :, None] * da[..., None, :]) * (
            binv**2
        )[..., None, None]
        t3 = -(a * binv**2)[..., None, None] * Hb
        t4 = (2.0 * a * binv**3)[..., None, None] * db[..., :, None] * db[..., None, :]
        return t1 + t2 + t3 + t4
    if fn.kind == "gauss_root":
        F = _eval(fn, k)
        outer = F[..., None, None] / (n * n * k[..., :, None] * k[..., None, :])
        diag = F[..., None] / (n * k**2)
        H = outer.copy()
        idx = np.arange(n)
        H[..., idx, idx] -= diag
        return H
    if fn.kind == "power":
        H = np.zeros(shape)
        idx = np.arange(n)
        H[..., idx, idx] = fn.k * (fn.k - 1) * k ** (fn.k - 2)
        return H
    if fn.kind == "power_root":
        m = fn.k
        P = np.sum(k**m, axis=-1)
        g = k ** (m - 1)
        H = (1.0 - m) * P[..., None, None] ** (1.0 / m - 2.0) * g[..., :, None] * g[..., None, :]
        idx = np.arange(n)
        H[..., idx, idx] += (m - 1) * P[..., None] ** (1.0 / m - 1.0) * k ** (m - 2)
        return H
    # inv
    ik = 1.0 / k
    val = _eval(fn, k)
    gi = _grad(fn.inner, ik)
    Hi = _hess(fn.inner, ik)
    gt = _grad(fn, k)  # gradient of the inverse function itself
    ks = (k**2)[..., :, None] * (k**2)[..., None, :]
    H = (
        2.0 / val[..., None, None] * gt[..., :, None] * gt[..., None, :]
        - (val**2)[..., None, None] * Hi / ks
    )
    idx = np.arange(n)
    H[..., idx, idx] += -2.0 * (val**2)[..., None] * gi / k**3
    return H


def inverse_fn(fn: SymFn, kappa) -> float:
    """Value of the inverse symmetric function 1/Phi(1/kappa)."""
    k = kappa.values if isinstance(kappa, Kappa) else np.asarray(kappa, dtype=float)
    if not np.all(k != 0.0):
        raise DomainError("inverse function needs nonzero curvatures")
    return sym_eval(SymFn.inverse(fn), k)


# ---------------------------------------------------------------------------
# scalar factors phi(s), psi on the domain
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ScalarFn:
    """Scalar factor of one variable: const / exp / power, or a sampled table
    with cubic interpolation."""

    kind: str
    a: float = 1.0
    table_x: Optional[np.ndarray] = None
    table_y: Optional[np.ndarray] = None
    _spline: Optional[Callable] = field(default=None, compare=False, repr=False)

    def __post_init__(self):
        if self.kind not in ("const", "exp", "power", "table"):
            raise DomainError(f"unknown scalar function kind {self.kind!r}")
        if self.kind == "table":
            from scipy.interpolate import CubicSpline

            x = np.asarray(self.table_x, dtype=float)
            y = np.asarray(self.table_y, dtype=float)
            object.__setattr__(self, "table_x", x)
            object.__setattr__(self, "table_y", y)
            object.__setattr__(self, "_spline", CubicSpline(x, y))

    def __call__(self, s):
        s = np.asarray(s, dtype=float)
        if self.kind == "const":
            return np.broadcast_to(np.float64(self.a), s.shape).copy() if s.ndim else float(self.a)
        if self.kind == "exp":
            return np.exp(self.a * s)
        if self.kind == "power":
            return s**self.a
        return self._spline(s)

    @property
    def is_one(self) -> bool:
        return self.kind == "const" and self.a == 1.0

    @property
    def name(self) -> str:
        if self.kind == "table":
            return f"table[{len(self.table_x)}]"
        return f"{self.kind}:{self.a:g}"

    @staticmethod
    def parse(text: str) -> "ScalarFn":
        text = text.strip()
        if text in ("1", "one"):
            return ScalarFn("const", 1.0)
        kind, _, arg = text.partition(":")
        if kind in ("const", "exp", "power"):
            return ScalarFn(kind, float(arg))
        raise DomainError(f"cannot parse scalar function {text!r}")


@dataclass(frozen=True)
class DomainFn:
    """Anisotropy factor psi on the Gauss-map domain, as a function of the
    meridian coordinate (angle on S^n, radius on H^n).

    cos kind is 1 + a*cos(k theta), kept positive by |a| < 1.
    """

    kind: str
    a: float = 1.0
    k: int = 1

    def __post_init__(self):
        if self.kind not in ("const", "cos"):
            raise DomainError(f"unknown domain function kind {self.kind!r}")
        if self.kind == "cos" and abs(self.a) >= 1.0:
            raise DomainError("cos anisotropy must keep psi positive (|a| < 1)")

    def __call__(self, theta):
        theta = np.asarray(theta, dtype=float)
        if self.kind == "const":
            return (
                np.broadcast_to(np.float64(self.a), theta.shape).copy()
                if theta.ndim
                else float(self.a)
            )
        return 1.0 + self.a * np.cos(self.k * theta)

    @property
    def is_one(self) -> bool:
        return self.kind == "const" and self.a == 1.0

    @property
    def name(self) -> str:
        if self.kind == "const":
            return f"const:{self.a:g}"
        return f"cos:{self.a:g}:{self.k}"

    @staticmethod
    def parse(text: str) -> "DomainFn":
        text = text.strip()
        if text in ("1", "one"):
            return DomainFn("const", 1.0)
        parts = text.split(":")
        if parts[0] == "const":
            return DomainFn("const", float(parts[1]))
        if parts[0] == "cos":
            return DomainFn("cos", float(parts[1]), int(parts[2]) if len(parts) > 2 else 1)
        raise DomainError(f"cannot parse domain function {text!r}")


@dataclass(frozen=True)
class CurvatureFunctionSpec:
    """Normal speed f = sgn(p) * phi(s) * psi * F^p with F 1-homogeneous."""

    base: SymFn
    p: float
    phi: ScalarFn = ScalarFn("const", 1.0)
    psi: DomainFn = DomainFn("const", 1.0)

    def __post_init__(self):
        if self.p == 0.0:
            raise DomainError("speed exponent p must be nonzero")
        if self.base.degree != 1.0:
            raise DomainError(
                f"speed base must be 1-homogeneous, got {self.base.name} "
                f"of degree {self.base.degree:g}"
            )

    @property
    def sign(self) -> float:
        return float(np.sign(self.p))

    def value(self, kappa, s=None, theta=None):
        """Speed value(s); kappa (..., n), s and theta broadcastable."""
        F = np.asarray(sym_eval(self.base, kappa), dtype=float)
        if not np.all(F > 0.0):
            raise DomainError("curvature function must stay positive on the sample")
        out = self.sign * F**self.p
        if not self.phi.is_one:
            if s is None:
                raise DomainError("phi-dependent speed needs support values")
            out = out * self.phi(s)
        if not self.psi.is_one:
            if theta is None:
                raise DomainError("psi-dependent speed needs domain coordinates")
            out = out * self.psi(theta)
        return out

    @property
    def name(self) -> str:
        parts = [f"sgn({self.p:g})*{self.base.name}^{self.p:g}"]
        if not self.phi.is_one:
            parts.append(f"phi={self.phi.name}")
        if not self.psi.is_one:
            parts.append(f"psi={self.psi.name}")
        return " ".join(parts)


# ---------------------------------------------------------------------------
# operator-direction second derivatives and structural inequalities
# ---------------------------------------------------------------------------


@dataclass
class WeingartenSample:
    """A metric g (SPD) and a g-self-adjoint operator W with positive
    eigenvalues, plus the eigendecomposition used by the matrix calculus."""

    g: np.ndarray
    W: np.ndarray
    kappa: np.ndarray = field(init=False)
    P: np.ndarray = field(init=False)  # columns g-orthonormal eigenvectors
    Pinv: np.ndarray = field(init=False)

    def __post_init__(self):
        g = np.asarray(self.g, dtype=float)
        W = np.asarray(self.W, dtype=float)
        gW = g @ W
        if not np.allclose(gW, gW.T, rtol=1e-10, atol=1e-12 * max(1.0, np.abs(gW).max())):
            raise DomainError("W must be self-adjoint with respect to g (g W symmetric)")
        kappa, P = scipy.linalg.eigh(gW, g)
        if np.any(kappa <= 0.0):
            raise DomainError(f"Weingarten eigenvalues must be positive, got {kappa}")
        self.g, self.W = g, W
        self.kappa = kappa
        self.P = P
        self.Pinv = P.T @ g

    @property
    def n(self) -> int:
        return self.kappa.size

    def to_eigenbasis(self, eta: np.ndarray) -> np.ndarray:
        return self.Pinv @ np.asarray(eta, dtype=float) @ self.P

    def adjoint(self, eta: np.ndarray) -> np.ndarray:
        """Adjoint of eta with respect to g."""
        ginv = np.linalg.inv(self.g)
        return ginv @ np.asarray(eta, dtype=float).T @ self.g


def _divided_differences(fn: SymFn, kappa: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """gradient, hessian and the off-diagonal divided-difference matrix
    (F^i - F^j)/(kappa_i - kappa_j), with the analytic limit H_ii - H_ij at
    coincident curvatures."""
    grad = _grad(fn, kappa)
    hess = _hess(fn, kappa)
    n = kappa.size
    dd = np.zeros((n, n))
    scale = np.max(np.abs(kappa))
    for i in range(n):
        for j in range(n):
            if i == j:
                continue
            dk = kappa[i] - kappa[j]
            if abs(dk) < COINCIDENCE_RTOL * scale:
                dd[i, j] = hess[i, i] - hess[i, j]
            else:
                dd[i, j] = (grad[i] - grad[j]) / dk
    return grad, hess, dd


def _dF(fn: SymFn, sample: WeingartenSample, eta_eig: np.ndarray) -> float:
    grad = _grad(fn, sample.kappa)
    return float(np.sum(grad * np.diagonal(eta_eig)))


def d2(fn: SymFn, sample: WeingartenSample, eta: np.ndarray) -> float:
    """Second derivative d2F(W)(eta, eta) for an arbitrary direction eta.

    eta is expressed in an eigenbasis of W internally; the off-diagonal part
    uses divided differences of the first derivatives with the analytic limit
    at coincident curvatures.
    """
    fn.check_domain(sample.kappa)
    E = sample.to_eigenbasis(eta)
    _, hess, dd = _divided_differences(fn, sample.kappa)
    diag = np.diagonal(E)
    val = float(diag @ hess @ diag)
    val += float(np.sum(dd * E * E.T)) - float(np.sum(np.diagonal(dd) * diag * diag))
    return val


def inv_concavity_check(fn: SymFn, sample: WeingartenSample, eta: np.ndarray) -> float:
    """Signed residual dF(ad_g(eta) W^-1 eta) - F^-1 (dF(eta))^2.

    Nonnegative (to round-off) for inverse-concave F; equality at eta = W.
    """
    fn.check_domain(sample.kappa)
    eta = np.asarray(eta, dtype=float)
    Winv = np.linalg.inv(sample.W)
    comp = sample.adjoint(eta) @ Winv @ eta
    F = sym_eval(fn, sample.kappa)
    lhs = _dF(fn, sample, sample.to_eigenbasis(comp))
    rhs = _dF(fn, sample, sample.to_eigenbasis(eta)) ** 2 / F
    return lhs - rhs


def d2f_bound_check(
    spec: CurvatureFunctionSpec,
    sample: WeingartenSample,
    Wdot: np.ndarray,
    phi_value: float = 1.0,
    psi_value: float = 1.0,
) -> tuple[float, float]:
    """Residuals of the two second-derivative bounds for f = sgn(p) phi psi F^p.

    Returns (convex-branch, inverse-concave-branch):
      d2f(Wdot,Wdot) - ((p-1)/p) f^-1 df(Wdot)^2
      d2f(Wdot,Wdot) + 2 df(Wdot W^-1 Wdot) - ((p+1)/p) f^-1 df(Wdot)^2
    Both vanish for Wdot proportional to W.  The convex branch is >= 0 for
    convex F, the second is >= 0 for inverse-concave F and <= 0 for
    inverse-convex F, when Wdot = A W with A self-adjoint in the h metric.
    """
    p = spec.p
    fn = spec.base
    fn.check_domain(sample.kappa)
    Wdot = np.asarray(Wdot, dtype=float)
    F = sym_eval(fn, sample.kappa)
    c = phi_value * psi_value
    f = spec.sign * c * F**p

    dF = _dF(fn, sample, sample.to_eigenbasis(Wdot))
    d2F = d2(fn, sample, Wdot)
    df = abs(p) * c * F ** (p - 1) * dF
    d2f = abs(p) * c * (F ** (p - 1) * d2F + (p - 1) * F ** (p - 2) * dF**2)

    Winv = np.linalg.inv(sample.W)
    df_comp = abs(p) * c * F ** (p - 1) * _dF(fn, sample, sample.to_eigenbasis(Wdot @ Winv @ Wdot))

    convex = d2f - (p - 1) / p * df**2 / f
    invconc = d2f + 2.0 * df_comp - (p + 1) / p * df**2 / f
    return convex, invconc


def phi_admissible(
    phi: ScalarFn,
    p: float,
    sigma: int,
    s_range: tuple[float, float],
    samples: int = 256,
) -> bool:
    """Admissibility of the support factor phi for exponent p and metric sign.

    Checks, at finite-difference resolution over s_range:
      sigma * phi' <= 0  and  sgn(p(p+1)) * ((1-p)/p phi'^2 + phi'' phi) >= 0.
    """
    if p in (0.0, -1.0):
        raise DomainError("phi admissibility needs p != 0, -1")
    lo, hi = s_range
    s = np.linspace(lo, hi, samples)
    h = 1e-5 * max(1.0, hi - lo)
    v = phi(s)
    if np.any(v <= 0.0):
        raise DomainError("phi must be positive on the sampled range")
    d1 = (phi(s + h) - phi(s - h)) / (2.0 * h)
    d2_ = (phi(s + h) - 2.0 * v + phi(s - h)) / h**2
    tol = 1e-8 * max(1.0, np.abs(v).max())
    if np.any(sigma * d1 > tol):
        return False
    expr = np.sign(p * (p + 1.0)) * ((1.0 - p) / p * d1**2 + d2_ * v)
    return bool(np.all(expr >= -tol))
