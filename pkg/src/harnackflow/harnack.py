"""Harnack-type monitors along flow traces.

All quantities are evaluated in the static-normal parameterization, where
the time derivative of the speed already absorbs the classical gradient
term: the standard monitor is

    LHS = d/dt f + (p / ((p+1) t)) f        (>= 0 expected for p > -1,
                                             <= 0 for p < -1)

with d/dt f taken by centered finite-difference stencils on the trace
sampling stride.  The bonus monitor replaces the coefficient by the
Einstein correction (beta = n K_N on the round sphere), the pseudo monitor
drops the gradient term by construction and uses p/((p-1)t), and the
p = -1 clauses are monitored through monotonicity of the spatial extrema
of u = d/dt ln|f|.

Reports carry per-record hypothesis flags (convexity, the de Sitter
0 < kappa <= 1 gate, horoconvexity) and cover only records where the flags
pass; violations beyond tolerance are reported, never asserted as
disproofs.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .flow import FlowTrace, u_matrix
from .numerics import series_derivative

__all__ = [
    "HarnackSpec",
    "HarnackReport",
    "standard_lhs",
    "bonus_lhs",
    "pseudo_lhs",
    "xcf_lhs",
    "p_minus_one_monotonicity",
    "report",
]

KINDS = ("standard", "bonus", "pseudo", "p_minus_one", "xcf")

# slack on the de Sitter kappa <= 1 and horoconvex kappa > 1 gates
FLAG_TOL = 1e-12


@dataclass(frozen=True)
class HarnackSpec:
    kind: str
    p: float = 1.0
    beta: float = 0.0  # bonus coefficient; derived from the ambient below

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown Harnack kind {self.kind!r}")
        if self.kind == "standard" and self.p in (0.0, -1.0):
            raise ValueError("standard monitor needs p != 0, -1")
        if self.kind == "pseudo" and not (-1.0 <= self.p < 0.0):
            raise ValueError("pseudo monitor needs -1 <= p < 0")
        if self.kind == "p_minus_one" and self.p != -1.0:
            raise ValueError("p_minus_one monitor needs p = -1")
        if self.kind == "xcf" and self.p != 3.0:
            raise ValueError("xcf monitor is the p = 3 Gauss-curvature monitor")


def _dfdt(trace: FlowTrace) -> np.ndarray:
    return series_derivative(trace.f_matrix, trace.times)


def standard_lhs(trace: FlowTrace, p: float) -> np.ndarray:
    """d/dt f + (p/((p+1) t)) f per (record, node)."""
    if p in (0.0, -1.0):
        raise ValueError("standard monitor needs p != 0, -1")
    t = trace.times
    if np.any(t <= 0.0):
        raise ValueError("Harnack monitors need t > 0")
    F = trace.f_matrix
    return _dfdt(trace) + (p / ((p + 1.0) * t))[:, None] * F


def bonus_lhs(trace: FlowTrace) -> np.ndarray:
    """Mean-curvature-flow monitor with the Einstein bonus term:
    d/dt H - beta H + H/(2t), beta = scalar curvature / (n+1)."""
    amb = trace.spec.ambient
    speed = trace.spec.speed
    if amb.name != "sphere":
        raise ValueError("bonus monitor implemented on the round sphere")
    if not (speed.base.name == "s1" and speed.p == 1.0 and speed.phi.is_one):
        raise ValueError("bonus monitor needs mean-curvature speed")
    beta = amb.scalar_curvature / (amb.n + 1.0)  # = n K_N
    t = trace.times
    H = trace.f_matrix  # f = H for this speed
    return _dfdt(trace) + (-beta + 1.0 / (2.0 * t))[:, None] * H


def pseudo_lhs(trace: FlowTrace, p: float) -> np.ndarray:
    """Expanding-flow monitor d/dt F^p + (p/((p-1) t)) F^p for f = -F^p,
    -1 <= p < 0; no gradient term by construction."""
    if not (-1.0 <= p < 0.0):
        raise ValueError("pseudo monitor needs -1 <= p < 0")
    F = trace.f_matrix
    if np.any(F >= 0.0):
        raise ValueError("pseudo monitor expects a negative speed f = -F^p")
    Fp = -F
    t = trace.times
    return series_derivative(Fp, trace.times) + (p / ((p - 1.0) * t))[:, None] * Fp


def xcf_lhs(trace: FlowTrace) -> np.ndarray:
    """Cross-curvature monitor d/dt sqrt(det E) + (3/(4t)) sqrt(det E); on a
    Gauss-curvature-flow trace sqrt(det E) = K = f."""
    if trace.spec.ambient.n != 3 or trace.spec.ambient.name != "minkowski":
        raise ValueError("xcf monitor runs on Gauss curvature flow in R^{3,1}")
    return standard_lhs(trace, 3.0)


def p_minus_one_monotonicity(
    trace: FlowTrace, tol_per_unit_time: float = 1e-3
) -> dict:
    """Time series of spatial inf/sup of u for p = -1 runs, with
    monotonicity verdicts (inf nondecreasing for inverse-concave F, sup
    nonincreasing for inverse-convex F) at the given tolerance."""
    speed = trace.spec.speed
    if speed.p != -1.0 or not speed.phi.is_one:
        raise ValueError("p = -1 monotonicity needs speed -F^{-1} with phi = 1")
    if trace.spec.ambient.K_N != 0.0:
        raise ValueError("p = -1 clauses are flat-ambient statements")
    U = u_matrix(trace)
    mask = trace.interior
    inf_u = U[:, mask].min(axis=1)
    sup_u = U[:, mask].max(axis=1)
    t = trace.times
    dt = np.diff(t)
    inf_drops = np.diff(inf_u) / dt
    sup_rises = np.diff(sup_u) / dt
    return {
        "t": t,
        "inf_u": inf_u,
        "sup_u": sup_u,
        "inf_nondecreasing": bool(np.all(inf_drops >= -tol_per_unit_time)),
        "sup_nonincreasing": bool(np.all(sup_rises <= tol_per_unit_time)),
        "worst_inf_drop": float(inf_drops.min()) if inf_drops.size else 0.0,
        "worst_sup_rise": float(sup_rises.max()) if sup_rises.size else 0.0,
    }


# ---------------------------------------------------------------------------
# aggregation
# ---------------------------------------------------------------------------


@dataclass
class HarnackReport:
    kind: str
    p: float
    beta: float
    expected_sign: int  # +1: lhs >= 0 expected; -1: lhs <= 0
    times: np.ndarray
    min_lhs: float
    argmin: tuple[int, int]  # (record index, node index)
    min_per_record: np.ndarray
    argmin_node_per_record: np.ndarray
    hypothesis_ok: np.ndarray  # per record
    admissible_records: int
    equality_gap: float  # max |lhs| over the admissible region
    status: str = "ok"
    tolerance: Optional[float] = None
    notes: list[str] = field(default_factory=list)

    @property
    def passes(self) -> bool:
        if self.status != "ok":
            return False
        tol = self.tolerance if self.tolerance is not None else 0.0
        return self.min_lhs >= -tol

    def to_json_dict(self) -> dict:
        return {
            "kind": self.kind,
            "p": self.p,
            "beta": self.beta,
            "expected_sign": self.expected_sign,
            "status": self.status,
            "min_lhs": self.min_lhs,
            "argmin_record": self.argmin[0],
            "argmin_node": self.argmin[1],
            "equality_gap": self.equality_gap,
            "admissible_records": self.admissible_records,
            "records": len(self.times),
            "tolerance": self.tolerance,
            "passes": self.passes,
            "notes": self.notes,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_json_dict(), indent=2)

    def csv_rows(self):
        """(t, min_lhs, argmin node) per admissible record."""
        for i, t in enumerate(self.times):
            if self.hypothesis_ok[i]:
                yield t, self.min_per_record[i], int(self.argmin_node_per_record[i])


def _flags(spec: HarnackSpec, trace: FlowTrace) -> tuple[np.ndarray, list[str]]:
    amb = trace.spec.ambient
    notes = []
    ok = np.ones(trace.size, dtype=bool)
    for i, rec in enumerate(trace.records):
        k = rec.curv.kappa
        if not np.all(k > 0.0):
            ok[i] = False
    if amb.name == "desitter":
        for i, rec in enumerate(trace.records):
            if not np.all(rec.curv.kappa <= 1.0 + FLAG_TOL):
                ok[i] = False
        notes.append("de Sitter admissibility gate 0 < kappa <= 1 enforced per record")
    if spec.kind == "pseudo" and amb.name == "hyperbolic":
        for i, rec in enumerate(trace.records):
            if not np.all(rec.curv.kappa > 1.0 - FLAG_TOL):
                ok[i] = False
        notes.append("horoconvexity gate kappa > 1 enforced per record")
    if amb.smoke_dimension:
        notes.append("n = 1 run: below theorem-level dimension (smoke)")
    if trace.termination != "completed":
        notes.append(f"trace terminated early: {trace.termination}; valid prefix reported")
    return ok, notes


def report(spec: HarnackSpec, trace: FlowTrace, tolerance: Optional[float] = None) -> HarnackReport:
    """Aggregate the chosen monitor over the trace: min and argmin over the
    admissible space-time region, per-record minima, hypothesis flags."""
    if spec.kind == "standard":
        lhs = standard_lhs(trace, spec.p)
        expected = 1 if spec.p > -1.0 else -1
        beta = 0.0
    elif spec.kind == "bonus":
        lhs = bonus_lhs(trace)
        expected = 1
        beta = trace.spec.ambient.scalar_curvature / (trace.spec.ambient.n + 1.0)
    elif spec.kind == "pseudo":
        lhs = pseudo_lhs(trace, spec.p)
        expected = 1
        beta = 0.0
    elif spec.kind == "xcf":
        lhs = xcf_lhs(trace)
        expected = 1
        beta = 0.0
    else:
        raise ValueError("p_minus_one runs report through p_minus_one_monotonicity")

    ok, notes = _flags(spec, trace)
    mask = trace.interior
    signed = expected * lhs[:, mask]

    idx = np.where(ok)[0]
    if idx.size == 0:
        return HarnackReport(
            kind=spec.kind,
            p=spec.p,
            beta=beta,
            expected_sign=expected,
            times=trace.times,
            min_lhs=np.nan,
            argmin=(-1, -1),
            min_per_record=np.full(trace.size, np.nan),
            argmin_node_per_record=np.full(trace.size, -1),
            hypothesis_ok=ok,
            admissible_records=0,
            equality_gap=np.nan,
            status="no_admissible_samples",
            tolerance=tolerance,
            notes=notes,
        )

    node_ids = np.where(mask)[0]
    min_per_record = np.full(trace.size, np.nan)
    argmin_node = np.full(trace.size, -1, dtype=int)
    for i in idx:
        j = int(np.argmin(signed[i]))
        min_per_record[i] = signed[i, j]
        argmin_node[i] = node_ids[j]
    i_best = idx[int(np.nanargmin(min_per_record[idx]))]
    gap = float(np.abs(lhs[idx][:, mask]).max())

    return HarnackReport(
        kind=spec.kind,
        p=spec.p,
        beta=beta,
        expected_sign=expected,
        times=trace.times,
        min_lhs=float(min_per_record[i_best]),
        argmin=(int(i_best), int(argmin_node[i_best])),
        min_per_record=min_per_record,
        argmin_node_per_record=argmin_node,
        hypothesis_ok=ok,
        admissible_records=int(idx.size),
        equality_gap=gap,
        status="ok",
        tolerance=tolerance,
        notes=notes,
    )
