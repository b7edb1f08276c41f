"""Experiment configuration: INI-style plain text with sections.

Grammar (configparser syntax, keys shown with defaults):

    [experiment]
    name = run              ; experiment id, used in artifact headers
    claim = ...             ; which mathematical claim the run exercises
    seed = 0
    strict_hypotheses = true

    [ambient]
    name = euclidean        ; euclidean|minkowski|sphere|hyperbolic|desitter
    n = 2

    [speed]
    base = s1               ; s1, s2, q2, det^(1/n), p2, p2^(1/2), inv(...)
    p = 1.0
    phi = const:1           ; const:c | exp:a | power:a
    psi = const:1           ; const:c | cos:a[:k]

    [initial]
    kind = round            ; round | perturbed | catalog
    catalog = euclid_round  ; catalog entry when kind = catalog
    scale = 1.0             ; radius / hyperboloid scale / profile radius
    perturbation =          ; comma list amp:mode[:sin], cosine modes in the
                            ; meridian coordinate

    [grid]
    kind = circle           ; circle | sphere | h_radial | profile
    nodes = 256
    n_phi = 1
    rho_max = 2.0

    [time]
    t0 = 0.01
    t_end = 0.2
    samples = 256
    spacing = log           ; log | linear
    dt = auto               ; auto (parabolic bound) or a number

    [monitors]
    kinds = standard        ; comma list: standard bonus pseudo p_minus_one xcf
    tolerance = 1e-3
    moser_pairs = 0
    moser_tol = 1e-6
    dual_check = false

    [output]
    trace = trace.jsonl
    report = report.json
    csv = summary.csv
    plots = true

Validation happens at parse time: unknown names, incompatible monitor/p
combinations (the standard monitor needs p != 0, -1; the pseudo monitor
needs -1 <= p < 0) are rejected with the offending section and key.
"""

from __future__ import annotations

import configparser
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .ambient import AmbientSpec
from .grids import CircleGrid, ProfileGrid, RadialHyperbolicGrid, SphereGrid
from .shape import ProfileState, SupportState
from .soliton import CATALOG_NAMES
from .symfun import CurvatureFunctionSpec, DomainError, DomainFn, ScalarFn, SymFn

__all__ = ["ConfigError", "ExperimentConfig", "load_config"]


class ConfigError(ValueError):
    """A configuration file failed validation; message carries section/key."""


@dataclass
class ExperimentConfig:
    name: str
    claim: str
    seed: int
    strict_hypotheses: bool
    ambient: AmbientSpec
    speed: CurvatureFunctionSpec
    initial_kind: str
    catalog_name: str
    scale: float
    perturbation: list[tuple[float, int, str]]
    grid_kind: str
    nodes: int
    n_phi: int
    rho_max: float
    t0: float
    t_end: float
    samples: int
    spacing: str
    dt: float | None
    monitor_kinds: list[str]
    tolerance: float
    moser_pairs: int
    moser_tol: float
    dual_check: bool
    out_trace: str
    out_report: str
    out_csv: str
    plots: bool

    # ------------------------------------------------------------------
    def build_grid(self):
        if self.grid_kind == "circle":
            return CircleGrid(self.nodes)
        if self.grid_kind == "sphere":
            return SphereGrid(self.nodes, self.n_phi)
        if self.grid_kind == "h_radial":
            return RadialHyperbolicGrid(self.nodes, self.rho_max)
        if self.grid_kind == "profile":
            return ProfileGrid(self.nodes)
        raise ConfigError(f"[grid] kind: unknown grid {self.grid_kind!r}")

    def build_initial_state(self):
        """Initial SupportState/ProfileState for PDE runs (kind != catalog)."""
        grid = self.build_grid()
        coord = {
            "circle": lambda: grid.theta,
            "sphere": lambda: grid.theta,
            "h_radial": lambda: grid.rho,
            "profile": lambda: grid.theta,
        }[self.grid_kind]()
        values = np.full(coord.shape, float(self.scale))
        for amp, mode, form in self.perturbation:
            wave = np.sin if form == "sin" else np.cos
            if self.grid_kind == "h_radial":
                values = values + amp * wave(mode * np.pi * coord / self.rho_max)
            else:
                values = values + amp * wave(mode * coord)
        if self.grid_kind == "sphere":
            values = np.repeat(values[:, None], self.n_phi, axis=1)
        if self.grid_kind == "profile":
            return ProfileState(self.ambient, grid, values, self.t0)
        return SupportState(self.ambient, grid, values, self.t0)


def _parse_perturbation(text: str) -> list[tuple[float, int, str]]:
    out = []
    text = text.strip()
    if not text:
        return out
    for item in text.split(","):
        parts = item.strip().split(":")
        if len(parts) < 2:
            raise ConfigError(f"[initial] perturbation: malformed entry {item!r}")
        amp = float(parts[0])
        mode = int(parts[1])
        form = parts[2] if len(parts) > 2 else "cos"
        if form not in ("cos", "sin"):
            raise ConfigError(f"[initial] perturbation: unknown waveform {form!r}")
        out.append((amp, mode, form))
    return out


def load_config(path) -> ExperimentConfig:
    path = Path(path)
    if not path.exists():
        raise ConfigError(f"config file not found: {path}")
    cp = configparser.ConfigParser(inline_comment_prefixes=(";", "#"))
    cp.read(path)

    def get(section, key, default=None):
        if default is None and not cp.has_option(section, key):
            raise ConfigError(f"[{section}] {key}: required key missing")
        return cp.get(section, key, fallback=default)

    try:
        ambient = AmbientSpec(get("ambient", "name"), int(get("ambient", "n")))
    except ValueError as exc:
        raise ConfigError(f"[ambient]: {exc}") from exc

    try:
        base = SymFn.parse(get("speed", "base"))
        speed = CurvatureFunctionSpec(
            base,
            float(get("speed", "p")),
            phi=ScalarFn.parse(get("speed", "phi", "const:1")),
            psi=DomainFn.parse(get("speed", "psi", "const:1")),
        )
    except DomainError as exc:
        raise ConfigError(f"[speed]: {exc}") from exc
    if not speed.phi.is_one and not ambient.flat:
        raise ConfigError("[speed] phi: support factors need a flat ambient")

    initial_kind = get("initial", "kind", "round")
    catalog_name = get("initial", "catalog", "euclid_round")
    if initial_kind == "catalog" and catalog_name not in CATALOG_NAMES:
        raise ConfigError(f"[initial] catalog: unknown entry {catalog_name!r}")
    if initial_kind not in ("round", "perturbed", "catalog"):
        raise ConfigError(f"[initial] kind: unknown kind {initial_kind!r}")

    monitor_kinds = [k.strip() for k in get("monitors", "kinds", "standard").split(",") if k.strip()]
    p = speed.p
    for kind in monitor_kinds:
        if kind == "standard" and p in (0.0, -1.0):
            raise ConfigError("[monitors] kinds: the standard monitor needs p != 0, -1")
        if kind == "pseudo" and not (-1.0 <= p < 0.0):
            raise ConfigError("[monitors] kinds: the pseudo monitor needs -1 <= p < 0")
        if kind == "p_minus_one" and p != -1.0:
            raise ConfigError("[monitors] kinds: p_minus_one needs p = -1")
        if kind == "bonus" and not (ambient.name == "sphere" and base.name == "s1" and p == 1.0):
            raise ConfigError("[monitors] kinds: bonus needs mean-curvature flow on the sphere")
        if kind == "xcf" and not (ambient.name == "minkowski" and ambient.n == 3):
            raise ConfigError("[monitors] kinds: xcf needs the n = 3 Minkowski bridge")
        if kind not in ("standard", "bonus", "pseudo", "p_minus_one", "xcf"):
            raise ConfigError(f"[monitors] kinds: unknown monitor {kind!r}")

    dt_text = get("time", "dt", "auto").strip()
    dt = None if dt_text == "auto" else float(dt_text)
    t0 = float(get("time", "t0", "0.01"))
    t_end = float(get("time", "t_end", "0.2"))
    if t0 <= 0.0:
        raise ConfigError("[time] t0: Harnack runs need t0 > 0")
    if t_end <= t0:
        raise ConfigError("[time] t_end: must exceed t0")
    spacing = get("time", "spacing", "log")
    if spacing not in ("log", "linear"):
        raise ConfigError(f"[time] spacing: unknown spacing {spacing!r}")

    grid_kind = get("grid", "kind")
    expected_grid = {
        ("euclidean", 1): "circle",
        ("euclidean", 2): "sphere",
        ("minkowski",): "h_radial",
        ("sphere",): "profile",
        ("hyperbolic",): "profile",
        ("desitter",): "profile",
    }
    key = (ambient.name, ambient.n) if ambient.name == "euclidean" else (ambient.name,)
    if initial_kind != "catalog" and expected_grid.get(key) != grid_kind:
        raise ConfigError(
            f"[grid] kind: {grid_kind!r} does not sample the Gauss-map domain of "
            f"{ambient.name} n={ambient.n}"
        )

    return ExperimentConfig(
        name=get("experiment", "name", path.stem),
        claim=get("experiment", "claim", ""),
        seed=int(get("experiment", "seed", "0")),
        strict_hypotheses=get("experiment", "strict_hypotheses", "true").lower() == "true",
        ambient=ambient,
        speed=speed,
        initial_kind=initial_kind,
        catalog_name=catalog_name,
        scale=float(get("initial", "scale", "1.0")),
        perturbation=_parse_perturbation(get("initial", "perturbation", "")),
        grid_kind=grid_kind,
        nodes=int(get("grid", "nodes", "256")),
        n_phi=int(get("grid", "n_phi", "1")),
        rho_max=float(get("grid", "rho_max", "2.0")),
        t0=t0,
        t_end=t_end,
        samples=int(get("time", "samples", "256")),
        spacing=spacing,
        dt=dt,
        monitor_kinds=monitor_kinds,
        tolerance=float(get("monitors", "tolerance", "1e-3")),
        moser_pairs=int(get("monitors", "moser_pairs", "0")),
        moser_tol=float(get("monitors", "moser_tol", "1e-6")),
        dual_check=get("monitors", "dual_check", "false").lower() == "true",
        out_trace=get("output", "trace", "trace.jsonl"),
        out_report=get("output", "report", "report.json"),
        out_csv=get("output", "csv", "summary.csv"),
        plots=get("output", "plots", "true").lower() == "true",
    )
