"""Polar duality: reciprocal curvatures, involution, polar-set gap, dual
speeds, dual-flow commutation, and the pseudo/de Sitter pairing."""

import numpy as np
import pytest

from harnackflow.ambient import AmbientSpec
from harnackflow.duality import (
    dual_flow_commutes,
    dual_profile_state,
    dual_speed,
    embedded_from_profile,
    gauss_hyperbolic,
    polar_dual,
    polar_set_gap,
    polar_sphere,
)
from harnackflow.flow import FlowSpec, integrate
from harnackflow.grids import ProfileGrid
from harnackflow.harnack import pseudo_lhs, standard_lhs
from harnackflow.shape import ProfileState, curvature_from_profile
from harnackflow.soliton import exact_trace
from harnackflow.symfun import CurvatureFunctionSpec, DomainError, SymFn

SPHERE = AmbientSpec("sphere", 2)
HYPER = AmbientSpec("hyperbolic", 2)
MEAN = SymFn.mean()


def umbilic_sample(ambient, value, m=48):
    return embedded_from_profile(ProfileState(ambient, ProfileGrid(m), np.full(m, value), 0.0))


def test_sphere_polar_geodesic_spheres():
    sm = umbilic_sample(SPHERE, 0.6)
    d = polar_sphere(sm)
    d.validate()
    assert np.allclose(sm.kappa * d.kappa, 1.0, atol=1e-12)
    rebuilt = dual_profile_state(sm)
    assert np.allclose(rebuilt.rho, np.pi / 2 - 0.6, atol=1e-12)
    # independent curvature of the rebuilt dual graph
    fd = curvature_from_profile(rebuilt)
    assert np.allclose(fd.kappa, np.tan(0.6), atol=1e-9)


def test_self_dual_radius():
    sm = umbilic_sample(SPHERE, np.pi / 4)
    rebuilt = dual_profile_state(sm)
    assert np.allclose(rebuilt.rho, np.pi / 4, atol=1e-12)
    fd = curvature_from_profile(rebuilt)
    assert np.allclose(fd.kappa, 1.0, atol=1e-9)


def test_double_polar_is_identity():
    for amb, val in ((SPHERE, 0.7), (HYPER, 1.2)):
        sm = umbilic_sample(amb, val)
        dd = polar_dual(polar_dual(sm))
        assert np.abs(dd.x - sm.x).max() < 1e-10
        assert np.abs(dd.nu_tilde - sm.nu_tilde).max() < 1e-10
        assert np.allclose(dd.kappa, sm.kappa, atol=1e-12)
        assert dd.ambient == sm.ambient


def test_hyperbolic_dual_is_future_desitter():
    sm = umbilic_sample(HYPER, 1.0)
    d = gauss_hyperbolic(sm)
    d.validate()
    assert d.ambient.name == "desitter"
    assert np.all(d.x[:, 0] > 0.0)  # future of the z0 = 0 slice
    assert np.allclose(sm.kappa * d.kappa, 1.0, atol=1e-12)
    # horoconvex source => dual admissible for the de Sitter gate
    assert np.all(sm.kappa > 1.0) and np.all(d.kappa < 1.0)
    rebuilt = dual_profile_state(sm)
    fd = curvature_from_profile(rebuilt)
    assert np.allclose(fd.kappa, np.tanh(1.0), atol=1e-9)


def test_desitter_round_trip_recovers_hyperbolic():
    sm = umbilic_sample(HYPER, 1.3)
    d = gauss_hyperbolic(sm)
    back = dual_profile_state(d)
    assert back.ambient.name == "hyperbolic"
    assert np.allclose(back.rho, 1.3, atol=1e-10)


def test_second_fundamental_forms_agree():
    # <d nu, dx> = h for the primal sample (shared second fundamental form)
    g = ProfileGrid(96)
    st = ProfileState(SPHERE, g, 0.7 + 0.05 * np.cos(g.theta), 0.0)
    field = curvature_from_profile(st)
    dnu = np.stack([g.d1(field.nu[:, c]) for c in range(field.nu.shape[1])], axis=-1)
    h_from_pairing = np.sum(dnu * field.tangents[:, 0, :], axis=-1)
    # pole rows excluded: the orbit component of nu is odd through the pole
    inner = slice(1, -1)
    assert np.allclose(h_from_pairing[inner], field.h[inner, 0, 0], rtol=5e-4, atol=5e-4)


def test_polar_set_characterization():
    for amb, val in ((SPHERE, 0.5), (HYPER, 0.9)):
        sm = umbilic_sample(amb, val)
        d = polar_dual(sm)
        out = polar_set_gap(sm, d, pairs=20)
        assert out["gap"] < 1e-12
        assert out["strictly_below"]


def test_polar_set_gap_nonumbilic_converges():
    gaps, contacts = [], []
    for m in (64, 256):
        g = ProfileGrid(m)
        st = ProfileState(SPHERE, g, 0.7 + 0.08 * np.cos(g.theta), 0.0)
        sm = embedded_from_profile(st)
        out = polar_set_gap(sm, polar_dual(sm), pairs=32, seed=3)
        gaps.append(out["gap"])
        contacts.append(out["contact"])
        assert out["strictly_below"]
    assert max(gaps) < 1e-12  # sup attained at the touching node
    assert contacts[1] < contacts[0] / 8.0  # second-order contact


def test_dual_curvature_validated_both_ways():
    # reciprocal kappa vs finite differences of the rebuilt dual graph
    errs = []
    for m in (64, 128, 256):
        g = ProfileGrid(m)
        st = ProfileState(SPHERE, g, 0.7 + 0.08 * np.cos(g.theta), 0.0)
        sm = embedded_from_profile(st)
        rebuilt = dual_profile_state(sm, grid=ProfileGrid(m))
        fd = curvature_from_profile(rebuilt)
        from harnackflow.duality import _dual_polar_coordinates

        thd, _ = _dual_polar_coordinates(sm)
        order = np.argsort(thd)
        recip = np.sort(1.0 / sm.kappa, axis=1)
        k_lo = np.interp(rebuilt.grid.theta, thd[order], recip[order][:, 0])
        k_hi = np.interp(rebuilt.grid.theta, thd[order], recip[order][:, 1])
        got = np.sort(fd.kappa, axis=1)
        errs.append(max(np.abs(got[:, 0] - k_lo).max(), np.abs(got[:, 1] - k_hi).max()))
    assert np.log2(errs[0] / errs[2]) / 2.0 >= 0.9  # ~second order overall


def test_dual_speed_correspondence():
    rng = np.random.default_rng(7)
    for base, p in ((MEAN, 1.0), (SymFn.quotient(2), 0.5), (SymFn.gauss_root(), -0.5)):
        spec = CurvatureFunctionSpec(base, p)
        dspec = dual_speed(spec)
        assert dspec.p == -p
        # f_dual(W~) = -f(W) with W~ = W^{-1}
        for _ in range(20):
            kappa = rng.uniform(0.3, 3.0, size=3)
            assert dspec.value(1.0 / kappa) == pytest.approx(-spec.value(kappa), rel=1e-12)


def test_dual_speed_involution_and_gauss_root_self_pairing():
    spec = CurvatureFunctionSpec(SymFn.quotient(2), 1.5)
    assert dual_speed(dual_speed(spec)) == spec
    g = CurvatureFunctionSpec(SymFn.gauss_root(), 2.0)
    dg = dual_speed(g)
    assert dg.base == SymFn.gauss_root()  # self-inverse base
    assert dg.p == -2.0


def test_dual_speed_rejects_anisotropy():
    from harnackflow.symfun import DomainFn, ScalarFn

    with pytest.raises(DomainError):
        dual_speed(CurvatureFunctionSpec(MEAN, 1.0, psi=DomainFn("cos", 0.1)))
    with pytest.raises(DomainError):
        dual_speed(CurvatureFunctionSpec(MEAN, 1.0, phi=ScalarFn("exp", -1.0)))


def test_dual_flow_commutes_sphere_mcf():
    st0 = ProfileState(SPHERE, ProfileGrid(24), np.full(24, np.pi / 4), 0.01)
    out = dual_flow_commutes(st0, CurvatureFunctionSpec(MEAN, 1.0), 0.06, samples=10)
    assert out["residual"] < 1e-6
    assert out["compared_records"] == 10


def test_dual_flow_commutes_horoconvex_expander():
    # horoconvex spheres under f = -F^{-1/2} vs the de Sitter dual flow
    st0 = ProfileState(HYPER, ProfileGrid(24), np.full(24, 1.0), 0.01)
    out = dual_flow_commutes(st0, CurvatureFunctionSpec(MEAN, -0.5), 0.2, samples=10)
    assert out["residual"] < 1e-6


def test_dual_flow_zero_time():
    st0 = ProfileState(SPHERE, ProfileGrid(24), np.full(24, 0.8), 0.01)
    out = dual_flow_commutes(st0, CurvatureFunctionSpec(MEAN, 1.0), 0.0100001, samples=2)
    assert out["residual"] < 1e-10


def test_pseudo_equals_dual_desitter_standard():
    # the proof mechanism of the pseudo inequality: the hyperbolic pseudo
    # monitor equals the standard monitor of the dual de Sitter flow
    p = -0.5
    speed = CurvatureFunctionSpec(MEAN, p)
    primal = exact_trace(
        "hyperbolic_geodesic", speed, n=2, t0=0.05, t_end=0.8, samples=400, initial=1.0
    )
    # dual de Sitter trace evolved independently with the dual speed
    dual0 = dual_profile_state(
        embedded_from_profile(primal.records[0].state), grid=ProfileGrid(16), t=0.05
    )
    dspec = FlowSpec(dual0.ambient, dual_speed(speed), t0=0.05)
    dual = integrate(dspec, dual0, 0.8, samples=400, spacing="log")
    assert dual.size == primal.size

    lhs_primal = pseudo_lhs(primal, p)
    lhs_dual = standard_lhs(dual, -p)
    interior = slice(3, -3)
    scale = np.abs(lhs_primal).max()
    assert np.abs(lhs_primal[interior, 0] - lhs_dual[interior, 0]).max() < 1e-6 * max(scale, 1.0)
