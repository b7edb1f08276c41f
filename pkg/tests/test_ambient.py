"""Spaceform table, curvature form, and the umbilic-slice oracles."""

import numpy as np
import pytest

from harnackflow.ambient import AmbientSpec, lambda_form, minkowski_dot, umbilic_slice


def test_spaceform_table():
    assert AmbientSpec("euclidean", 2).sigma == 1
    assert AmbientSpec("euclidean", 2).K_N == 0.0
    assert AmbientSpec("minkowski", 2).sigma == -1
    assert AmbientSpec("minkowski", 2).K_N == 0.0
    assert AmbientSpec("sphere", 2).K_N == 1.0
    assert AmbientSpec("hyperbolic", 2).K_N == -1.0
    d = AmbientSpec("DeSitter", 3)
    assert d.sigma == -1 and d.K_N == 1.0
    with pytest.raises(ValueError):
        AmbientSpec("anti-desitter", 2)
    with pytest.raises(ValueError):
        AmbientSpec("sphere", 0)
    assert AmbientSpec("euclidean", 1).smoke_dimension
    assert not AmbientSpec("euclidean", 2).smoke_dimension


def test_lambda_form():
    g = np.eye(2)
    assert np.allclose(lambda_form(AmbientSpec("euclidean", 2), 5.0, g), 0.0)
    assert np.allclose(lambda_form(AmbientSpec("sphere", 2), 2.0, g), 2.0 * np.eye(2))
    assert np.allclose(lambda_form(AmbientSpec("hyperbolic", 2), 3.0, g), -3.0 * np.eye(2))


def test_umbilic_minkowski():
    kappa, radius = umbilic_slice(AmbientSpec("minkowski", 2), 2.0)
    assert kappa == pytest.approx(0.5)
    assert radius == pytest.approx(2.0)


def test_umbilic_sphere():
    kappa, radius = umbilic_slice(AmbientSpec("sphere", 2), np.pi / 4)
    assert kappa == pytest.approx(1.0)
    assert radius == pytest.approx(np.sin(np.pi / 4))


def test_umbilic_desitter_boundary():
    kappa, _ = umbilic_slice(AmbientSpec("desitter", 2), 0.0)
    assert kappa == 0.0


def test_umbilic_sphere_finite_difference_oracle():
    # embed the geodesic sphere of radius rho in S^3 c R^4 and compare the
    # umbilic curvature against a finite-difference second fundamental form
    rho = 0.7
    kappa, _ = umbilic_slice(AmbientSpec("sphere", 2), rho)

    def point(theta, phi):
        d = np.array([np.cos(theta), np.sin(theta) * np.cos(phi), np.sin(theta) * np.sin(phi)])
        return np.concatenate([[np.cos(rho)], np.sin(rho) * d])

    t0, p0 = 0.9, 0.4
    h = 1e-4
    X = point(t0, p0)
    Xt = (point(t0 + h, p0) - point(t0 - h, p0)) / (2 * h)
    Xtt = (point(t0 + h, p0) - 2 * X + point(t0 - h, p0)) / h**2
    # outward normal within S^3: orthogonal to X and the tangent plane
    d = X[1:] / np.linalg.norm(X[1:])
    nu = np.concatenate([[-np.sin(rho)], np.cos(rho) * d])
    assert abs(nu @ X) < 1e-12 and abs(nu @ Xt) < 1e-9
    h_tt = -Xtt @ nu
    g_tt = Xt @ Xt
    assert h_tt / g_tt == pytest.approx(kappa, rel=1e-6)


def test_umbilic_desitter_hyperboloid_model():
    # slice z0 = c of <z,z> = 1: spatial sphere of radius sqrt(1+c^2);
    # future-normal curvature c/sqrt(1+c^2)
    c = 1.0
    kappa, radius = umbilic_slice(AmbientSpec("desitter", 2), c)
    assert kappa == pytest.approx(1.0 / np.sqrt(2.0))
    assert radius == pytest.approx(np.sqrt(2.0))
    tau = np.arcsinh(c)

    def point(theta):
        return np.array(
            [np.sinh(tau), np.cosh(tau) * np.cos(theta), np.cosh(tau) * np.sin(theta), 0.0]
        )

    t0, h = 0.3, 1e-4
    X = point(t0)
    Xt = (point(t0 + h) - point(t0 - h)) / (2 * h)
    Xtt = (point(t0 + h) - 2 * X + point(t0 - h)) / h**2
    d = X[1:] / np.sqrt(X[1:] @ X[1:])
    nu = np.concatenate([[np.cosh(tau)], np.sinh(tau) * d])  # future directed
    assert abs(minkowski_dot(nu, nu) + 1.0) < 1e-12
    assert abs(minkowski_dot(nu, X)) < 1e-12
    h_tt = -minkowski_dot(Xtt, nu)
    g_tt = minkowski_dot(Xt, Xt)
    assert h_tt / g_tt == pytest.approx(kappa, rel=1e-6)


def test_desitter_curvatures_in_unit_interval():
    amb = AmbientSpec("desitter", 2)
    for c in np.linspace(0.01, 50.0, 200):
        kappa, _ = umbilic_slice(amb, c)
        assert 0.0 < kappa < 1.0


def test_hyperbolic_horoconvex():
    amb = AmbientSpec("hyperbolic", 2)
    for rho in np.linspace(0.05, 15.0, 200):
        kappa, _ = umbilic_slice(amb, rho)
        assert kappa > 1.0


def test_umbilic_domain_errors():
    with pytest.raises(ValueError):
        umbilic_slice(AmbientSpec("sphere", 2), np.pi)
    with pytest.raises(ValueError):
        umbilic_slice(AmbientSpec("minkowski", 2), 0.0)
    with pytest.raises(ValueError):
        umbilic_slice(AmbientSpec("euclidean", 2), 1.0)
