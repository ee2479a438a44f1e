import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mjs.catalog import (
    CatalogSpec,
    FourierCurve,
    balance_densities,
    bent_helicoid_normal,
    bjorling_extend,
    circle_curve,
    make_catenoid_band,
    make_flat_y,
    make_y_catenoid,
    y_catenoid_parameters,
)
from mjs.errors import InvalidAngles, NotOrthonormal
from mjs.geometry import integrate_patch, sample_patch, shape_quantities
from mjs.junction import conormal, minimality_residual

SQ3 = np.sqrt(3.0)


def test_flat_y_equal_angles_balanced(flat_y):
    rep = minimality_residual(flat_y)
    assert rep.max_conormal_sum <= 1e-12
    assert max(rep.max_H) <= 1e-10


def test_flat_y_two_sheets_is_a_plane():
    M = make_flat_y(q=2, angles=[0.0, np.pi])
    t = np.linspace(-0.5, 0.5, 5)
    t0, t1 = conormal(M, 0, t), conormal(M, 1, t)
    np.testing.assert_allclose(t0 + t1, 0, atol=1e-15)
    assert minimality_residual(M).is_minimal(1e-12)


@pytest.mark.parametrize("angles", [[0.0, 0.0, np.pi], [0.0, 2 * np.pi, 1.0]])
def test_flat_y_invalid_angles(angles):
    with pytest.raises(InvalidAngles):
        make_flat_y(q=3, angles=angles)


def test_catenoid_band_waist_radius():
    band = make_catenoid_band(1.0, (0.0, 1.0))
    u = np.linspace(0, 2 * np.pi, 9)
    X = band.immersion(u, np.zeros_like(u))
    np.testing.assert_allclose(np.hypot(X[:, 0], X[:, 1]), 1.0, rtol=1e-15)


def test_catenoid_band_minimal_on_grid():
    s = sample_patch(make_catenoid_band(1.0, (0.0, 1.0)), (32, 32))
    assert np.max(np.linalg.norm(s.shape.H, axis=-1)) <= 1e-10


def test_y_catenoid_parameters():
    c, b, s0 = y_catenoid_parameters(1.0)
    assert np.isclose(s0, np.arcsinh(1 / SQ3), rtol=1e-14)
    assert np.isclose(c, SQ3 / 2, rtol=1e-14)
    assert np.isclose(b, -(SQ3 / 2) * np.arcsinh(1 / SQ3), rtol=1e-14)


def test_y_catenoid_edges_on_circle(ycat):
    t = np.linspace(0, 2 * np.pi, 33)
    for i in range(3):
        u, v = ycat.edge_params(i, t)
        X = ycat.sheets[i].immersion(u, v)
        np.testing.assert_allclose(X, ycat.curve.point(t), atol=1e-12)


def test_y_catenoid_directions_into_sheets(ycat):
    # -tau_i are (-e_r), (e_r/2 +- sqrt3/2 e_z); coplanar with (e_r, e_z) and summing to zero
    t = np.linspace(0, 2 * np.pi, 17, endpoint=False)
    er = np.stack([np.cos(t), np.sin(t), 0 * t], -1)
    ez = np.array([0.0, 0.0, 1.0])
    into = [-conormal(ycat, i, t) for i in range(3)]
    np.testing.assert_allclose(into[0], -er, atol=1e-12)
    np.testing.assert_allclose(into[1], er / 2 + SQ3 / 2 * ez, atol=1e-12)
    np.testing.assert_allclose(into[2], er / 2 - SQ3 / 2 * ez, atol=1e-12)
    assert np.max(np.abs(sum(into))) <= 1e-10


def test_y_catenoid_disc_flat(ycat):
    s = sample_patch(ycat.sheets[0], (16, 16))
    assert np.all(s.shape.normA2 == 0)


def test_y_catenoid_annulus_variant():
    M = make_y_catenoid(kind="annulus")
    assert minimality_residual(M).max_conormal_sum <= 1e-8


def test_scaling_equivariance():
    s = 2.5
    a, b = make_y_catenoid(1.0), make_y_catenoid(s)
    ka = shape_quantities(a.sheets[1], 0.3, 1.0).normA
    kb = shape_quantities(b.sheets[1], 0.3, 1.0).normA
    assert np.isclose(kb, ka / s, rtol=1e-12)
    area = lambda p: integrate_patch(p, lambda u, v: np.ones_like(u))
    assert np.isclose(area(b.sheets[1]), s * s * area(a.sheets[1]), rtol=1e-12)


def test_bjorling_radial_normal_interpolates_circle():
    # radial normal: nu . gamma' = 0, the output is the flat annulus through the circle
    gamma = circle_curve()
    radial = FourierCurve.from_real({1: np.array([1.0, -1j, 0.0])})
    P = bjorling_extend(gamma, radial, (-0.2, 0.2))
    u = np.linspace(0, 2 * np.pi, 50)
    np.testing.assert_allclose(P.immersion(u, 0 * u), gamma.real(u), atol=1e-12)


@pytest.mark.parametrize("kappa", [1.0, 2.0])
def test_bjorling_bent_helicoid_minimal(kappa):
    P = bjorling_extend(circle_curve(), bent_helicoid_normal(kappa), (0.0, 0.3))
    s = sample_patch(P, (24, 16))
    assert np.max(np.linalg.norm(s.shape.H, axis=-1)) <= 1e-6
    u = np.linspace(0, 2 * np.pi, 7)
    nu = shape_quantities(P, u, 0 * u).normal
    np.testing.assert_allclose(np.abs(np.einsum("ni,ni->n", nu, bent_helicoid_normal(kappa).real(u))), 1, atol=1e-12)


def test_bjorling_rejects_non_unit_normal():
    with pytest.raises(NotOrthonormal):
        bjorling_extend(circle_curve(), bent_helicoid_normal(1.0) * 1.1)


def test_bent_helicoid_sheets(helicoid):
    u = np.linspace(0, 2 * np.pi, 64)
    for P in helicoid.sheets:
        np.testing.assert_allclose(P.immersion(u, 0 * u), circle_curve().real(u), atol=1e-12)
    rep = minimality_residual(helicoid)
    assert max(rep.max_H) <= 1e-6
    assert rep.max_conormal_sum <= 1e-6
    np.testing.assert_allclose(rep.pairwise_angle_mean[0][1], 2 * np.pi / 3, atol=1e-6)


def test_bent_helicoid_odd_n_rejected():
    from mjs.catalog import make_y_bent_helicoid
    with pytest.raises(ValueError):
        make_y_bent_helicoid(n=3)


@settings(max_examples=30, deadline=None)
@given(st.lists(st.floats(0, 2 * np.pi), min_size=3, max_size=3))
def test_balance_densities(phases):
    try:
        th = balance_densities(phases)
    except InvalidAngles:
        return
    d = np.stack([np.cos(phases), np.sin(phases)], -1)
    assert np.all(th > 0)
    np.testing.assert_allclose(th @ d, 0, atol=1e-9)


@settings(max_examples=20, deadline=None)
@given(st.integers(1, 6), st.floats(0, 2 * np.pi))
def test_fourier_antiderivative(k, w):
    f = FourierCurve.from_real({k: np.array([1.0, 0.5j, 0.2])})
    h = 1e-6
    dF = (f.antiderivative_value(w + h) - f.antiderivative_value(w - h)) / (2 * h)
    np.testing.assert_allclose(dF, f(w), atol=1e-6)


@pytest.mark.parametrize("kind,params,q", [
    ("plane_sector", {"radius": 2.0}, 1),
    ("catenoid_band", {"c": 1.0, "V": 1.0}, 1),
    ("flat_y", {"q": 4}, 4),
    ("y_catenoid", {"rho0": 1.0}, 3),
    ("bjorling", {"n": 2, "v_max": 0.2}, 3),
])
def test_catalog_spec(kind, params, q):
    M = CatalogSpec(kind, params).build()
    assert M.q == q


def test_catalog_spec_unknown_kind():
    with pytest.raises(ValueError):
        CatalogSpec("torus")
