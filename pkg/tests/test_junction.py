import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mjs.catalog import make_catenoid_band, make_flat_y, make_ruled_junction, make_y_catenoid
from mjs.geometry import ParametricPatch
from mjs.junction import (
    Identification,
    JunctionCurve,
    MultiJunctionSurface,
    conormal,
    distance_to_gamma,
    edge_frame,
    equilibrium_angles_check,
    export_gamma_csv,
    gamma_curvature,
    minimality_residual,
)

SQ3 = np.sqrt(3.0)


def test_flat_y_conormals_point_away(flat_y):
    t = np.linspace(-0.9, 0.9, 7)
    for i, a in enumerate(flat_y.metadata["angles"]):
        d = np.array([np.cos(a), np.sin(a), 0.0])
        np.testing.assert_allclose(conormal(flat_y, i, t), np.broadcast_to(-d, (7, 3)), atol=1e-15)


def test_y_catenoid_disc_and_up_conormals(ycat):
    # oracle: finite-difference tangent of the sheet at its edge
    t = np.array([0.0, 1.3, 4.0])
    for i in (0, 1):
        patch = ycat.sheets[i]
        u, v = ycat.edge_params(i, t)
        h = 1e-6
        sgn = patch.inward_sign(patch.junction_edge)
        d = (patch.immersion(u, v + sgn * h) - patch.immersion(u, v)) / h
        d /= np.linalg.norm(d, axis=-1, keepdims=True)
        np.testing.assert_allclose(conormal(ycat, i, t), -d, atol=1e-5)
    er = np.stack([np.cos(t), np.sin(t), 0 * t], -1)
    np.testing.assert_allclose(conormal(ycat, 0, t), er, atol=1e-12)
    np.testing.assert_allclose(conormal(ycat, 1, t), -(er / 2 + SQ3 / 2 * np.array([0, 0, 1.0])), atol=1e-12)


def test_edge_frame_orthonormal(ycat):
    t = np.linspace(0, 6, 11)
    for i in range(3):
        X, nu, tau, eta = edge_frame(ycat, i, t)
        F = np.stack([nu, tau, eta], -2)
        np.testing.assert_allclose(F @ np.swapaxes(F, -1, -2), np.broadcast_to(np.eye(3), F.shape), atol=1e-12)
        # coherent orientation nu = eta x tau
        np.testing.assert_allclose(nu, np.cross(eta, tau), atol=1e-12)


def test_minimality_flags_unbalanced_densities():
    M = make_flat_y(densities=[1.0, 1.0, 2.0])
    rep = minimality_residual(M)
    assert np.isclose(rep.max_conormal_sum, 1.0, atol=1e-14)
    assert not rep.is_minimal(1e-6)


def test_y_catenoid_is_minimal(ycat):
    rep = minimality_residual(ycat, (32, 32), 256)
    assert rep.max_conormal_sum <= 1e-8 and max(rep.max_H) <= 1e-10
    d = rep.to_dict()
    assert all(np.isfinite(x) and x >= 0 for x in d["max_H"])


def test_weighted_gamma_curvature_sum(ycat):
    t, _ = ycat.curve.samples(64)
    Hg = gamma_curvature(ycat, t)
    s = sum(th * np.einsum("ni,ni->n", Hg, conormal(ycat, i, t)) for i, th in enumerate(ycat.densities))
    assert np.max(np.abs(s)) <= 1e-8
    vals = [np.einsum("ni,ni->n", Hg, conormal(ycat, i, t)) for i in range(3)]
    np.testing.assert_allclose(vals[0], -1, atol=1e-10)
    np.testing.assert_allclose(vals[1], 0.5, atol=1e-10)


@pytest.mark.parametrize("R", [1.0, 2.0, 0.5])
def test_circle_curvature(R):
    C = JunctionCurve.circle(R)
    t = np.linspace(0, C.length, 9)
    k = C.curvature(t)
    np.testing.assert_allclose(np.linalg.norm(k, axis=-1), 1 / R, rtol=1e-12)
    np.testing.assert_allclose(np.einsum("ni,ni->n", k, C.tangent(t)), 0, atol=1e-12)


def test_circle_curvature_fd_fallback():
    C0 = JunctionCurve.circle(2.0)
    C = JunctionCurve(C0.gamma, C0.t_range)
    t = np.array([0.5, 3.0])
    np.testing.assert_allclose(C.curvature(t), C0.curvature(t), atol=1e-8)
    np.testing.assert_allclose(np.einsum("ni,ni->n", C.curvature(t), C.tangent(t)), 0, atol=1e-8)


def test_line_curvature_zero():
    C = JunctionCurve.z_axis(1.0)
    assert np.all(C.curvature(np.array([-0.5, 0.3])) == 0)


def test_equilibrium(ycat, flat_y):
    for M in (ycat, flat_y):
        chk = equilibrium_angles_check(M)
        assert chk.is_equilibrium and chk.max_deviation <= 1e-8
        np.testing.assert_allclose(chk.angles[:, 0, 1], 2 * np.pi / 3, atol=1e-12)


def test_equilibrium_counterexample():
    M = make_ruled_junction([lambda t: 0 * t, lambda t: np.pi / 2 + 0.3 * np.sin(t)])
    chk = equilibrium_angles_check(M)
    assert not chk.is_equilibrium and chk.max_deviation > 1e-6


def test_misaligned_edge_rejected(ycat):
    C = JunctionCurve.circle(1.1)
    with pytest.raises(ValueError):
        MultiJunctionSurface(ycat.sheets, ycat.densities, C, ycat.identifications)


def test_nonpositive_density_rejected(ycat):
    with pytest.raises(ValueError):
        ycat.with_densities([1.0, 0.0, 1.0])


def test_distance_flat(flat_y):
    s = np.array([0.0, 0.3, 0.9])
    np.testing.assert_allclose(distance_to_gamma(flat_y, 1, s, 0.2 + 0 * s), s)


def test_distance_catenoid_closed_and_grid():
    band = make_catenoid_band(1.0, (0.0, 1.0))
    assert np.isclose(distance_to_gamma(band, 0, 0.3, 1.0), np.sinh(1.0), rtol=1e-14)
    g = distance_to_gamma(band, 0, 0.3, 1.0, method="grid")
    assert np.sinh(1.0) - 1e-9 <= g <= 1.02 * np.sinh(1.0)
    assert distance_to_gamma(band, 0, 0.3, 0.0, method="grid") == 0


def test_grid_distance_monotone_under_refinement():
    band = make_catenoid_band(1.0, (0.0, 1.0))
    # a point that is a node of every nested grid
    u, v = np.pi, 0.5
    vals = [float(distance_to_gamma(band, 0, u, v, method="grid", grid=(n, n))) for n in (9, 17, 33, 65)]
    assert all(a >= b - 1e-12 for a, b in zip(vals, vals[1:]))
    assert vals[-1] >= np.sinh(0.5) - 1e-9


def test_gamma_csv(tmp_path, ycat):
    p = tmp_path / "g.csv"
    export_gamma_csv(ycat, p, 16)
    lines = p.read_text().splitlines()
    assert len(lines) == 17 and lines[0].startswith("t,")


@settings(max_examples=20, deadline=None)
@given(st.floats(0, 2 * np.pi), st.floats(0, np.pi),
       st.tuples(st.floats(-5, 5), st.floats(-5, 5), st.floats(-5, 5)))
def test_conormal_sum_invariant_under_rigid_motion(a, b, shift):
    ca, sa, cb, sb = np.cos(a), np.sin(a), np.cos(b), np.sin(b)
    R = np.array([[ca, -sa, 0], [sa, ca, 0], [0, 0, 1]]) @ np.array([[1, 0, 0], [0, cb, -sb], [0, sb, cb]])
    base = make_flat_y(densities=[1.0, 1.0, 1.5])
    moved = []
    for P in base.sheets:
        moved.append(ParametricPatch(P.domain, lambda u, v, P=P: P.immersion(u, v) @ R.T + np.asarray(shift),
                                     junction_edge=P.junction_edge, orientation_sign=P.orientation_sign, name=P.name))
    C = base.curve
    curve = JunctionCurve(lambda t: C.gamma(t) @ R.T + np.asarray(shift), C.t_range, "line")
    M = MultiJunctionSurface(moved, base.densities, curve, base.identifications)
    assert np.isclose(minimality_residual(M, (8, 8), 16).max_conormal_sum,
                      minimality_residual(base, (8, 8), 16).max_conormal_sum, rtol=1e-6)


@settings(max_examples=20, deadline=None)
@given(st.floats(0.01, 2 * np.pi - 0.01))
def test_conormal_continuous(t):
    M = make_y_catenoid()
    dt = 1e-3
    for i in range(3):
        a, b = conormal(M, i, np.array([t])), conormal(M, i, np.array([t + dt]))
        assert np.linalg.norm(a - b) <= 2 * dt
