import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mjs.errors import NonFiniteIntegrand
from mjs.fields import (
    JunctionScalarField,
    boundary_trace,
    compatibility_solve,
    cutoff_field,
    cutoff_rho,
    field_from_vector,
    normals_on_gamma,
    smoothstep,
)
from mjs.geometry import sample_patch, gradient_from_partials


def random_smooth_field(rng):
    """Random trigonometric-polynomial vector field on R^3."""
    A = rng.normal(size=(3, 3))
    B = rng.normal(size=(3, 3))
    c = rng.normal(size=3)

    def V(x):
        return np.sin(x @ A.T + c) + np.cos(x @ B.T) * x[..., :1]
    return V


def test_constant_trace(ycat):
    phi = JunctionScalarField.constant([1.0, 1.0, 1.0])
    t = np.linspace(0, 6, 5)
    for i in range(3):
        np.testing.assert_array_equal(boundary_trace(ycat, phi, i, t), 1.0)


def test_ez_traces_match_frame(ycat):
    phi = field_from_vector(ycat, lambda x: np.broadcast_to([0.0, 0.0, 1.0], x.shape))
    t = np.linspace(0, 2 * np.pi, 12, endpoint=False)
    N = normals_on_gamma(ycat, t)
    for i in range(3):
        np.testing.assert_allclose(boundary_trace(ycat, phi, i, t), N[:, i, 2], atol=1e-14)
    # orientation convention of the catalog: disc normal -e_z, necks tilted upward
    np.testing.assert_allclose(N[:, :, 2], np.broadcast_to([-1.0, 0.5, 0.5], (12, 3)), atol=1e-12)


def test_nonfinite_trace(ycat):
    phi = JunctionScalarField([lambda u, v: np.full(np.shape(u), np.nan)] * 3)
    with pytest.raises(NonFiniteIntegrand):
        boundary_trace(ycat, phi, 0, np.array([0.0]))


def test_equilateral_traces(flat_y):
    ok = compatibility_solve(flat_y, JunctionScalarField.constant([1.0, -1.0, 0.0]), 16)
    assert ok.compatible and ok.residual <= 1e-12
    bad = compatibility_solve(flat_y, JunctionScalarField.constant([1.0, 1.0, 1.0]), 16)
    assert not bad.compatible and bad.residual > 0.5
    # oracle: least squares misfit of the 3x2 system at one t
    N = normals_on_gamma(flat_y, np.array([0.0]))[0][:, :2]
    W, *_ = np.linalg.lstsq(N, np.ones(3), rcond=None)
    assert np.isclose(bad.residual, np.max(np.abs(N @ W - 1)), rtol=1e-12)


def test_zero_vector_gives_zero_field(ycat):
    phi = field_from_vector(ycat, lambda x: np.zeros_like(x))
    s = sample_patch(ycat.sheets[1], (8, 8))
    assert np.all(phi.value(1, s.u, s.v) == 0)


def test_position_field_tangent_on_flat_y(flat_y):
    phi = field_from_vector(flat_y, lambda x: x)
    for i in range(3):
        s = sample_patch(flat_y.sheets[i], (8, 8))
        assert np.max(np.abs(phi.value(i, s.u, s.v))) <= 1e-15


def test_recovered_W_is_normal_part(ycat, rng):
    V = random_smooth_field(rng)
    res = compatibility_solve(ycat, field_from_vector(ycat, V), 64)
    assert res.residual <= 1e-10 and not res.rank_deficient
    eta = ycat.curve.tangent(res.t)
    Vg = V(ycat.curve.point(res.t))
    normal_part = Vg - np.einsum("ni,ni->n", Vg, eta)[:, None] * eta
    np.testing.assert_allclose(res.W, normal_part, atol=1e-10)


def test_normal_plane_option(ycat, rng):
    V = random_smooth_field(rng)
    res = compatibility_solve(ycat, field_from_vector(ycat, V), 32, normal_plane=True)
    assert res.residual <= 1e-10
    assert np.max(np.abs(np.einsum("ni,ni->n", res.W, ycat.curve.tangent(res.t)))) <= 1e-12


def test_rank_deficient_single_sheet():
    from mjs.catalog import make_catenoid_half
    M = make_catenoid_half()
    res = compatibility_solve(M, JunctionScalarField.constant([2.0]), 8)
    assert res.compatible and not res.rank_deficient and np.all(res.rank == 1)


def test_compatibility_csv(tmp_path, ycat):
    res = compatibility_solve(ycat, JunctionScalarField.constant([1.0, 1.0, 1.0]), 8)
    res.write_csv(tmp_path / "c.csv")
    assert (tmp_path / "c.csv").read_text().splitlines()[0] == "t,W_x,W_y,W_z,trace0,trace1,trace2,residual"
    assert res.to_dict()["n_samples"] == 8


@pytest.mark.parametrize("d,expected", [(0.0, 1.0), (2.0, 0.0), (1.5, 0.5), (0.7, 1.0), (5.0, 0.0)])
def test_cutoff_values(flat_y, d, expected):
    r = 0.3
    assert np.isclose(cutoff_rho(flat_y, 0, d * r, 0.0, r), expected, atol=1e-15)


def test_cutoff_monotone():
    d = np.linspace(0, 3, 301)
    assert np.all(np.diff(smoothstep(d)) <= 0)


@pytest.mark.parametrize("r", [0.2, 0.4])
def test_cutoff_gradient_bound(ycat, r):
    rho = cutoff_field(ycat, r)
    for i in range(3):
        s = sample_patch(ycat.sheets[i], (24, 24))
        fu, fv = rho.gradient_partials(ycat.sheets[i], i, s.u, s.v)
        _, g2 = gradient_from_partials(s.shape, fu, fv)
        assert np.max(np.sqrt(g2)) <= 2 / r
        assert np.max(np.sqrt(g2)) >= 1.2 / r  # the transition band is sampled


def test_field_arithmetic(ycat):
    a = JunctionScalarField.constant([1.0, 2.0, 3.0])
    b = JunctionScalarField.constant([0.5, 0.5, 0.5])
    c = (a - b) * 2.0 + (-b)
    assert [float(c.value(i, 0.1, 0.2)) for i in range(3)] == [0.5, 2.5, 4.5]


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 2**31 - 1))
def test_round_trip_compatible(seed):
    from mjs.catalog import make_y_catenoid
    M = make_y_catenoid()
    V = random_smooth_field(np.random.default_rng(seed))
    assert compatibility_solve(M, field_from_vector(M, V), 32).residual <= 1e-10


@settings(max_examples=50, deadline=None)
@given(st.lists(st.floats(-10, 10), min_size=3, max_size=3), st.booleans())
def test_equilateral_compatible_iff_sum_zero(f, force_zero):
    from mjs.catalog import make_flat_y
    M = make_flat_y()
    if force_zero:
        f = [f[0], f[1], -f[0] - f[1]]
    res = compatibility_solve(M, JunctionScalarField.constant(f), 4)
    # least-squares misfit of an equilateral triple is |sum f| / 3 on every sheet
    assert np.isclose(res.residual, abs(sum(f)) / 3, rtol=1e-9, atol=1e-13)
    if abs(sum(f)) <= 1e-8:
        assert res.compatible
    if abs(sum(f)) > 3.01e-8:
        assert not res.compatible
