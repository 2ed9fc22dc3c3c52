import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from levywalks.densities import (
    CLAMP_MARGIN,
    Route,
    cartesian_density,
    chebyshev_grid,
    clamp_grid,
    density_table,
    overshoot_phi1_tail,
    phi1,
    phi1_cumulative,
    phi1_mass,
    phi_r,
    phi_r_d3_closed,
    project_radius_to_axis,
    radial_cdf,
    radius_normalization,
    total_phi1_mass,
)
from levywalks.errors import DomainError, EndpointUnstable, NumericError, RouteParityError
from levywalks.model import WalkKind, make_params
from levywalks.quadrature import tanh_sinh

KINDS = list(WalkKind)
alphas = st.floats(min_value=0.1, max_value=0.9)
kinds = st.sampled_from(KINDS)


@pytest.mark.parametrize("kind", KINDS)
@pytest.mark.parametrize("dim", [3, 7])
def test_elementary_matches_hyper(kind, dim):
    params = make_params(kind, 0.45, dim)
    x = np.linspace(0.02, 0.98, 25)
    if kind is WalkKind.OVERSHOOT:
        x = np.concatenate([x, [1.02, 1.5, 3.0, 20.0]])
    a = phi1(params, x, Route.ELEMENTARY)
    b = phi1(params, x, Route.HYPER)
    assert np.max(np.abs(a - b) / (1 + np.abs(b))) <= 1e-10


@pytest.mark.parametrize("kind", KINDS)
@pytest.mark.parametrize("dim", [2, 3, 4])
def test_hyper_matches_epsilon_oracle(kind, dim):
    params = make_params(kind, 0.7, dim)
    x = [0.1, 0.55, 0.9] + ([1.4] if kind is WalkKind.OVERSHOOT else [])
    got = phi1(params, np.array(x))
    want = phi1(params, np.array(x), Route.EPSILON)
    assert np.allclose(got, want, rtol=1e-7, atol=1e-9)


def test_phi1_domain_rules():
    params = make_params("standard", 0.5, 3)
    with pytest.raises(DomainError):
        phi1(params, 0.0)
    with pytest.raises(DomainError):
        phi1(params, 0.5, Route.CLOSED_D3)
    with pytest.raises(RouteParityError):
        phi1(make_params("standard", 0.5, 4), 0.5, Route.ELEMENTARY)
    assert phi1(params, 1.3) == 0.0
    assert phi1(make_params("overshoot", 0.5, 3), 1.3) > 0


@given(kinds, alphas, st.integers(min_value=2, max_value=7), st.floats(min_value=0.01, max_value=0.99))
def test_phi1_even_and_positive(kind, alpha, dim, x):
    params = make_params(kind, alpha, dim)
    v = phi1(params, x)
    assert v > 0
    assert phi1(params, -x) == v


def test_overshoot_phi1_finite_at_origin():
    for dim in (3, 4):
        params = make_params("overshoot", 0.6, dim)
        v = phi1(params, np.array([1e-300, 1e-20, 1e-8]))
        assert np.allclose(v, v[-1], rtol=1e-12)


@pytest.mark.parametrize("kind", KINDS)
@pytest.mark.parametrize("dim", [2, 3, 4, 5, 6])
def test_phi1_total_mass(kind, dim):
    params = make_params(kind, 0.6, dim)
    assert phi1_mass(params) == pytest.approx(1.0, abs=1e-10)


def test_overshoot_tail_series():
    params = make_params("overshoot", 0.6, 5)
    for x in (2.0, 3.5):
        direct, _ = tanh_sinh(lambda t, dl, dr: phi1(params, t), x, 200.0, rtol=1e-13)
        want = direct + overshoot_phi1_tail(params, 200.0)
        assert overshoot_phi1_tail(params, x) == pytest.approx(want, rel=1e-10)
    # tail ~ x^(-alpha): the survival function is regularly varying
    s1, s2 = overshoot_phi1_tail(params, 1e4), overshoot_phi1_tail(params, 2e4)
    assert math.log(s1 / s2) / math.log(2) == pytest.approx(0.6, abs=1e-6)


def test_phi1_cumulative_monotone():
    params = make_params("overshoot", 0.3, 4)
    x = np.geomspace(1e-4, 1e3, 40)
    c = phi1_cumulative(params, x)
    assert np.all(np.diff(c) > 0) and c[-1] < total_phi1_mass(params)
    assert phi1_cumulative(params, x[::-1])[::-1] == pytest.approx(c, rel=1e-14)


# -- radius density -------------------------------------------------------------------


R_INNER = np.linspace(0.01, 0.99, 30)
R_OUTER = np.geomspace(1.01, 50.0, 20)


@pytest.mark.parametrize("alpha", [0.3, 0.6, 0.9])
@pytest.mark.parametrize("kind", KINDS)
def test_d3_pipeline_matches_corrected_closed_forms(kind, alpha):
    params = make_params(kind, alpha, 3)
    grids = [R_INNER] + ([R_OUTER] if kind is WalkKind.OVERSHOOT else [])
    for r in grids:
        got = phi_r(params, r)
        want = phi_r_d3_closed(kind, alpha, r, corrected=True)
        assert np.max(np.abs(got / want - 1)) <= 1e-8


def test_literal_closed_forms():
    # standard and overshoot r > 1 displays are exact as printed
    for kind, r in (("standard", R_INNER), ("overshoot", R_OUTER)):
        assert np.allclose(phi_r_d3_closed(kind, 0.6, r), phi_r_d3_closed(kind, 0.6, r, corrected=True), rtol=0)
    # the printed undershoot display is not normalised, the printed overshoot r < 1 one goes negative
    mass, _ = tanh_sinh(lambda r, dl, dr: phi_r_d3_closed("undershoot", 0.6, r), 0.0, 1.0, rtol=1e-12)
    assert abs(mass - 1) > 0.05
    assert np.min(phi_r_d3_closed("overshoot", 0.6, R_INNER)) < 0


def test_closed_form_validation():
    with pytest.raises(DomainError):
        phi_r_d3_closed("standard", 1.2, 0.5)
    with pytest.raises(DomainError):
        phi_r_d3_closed("standard", 0.5, -0.1)


@pytest.mark.parametrize("kind", KINDS)
@pytest.mark.parametrize("dim", [5, 7])
def test_radius_elementary_matches_hyper(kind, dim):
    params = make_params(kind, 0.35, dim)
    r = np.linspace(0.05, 0.95, 9)
    if kind is WalkKind.OVERSHOOT:
        r = np.concatenate([r, [1.1, 2.0, 10.0]])
    a = phi_r(params, r, Route.ELEMENTARY)
    b = phi_r(params, r)
    assert np.allclose(a, b, rtol=1e-9)


@given(kinds, alphas, st.integers(min_value=2, max_value=7), st.floats(min_value=0.02, max_value=0.98))
def test_radius_density_positive(kind, alpha, dim, r):
    assert phi_r(make_params(kind, alpha, dim), r) >= 0


def test_radius_endpoint_and_support():
    params = make_params("standard", 0.5, 4)
    with pytest.raises(EndpointUnstable):
        phi_r(params, 1.0 - CLAMP_MARGIN / 10)
    assert phi_r(params, 1.5) == 0.0
    over = make_params("overshoot", 0.5, 4)
    with pytest.raises(EndpointUnstable):
        phi_r(over, 1.0 + CLAMP_MARGIN / 10)
    with pytest.raises(DomainError):
        phi_r(params, 0.5, Route.EPSILON)
    with pytest.raises(RouteParityError):
        phi_r(params, 0.5, Route.ELEMENTARY)


@pytest.mark.parametrize("kind", KINDS)
@pytest.mark.parametrize("dim", [2, 3, 4, 5])
def test_radial_cdf_is_integral_of_density(kind, dim):
    params = make_params(kind, 0.6, dim)
    pts = [0.2, 0.7] + ([1.5, 4.0] if kind is WalkKind.OVERSHOOT else [])
    for a, b in zip(pts[:-1], pts[1:]):
        if a < 1 < b:
            continue
        integral, _ = tanh_sinh(lambda r, dl, dr: phi_r(params, r), a, b, rtol=1e-11)
        assert radial_cdf(params, b) - radial_cdf(params, a) == pytest.approx(integral, abs=1e-10)


def test_radial_cdf_shape():
    params = make_params("overshoot", 0.6, 3)
    r = np.geomspace(1e-3, 1e4, 60)
    r = r[np.abs(r - 1) > 1e-5]
    c = radial_cdf(params, r)
    assert np.all(np.diff(c) > 0) and 0 < c[0] < 1e-3 and c[-1] < 1
    assert radial_cdf(make_params("standard", 0.6, 3), 2.0) == pytest.approx(1.0, abs=1e-14)


@pytest.mark.parametrize("kind", KINDS)
@pytest.mark.parametrize("dim", [2, 5])
def test_normalisation(kind, dim):
    tol = 1e-6 if kind is not WalkKind.OVERSHOOT else 1e-4
    assert radius_normalization(make_params(kind, 0.6, dim)) == pytest.approx(1.0, abs=tol)


@pytest.mark.parametrize("kind", KINDS)
def test_projection_round_trip(kind):
    params = make_params(kind, 0.6, 3)
    for x in (0.2, 0.6):
        assert project_radius_to_axis(params, x) == pytest.approx(phi1(params, x), rel=1e-8)


def test_cartesian_density():
    params = make_params("standard", 0.4, 3)
    t = 2.0
    point = np.array([0.3, -0.4, 0.5])
    rho = np.linalg.norm(point) / t
    want = phi_r(params, rho) / (4 * math.pi * rho ** 2 * t ** 3)
    assert cartesian_density(params, point, t) == pytest.approx(want, rel=1e-13)
    # ballistic scaling H(x, t) = t^-d H(x / t, 1)
    assert cartesian_density(params, point, t) == pytest.approx(
        t ** -3 * cartesian_density(params, point / t, 1.0), rel=1e-13)
    assert cartesian_density(params, np.array([3.0, 0, 0]), 1.0) == 0.0


def test_cartesian_density_in_the_plane():
    params = make_params("undershoot", 0.5, 2)
    point = np.array([0.15, 0.2])
    want = phi_r(params, 0.25) / (2 * math.pi * 0.25)
    assert cartesian_density(params, point, 1.0) == pytest.approx(want, rel=1e-13)
    with pytest.raises(EndpointUnstable):
        cartesian_density(params, np.array([1e-7, 0.0]), 1.0)
    with pytest.raises(DomainError):
        cartesian_density(params, np.array([0.1, 0.1, 0.1]), 1.0)


def test_tables_and_grids():
    params = make_params("standard", 0.3, 3)
    g = clamp_grid(params, [0.0, 0.5, 1.0, 1.2])
    assert g[0] == CLAMP_MARGIN and g[2] == 1 - CLAMP_MARGIN and g[3] == 1 - CLAMP_MARGIN
    over = make_params("overshoot", 0.3, 3)
    assert clamp_grid(over, [1.0])[0] == 1 + CLAMP_MARGIN
    cg = chebyshev_grid(over, 64)
    assert cg.size == 64 and cg[-1] < 10
    table = density_table(params, np.linspace(0.01, 0.99, 99))
    assert table.values.shape == (99,) and np.all(table.values >= 0)
    axis = density_table(params, np.linspace(0.01, 0.99, 5), mode="axis")
    assert np.allclose(axis.values, phi1(params, axis.grid))
    with pytest.raises(DomainError):
        density_table(params, [0.5], mode="polar")


def test_table_reports_numeric_failure(monkeypatch):
    import levywalks.densities as dens

    params = make_params("standard", 0.3, 3)
    monkeypatch.setattr(dens, "phi_r", lambda p, g, route: np.where(np.asarray(g) > 0.5, -1.0, 1.0))
    with pytest.raises(NumericError, match="abscissa 0.75"):
        dens.density_table(params, [0.25, 0.75])
