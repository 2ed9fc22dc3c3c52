import cmath
import math

import mpmath
import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from levywalks.errors import BranchError, PoleError, QuadratureError
from levywalks.hyper import (
    CutSide,
    g1_hyper,
    g1_hyper_jet,
    g1_hyper_tjet,
    g1_quadrature,
    gauss_2f1,
    hyp2f1_inverse_jet,
    hyp2f1_taylor,
)
from levywalks.jets import Jet
from levywalks.model import WalkKind, make_params

mpmath.mp.dps = 30

param_sets = [(-0.3, 0.35, 1.5), (0.2, 0.7, 2.5), (-0.45, 0.05, 3.0), (0.35, 0.85, 2.0), (-0.15, 0.35, 4.5)]


def _mp(a, b, c, z, side=None):
    if side is None:
        return complex(mpmath.hyp2f1(a, b, c, z))
    # the limit from the requested side of the cut
    eps = mpmath.mpf("1e-25")
    shift = -1j * eps if side is CutSide.BELOW else 1j * eps
    return complex(mpmath.hyp2f1(a, b, c, mpmath.mpc(z) + shift))


@pytest.mark.parametrize("a,b,c", param_sets)
def test_real_axis_against_mpmath(a, b, c):
    for z in (-80.0, -2.0, -0.5, 0.0, 0.4, 0.8, 0.97, 0.9999):
        got = complex(gauss_2f1(a, b, c, z))
        assert abs(got - _mp(a, b, c, z)) <= 1e-13 * (1 + abs(got))


@pytest.mark.parametrize("a,b,c", param_sets)
@pytest.mark.parametrize("side", list(CutSide))
def test_cut_against_mpmath(a, b, c, side):
    for z in (1.0001, 1.05, 1.3, 2.0, 7.5, 1e3, 1e8):
        got = complex(gauss_2f1(a, b, c, z, side))
        want = _mp(a, b, c, z, side)
        assert abs(got - want) <= 1e-12 * (1 + abs(want)), (z, got, want)


@given(st.floats(min_value=-3, max_value=3), st.floats(min_value=0.05, max_value=3))
def test_complex_plane_against_mpmath(re, im):
    a, b, c = -0.3, 0.35, 1.5
    for z in (complex(re, im), complex(re, -im)):
        got = complex(gauss_2f1(a, b, c, z))
        assert abs(got - _mp(a, b, c, z)) <= 1e-12 * (1 + abs(got))


def test_cut_requires_side():
    with pytest.raises(BranchError):
        gauss_2f1(-0.3, 0.35, 1.5, 2.0)
    with pytest.raises(PoleError):
        gauss_2f1(0.1, 0.2, -2.0, 0.3)


def test_sides_are_conjugate():
    a, b, c = -0.3, 0.35, 1.5
    above = complex(gauss_2f1(a, b, c, 3.0, CutSide.ABOVE))
    below = complex(gauss_2f1(a, b, c, 3.0, CutSide.BELOW))
    assert above == pytest.approx(below.conjugate(), rel=1e-14)


def test_one_minus_z_keeps_precision_near_one():
    a, b, c = -0.3, 0.35, 1.5
    w = -1e-13  # z = 1 + 1e-13, not representable as a separate 1 - z
    got = complex(gauss_2f1(a, b, c, 1.0 - w, CutSide.BELOW, one_minus_z=w))
    want = complex(mpmath.hyp2f1(a, b, c, 1 - mpmath.mpf(w) - 1j * mpmath.mpf("1e-40")))
    assert abs(got - want) <= 1e-13


def test_degenerate_parameters_use_fallback():
    # c - a - b integer
    a, b, c = -0.25, 0.25, 1.0
    for z in (0.9, 1.5):
        side = CutSide.BELOW if z > 1 else None
        got = complex(gauss_2f1(a, b, c, z, side))
        assert abs(got - _mp(a, b, c, z, side)) <= 1e-12


def test_taylor_coefficients():
    a, b, c = -0.3, 0.35, 1.5
    z0 = 0.3 + 0.2j
    got = hyp2f1_taylor(a, b, c, z0, 5)
    want = mpmath.taylor(lambda z: mpmath.hyp2f1(a, b, c, z), z0, 5)
    assert np.allclose(got, np.array([complex(v) for v in want]), rtol=1e-12)


@pytest.mark.parametrize("side", list(CutSide))
def test_inverse_jet_matches_direct(side):
    a, b, c = -0.3, 0.35, 2.5
    t0 = 0.2
    tj = Jet.variable(t0, 6)
    got = hyp2f1_inverse_jet(a, b, c, tj, side)
    want = (1.0 / tj).compose(hyp2f1_taylor(a, b, c, 1.0 / t0, 6, side))
    assert np.allclose(got.c, want.c, rtol=1e-12, atol=1e-13)


@pytest.mark.parametrize("kind", list(WalkKind))
@pytest.mark.parametrize("dim", [3, 4, 6])
def test_g1_hyper_matches_defining_integrals(kind, dim):
    params = make_params(kind, 0.6, dim)
    for xi in (0.4 + 0.3j, -0.7 + 0.2j, 1.5j, -2.0 - 0.5j):
        got = complex(g1_hyper(params, xi * xi))
        # g1_hyper samples xi = -sqrt(z)
        root = -cmath.sqrt(xi * xi)
        want = g1_quadrature(params, root)
        assert abs(got - want) <= 1e-10 * (1 + abs(want)), (xi, got, want)


def test_g1_quadrature_rejects_cut():
    with pytest.raises(QuadratureError):
        g1_quadrature(make_params("standard", 0.5, 3), 1.5)


@pytest.mark.parametrize("kind", list(WalkKind))
def test_tjet_matches_zjet(kind):
    params = make_params(kind, 0.45, 5)
    t0 = np.array([0.3, 0.6])
    tj = Jet(np.stack([t0, 0.1 * t0, np.zeros(2), np.zeros(2)]))
    a = g1_hyper_tjet(params, tj)
    b = g1_hyper_jet(params, 1.0 / tj, CutSide.BELOW)
    assert np.allclose(a.c, b.c, rtol=1e-11, atol=1e-13)


def test_overshoot_small_t_imaginary_part_stable():
    # Im g1 ~ -pi x Phi1(0) as x -> 0; the quotient form would round to zero
    params = make_params("overshoot", 0.6, 3)
    small = g1_hyper_tjet(params, Jet(np.array([[1e-30]]))).c[0, 0]
    ref = g1_hyper_tjet(params, Jet(np.array([[1e-8]]))).c[0, 0]
    assert small.imag / 1e-15 == pytest.approx(ref.imag / 1e-4, rel=1e-6)


@pytest.mark.parametrize("n", [0, 1, 2])
def test_undershoot_third_parameter_is_half_dimension(n):
    # candidate c = 3 + n/2 versus c = 3/2 + n, checked against the defining integrals
    params = make_params("undershoot", 0.6, 2 * n + 3)
    xi = -0.8 + 0.25j
    truth = g1_quadrature(params, xi)
    z = xi * xi
    a, b = -0.3, 0.2

    def kernel(c):
        return 1.0 / complex(mpmath.hyp2f1(a, b, c, z))

    assert abs(kernel(1.5 + n) - truth) <= 1e-10
    assert abs(kernel(3 + n / 2) - truth) > 1e-3
