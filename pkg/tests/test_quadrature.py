import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from levywalks.errors import QuadratureError
from levywalks.quadrature import exp_sinh, gauss_legendre, tanh_sinh


def test_endpoint_singularities():
    # Beta(0.3, 0.6) through the exact endpoint distances
    val, _ = tanh_sinh(lambda x, dl, dr: dl ** -0.7 * dr ** -0.4, 0.0, 1.0, rtol=1e-14, max_level=12)
    want = math.gamma(0.3) * math.gamma(0.6) / math.gamma(0.9)
    assert val == pytest.approx(want, rel=1e-12)


@given(st.floats(min_value=-2.0, max_value=2.0), st.floats(min_value=0.1, max_value=3.0))
def test_polynomial_exact(a, width):
    b = a + width
    val, _ = tanh_sinh(lambda x, dl, dr: 3 * x ** 2 - x + 1, a, b, rtol=1e-14)
    want = (b ** 3 - a ** 3) - (b ** 2 - a ** 2) / 2 + (b - a)
    assert val == pytest.approx(want, rel=1e-12, abs=1e-12)


def test_vector_valued_integrand():
    ks = np.arange(1, 5)[:, None]
    val, _ = tanh_sinh(lambda x, dl, dr: x[None, :] ** ks, 0.0, 1.0, rtol=1e-14)
    assert np.allclose(val, 1.0 / (ks[:, 0] + 1), rtol=1e-13)


def test_exp_sinh_heavy_tail():
    # int_1^inf x^(-1.6) dx = 1/0.6
    val, _ = exp_sinh(lambda x, dl: x ** -1.6, 1.0, rtol=1e-12, max_level=12)
    assert val == pytest.approx(1 / 0.6, rel=1e-9)


def test_exp_sinh_exponential():
    val, _ = exp_sinh(lambda x, dl: np.exp(-dl) * np.cos(dl), 2.0, rtol=1e-13)
    assert val == pytest.approx(0.5, rel=1e-12)


def test_empty_and_reversed_intervals():
    assert tanh_sinh(lambda x, dl, dr: x, 1.0, 1.0)[0] == 0.0
    with pytest.raises(QuadratureError):
        tanh_sinh(lambda x, dl, dr: x, 2.0, 1.0)


def test_nonconvergence_reported():
    with pytest.raises(QuadratureError):
        tanh_sinh(lambda x, dl, dr: np.sin(1.0 / dl), 0.0, 1.0, rtol=1e-14, max_level=4)


def test_gauss_legendre_nodes():
    x, w = gauss_legendre(12)
    assert w.sum() == pytest.approx(1.0, rel=1e-15)
    assert np.dot(w, x ** 11) == pytest.approx(1 / 12, rel=1e-14)
