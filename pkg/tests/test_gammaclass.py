import numpy as np
import pytest
from scipy.special import zeta

from gammaflag import gammaclass as gc
from gammaflag.spaces import SpaceSpec, flag_space


@pytest.fixture(scope="module")
def series():
    return gc.log_gamma_coeffs(30)


@pytest.fixture(scope="module")
def p1():
    return flag_space(SpaceSpec.from_label("P1"))


@pytest.fixture(scope="module")
def p2():
    return flag_space(SpaceSpec.from_label("P2"))


def test_gamma_quadrature_functional_equation():
    for x in [0.3, 0.75, 1.0, 1.6, 2.3]:
        lhs = gc.gamma_quadrature(1 + x)
        rhs = x * gc.gamma_quadrature(x)
        assert abs(lhs - rhs) < 1e-11 * abs(lhs)
    assert abs(gc.gamma_quadrature(1.0) - 1.0) < 1e-12
    assert abs(gc.gamma_quadrature(5.0) - 24.0) < 1e-9


def test_gamma_quadrature_complex():
    z = 0.4 + 0.3j
    lhs = gc.gamma_quadrature(1 + z)
    rhs = z * gc.gamma_quadrature(z)
    assert abs(lhs - rhs) < 1e-10 * abs(lhs)


def test_gamma_pole_rejected():
    with pytest.raises(gc.GammaError):
        gc.gamma_quadrature(0.0)
    with pytest.raises(gc.GammaError):
        gc.gamma_quadrature(-2.0)


def test_b1_is_minus_euler_gamma(series):
    assert abs(series.coefficients[1] + np.euler_gamma) < 1e-10


def test_bk_zeta_values(series):
    # b_k = (-1)^k zeta(k)/k; quadrature noise grows like 2^k with the Fourier radius 1/2
    for k in range(2, 25):
        expected = (-1) ** k * zeta(k) / k
        assert abs(series.coefficients[k] - expected) < 1e-12 * 2.0**k + 1e-12


def test_series_reproduces_gamma(series):
    x = 0.3
    val = np.exp(series.evaluate(x))
    assert abs(val - gc.gamma_quadrature(1 + x)) < 1e-10


def test_truncation_error_decreases_geometrically(series):
    r = 0.4
    reference = gc.gamma_quadrature(1 + r)
    errs = []
    for order in (10, 15, 20, 25):
        partial = sum(series.coefficients[k] * r**k for k in range(1, order + 1))
        errs.append(abs(np.exp(partial) - reference))
    for a, b in zip(errs, errs[1:]):
        assert b < 0.1 * a
    assert series.tail_bound(0.3) < series.tail_bound(0.6)
    with pytest.raises(gc.GammaError):
        series.tail_bound(1.0)


def test_gamma_class_p1(p1):
    data = gc.gamma_class(p1)
    assert data.noneq_coeffs[0] == pytest.approx(1.0)
    assert data.noneq_coeffs[1] == pytest.approx(-2 * np.euler_gamma, abs=1e-9)


def test_gamma_class_p2_divisor_coefficient(p2):
    data = gc.gamma_class(p2)
    assert data.noneq_coeffs[0] == pytest.approx(1.0)
    assert data.noneq_coeffs[1] == pytest.approx(-3 * np.euler_gamma, abs=1e-9)


def test_gamma_class_degree_zero_always_one(p2):
    data = gc.gamma_class(p2)
    assert data.noneq_coeffs[0] == pytest.approx(1.0)


def test_restriction_matches_power_sum_series(p2):
    data = gc.gamma_class(p2)
    h = [0.02, -0.015]
    for k in range(len(p2.reps)):
        direct = data.restriction(k, h)
        acc = 0.0
        for weight in p2.fixed_point_weights(p2.reps[k]):
            x = sum(h[i] * c for i, c in enumerate(weight))
            acc += data.series.evaluate(x)
        assert abs(direct - np.exp(acc)) < 1e-10


def test_restriction_tends_to_one(p2):
    data = gc.gamma_class(p2)
    vals = data.restriction_vector([1e-9, 1e-9])
    assert np.allclose(vals, 1.0, atol=1e-6)


def test_normalize_identity_at_one(p1):
    data = gc.gamma_class(p1)
    out = gc.normalize_nonequivariant(p1, 1.0, data.noneq_coeffs)
    assert np.allclose(out, data.noneq_coeffs)


def test_normalize_p1_unit_class(p1):
    hbar = 2.0
    out = gc.normalize_nonequivariant(p1, hbar, np.array([1.0, 0.0]))
    expected = [hbar**0.5, hbar**-0.5 * np.log(hbar) * 2.0]
    assert np.allclose(out, expected)


def test_normalize_equivariant_reduces_to_scaling(p2):
    # at h ~ 0 the equivariant rule must reproduce the nonequivariant weights on 1
    hbar = 1.7
    ones = lambda k, h: 1.0
    out = gc.normalize_equivariant_restrictions(p2, hbar, ones, [0.0, 0.0])
    assert np.allclose(out, hbar ** (p2.ell / 2.0))


def test_power_sum_is_c1_at_k1(p2):
    pk = gc.power_sum_class(p2, 1)
    coeffs = [float(c.constant()) for c in pk.coeffs()]
    assert coeffs == pytest.approx(list(gc.c1_coeff_vector(p2)))
