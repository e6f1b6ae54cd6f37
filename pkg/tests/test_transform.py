import numpy as np
import pytest

from freeconv.measures import InputError, build_measure, moment
from freeconv.transform import (
    F,
    F_prime,
    I_mu,
    I_mu_hat,
    MeasureTransform,
    NumericalError,
    cauchy_m,
    hat_data,
    m_prime,
)
from helpers import bernoulli, jacobi, sc_m, semicircle, symmetric_two_cut


def _random_upper(rng, n, scale=3.0):
    return rng.uniform(-scale, scale, n) + 1j * rng.uniform(0.05, scale, n)


def test_semicircle_closed_form():
    mu = semicircle()
    rng = np.random.default_rng(1)
    z = _random_upper(rng, 200)
    assert np.max(np.abs(cauchy_m(mu, z) - sc_m(z))) < 1e-10


def test_nevanlinna_properties():
    mu = build_measure(
        {
            "components": [jacobi(-2, -1, tm=-0.4, tp=0.3, w=0.6), jacobi(1, 2, w=0.3)],
            "atoms": [{"x": 4.0, "mass": 0.1}],
        },
        allow_atomic=True,
    )
    rng = np.random.default_rng(2)
    w = _random_upper(rng, 1000, scale=6.0)
    m = cauchy_m(mu, w)
    Fw = F(mu, w)
    assert np.all(np.imag(m) > 0)
    assert np.all(np.imag(Fw) >= np.imag(w) - 1e-8)
    # self-map normalization at infinity
    eta = 1e6j
    assert abs(F(mu, eta) / eta - 1.0) < 1e-5


def test_conjugate_symmetry():
    mu = symmetric_two_cut()
    rng = np.random.default_rng(3)
    z = _random_upper(rng, 50)
    a = cauchy_m(mu, z, guard=False)
    b = cauchy_m(mu, np.conj(z), guard=False)
    assert np.max(np.abs(b - np.conj(a))) < 1e-12


def test_m_prime_matches_finite_differences():
    mu = build_measure(
        {"components": [jacobi(-1, 0, tm=-0.2, tp=0.7, w=0.5), jacobi(1, 2, w=0.5)]}
    )
    rng = np.random.default_rng(4)
    z = _random_upper(rng, 30)
    d = 1e-5
    fd = (cauchy_m(mu, z + d) - cauchy_m(mu, z - d)) / (2 * d)
    assert np.max(np.abs(m_prime(mu, z) - fd)) < 1e-6


def test_atomic_transforms():
    mu = bernoulli()
    rng = np.random.default_rng(5)
    z = _random_upper(rng, 100)
    assert np.max(np.abs(cauchy_m(mu, z) - z / (1 - z * z))) < 1e-14
    assert np.max(np.abs(F(mu, z) - (z * z - 1) / z)) < 1e-13


def test_boundary_guard():
    mu = semicircle()
    with pytest.raises(InputError):
        cauchy_m(mu, 0.5 + 1e-6j)
    # guard disabled: the split quadrature handles the point
    v = cauchy_m(mu, 0.5 + 1e-6j, guard=False)
    assert abs(v - sc_m(0.5 + 1e-6j)) < 1e-9


def test_F_rejects_vanishing_m():
    mu = symmetric_two_cut()
    # m vanishes at the symmetric gap zero
    with pytest.raises(NumericalError):
        F(mu, 0.0 + 0.0j, guard=False)


def test_evaluation_on_atom_rejected():
    mu = bernoulli()
    with pytest.raises(InputError):
        cauchy_m(mu, 1.0 + 0.0j, guard=False)


def test_I_mu_definitions_agree():
    mu = semicircle()
    w = 0.4 + 0.7j
    direct = float(np.imag(cauchy_m(mu, w)) / w.imag)
    assert I_mu(mu, w) == pytest.approx(direct, rel=1e-12)
    # on the real axis outside the support I_mu is m'
    assert I_mu(mu, 3.0) == pytest.approx(float(np.real(m_prime(mu, 3.0))), rel=1e-12)


def test_semicircle_is_its_own_hat():
    # For the standard semicircle F(w) - w = m(w), so muhat = mu
    mu = semicircle()
    for w in (3j, 1 + 2j, -2 + 0.5j):
        assert I_mu_hat(mu, w) == pytest.approx(I_mu(mu, w), rel=1e-9)
    data = hat_data(mu)
    assert data.total_mass == pytest.approx(1.0, abs=1e-10)
    assert data.pure_points == ()
    assert data.shift == pytest.approx(0.0, abs=1e-10)


def test_hat_data_two_cut_pure_point():
    mu = symmetric_two_cut()
    data = hat_data(mu)
    assert data.total_mass == pytest.approx(moment(mu, 2), abs=1e-12)
    assert len(data.pure_points) == 1
    loc, mass = data.pure_points[0]
    assert loc == pytest.approx(0.0, abs=1e-10)
    assert mass == pytest.approx(1.0 / float(np.real(m_prime(mu, 0.0))), rel=1e-10)


def test_measure_transform_interface():
    mu = semicircle()
    tf = MeasureTransform(mu)
    z = 0.3 + 1.2j
    assert tf.F(z) == F(mu, z)
    assert tf.F_prime(z) == F_prime(mu, z)
    assert tf.m(z) == cauchy_m(mu, z)
