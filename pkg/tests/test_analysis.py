import numpy as np
import pytest

from freeconv.analysis import (
    bounds_report,
    classify_p_sets,
    gap_zeros,
    n_set,
    semigroup_edges,
)
from freeconv.measures import InputError, build_measure, variance
from freeconv.spectral import density_grid, detect_support
from freeconv.transform import m_prime
from helpers import jacobi, semicircle, symmetric_two_cut


def _trapezoid_m_oracle(mu, panels=1_000_000):
    """Brute-force m(u) on the real axis by trapezoid rule over the density."""
    xs, ws = [], []
    for comp in mu.components:
        x = np.linspace(comp.left_endpoint, comp.right_endpoint, panels)[1:-1]
        rho = mu.density(x)
        w = np.full(x.size, (comp.right_endpoint - comp.left_endpoint) / panels)
        xs.append(x)
        ws.append(rho * w)
    x = np.concatenate(xs)
    w = np.concatenate(ws)

    def m(u):
        return float(np.sum(w / (x - u)))

    return m


def test_gap_zero_symmetric_two_cut():
    zeros = gap_zeros(symmetric_two_cut())
    assert len(zeros) == 1
    assert zeros[0] == pytest.approx(0.0, abs=1e-10)


def test_gap_zeros_semicircle_empty():
    assert gap_zeros(semicircle()) == []


def test_gap_zero_skewed_two_cut_against_sign_scan():
    mu = build_measure(
        {"components": [jacobi(-2, -1, w=0.3), jacobi(1, 2, w=0.7)]}
    )
    zeros = gap_zeros(mu)
    assert len(zeros) == 1
    assert zeros[0] < 0  # the heavier right cut pushes the zero left
    m = _trapezoid_m_oracle(mu)
    lo, hi = -0.99, 0.99
    assert m(lo) < 0 < m(hi)
    for _ in range(60):
        mid = 0.5 * (lo + hi)
        if m(mid) < 0:
            lo = mid
        else:
            hi = mid
    assert zeros[0] == pytest.approx(0.5 * (lo + hi), abs=1e-6)


def test_gap_zero_uniqueness_by_dense_sampling():
    rng = np.random.default_rng(11)
    for _ in range(5):
        lengths = rng.uniform(0.5, 1.5, 3)
        gaps = rng.uniform(0.5, 1.5, 2)
        w = rng.uniform(0.2, 1.0, 3)
        w /= w.sum()
        comps, x = [], -3.0
        for i in range(3):
            comps.append(jacobi(x, x + lengths[i], w=float(w[i])))
            x += lengths[i] + (gaps[i] if i < 2 else 0.0)
        mu = build_measure({"components": comps})
        zeros = gap_zeros(mu)
        m = _trapezoid_m_oracle(mu, 200_000)
        for c1, c2 in zip(mu.components, mu.components[1:]):
            u = np.linspace(c1.right_endpoint + 1e-3, c2.left_endpoint - 1e-3, 256)
            vals = np.array([m(float(ui)) for ui in u])
            changes = int(np.sum(np.abs(np.diff(np.sign(vals))) > 0))
            in_gap = [z for z in zeros if u[0] < z < u[-1]]
            assert changes <= 1
            assert changes == len(in_gap)


def test_p_set_far_separated_construction():
    mu_a = build_measure({"components": [jacobi(-6, -5, w=0.5), jacobi(5, 6, w=0.5)]})
    mu_b = build_measure({"components": [jacobi(-0.1, 0.1)]})
    p_a, p_b = classify_p_sets(mu_a, mu_b)
    assert p_b == []
    assert len(p_a) == 1
    assert p_a[0] == pytest.approx(0.0, abs=1e-10)


def test_p_set_tie_is_included():
    mu_a = symmetric_two_cut()
    mp0 = float(np.real(m_prime(mu_a, 0.0, guard=False)))
    # scale a symmetric one-cut so Var(mu_b) * m'(0) == 1 exactly
    unit = build_measure({"components": [jacobi(-1, 1)]})
    s = np.sqrt(1.0 / (mp0 * variance(unit)))
    mu_b = build_measure({"components": [jacobi(-s, s)]})
    assert variance(mu_b) * mp0 == pytest.approx(1.0, abs=1e-10)
    p_a, _ = classify_p_sets(mu_a, mu_b)
    assert p_a == [pytest.approx(0.0, abs=1e-10)]


def test_n_set_two_cut_empty():
    assert n_set(symmetric_two_cut()) == set()


def test_n_set_mixed_signs_empty():
    mu = build_measure(
        {"components": [jacobi(-4, -3, w=0.7), jacobi(-1, 0, w=0.2), jacobi(2, 3, w=0.1)]}
    )
    # both gaps contain zeros of m, so the sign pattern cannot hold
    assert len(gap_zeros(mu)) == 2
    assert n_set(mu) == set()


def test_n_set_sign_pattern():
    mu = build_measure(
        {
            "components": [
                jacobi(-2, -1, w=0.55),
                jacobi(-0.9, 0, w=0.05),
                jacobi(0.1, 1, w=0.40),
            ]
        }
    )
    assert gap_zeros(mu) == []
    assert n_set(mu) == {1}


def test_semigroup_edges_semicircle():
    edges = semigroup_edges(semicircle(), 2.0)
    assert len(edges) == 2
    (w1, e1), (w2, e2) = edges
    assert w1 == pytest.approx(-np.sqrt(4.5), abs=1e-8)
    assert w2 == pytest.approx(np.sqrt(4.5), abs=1e-8)
    assert e1 == pytest.approx(-2 * np.sqrt(2.0), abs=1e-8)
    assert e2 == pytest.approx(2 * np.sqrt(2.0), abs=1e-8)


def test_semigroup_edges_approach_support_as_t_to_1():
    edges = semigroup_edges(semicircle(), 1.01)
    omegas = np.array([w for w, _ in edges])
    assert np.max(np.abs(np.abs(omegas) - 2.0)) < 1e-3


def test_bounds_semicircle_pair():
    mu = semicircle()
    dg = density_grid("pair", mu, mu, n_points=201)
    br = bounds_report("pair", mu, detect_support(dg), mu_b=mu)
    assert (br.lower, br.upper) == (1, 1)
    assert br.passed
    d = br.to_dict()
    assert d["measured"] == {"I": 1, "C0": 0, "Cinf": 0}
    assert set(d) == {"kind", "measured", "sets", "lower", "upper", "verdicts"}


def test_bounds_semigroup_two_cut():
    mu = symmetric_two_cut()
    dg = density_grid("semigroup", mu, t=2.0, n_points=301)
    br = bounds_report("semigroup", mu, detect_support(dg), t=2.0)
    assert br.sets["Z_mu"] == [pytest.approx(0.0, abs=1e-10)]
    assert br.upper == 3  # n_ac + |Z| = 2n_ac + n_pp_out - 1
    assert br.passed


def test_bounds_input_validation():
    mu = semicircle()
    dg = density_grid("pair", mu, mu, n_points=101)
    sr = detect_support(dg)
    with pytest.raises(InputError):
        bounds_report("semigroup", mu, sr, t=1.0)
    atomic = build_measure(
        {"components": [jacobi(-2, 2, w=0.6)], "atoms": [{"x": 4.0, "mass": 0.4}]},
        allow_atomic=True,
    )
    with pytest.raises(InputError):
        bounds_report("pair", atomic, sr, mu_b=mu)
