import numpy as np
import pytest

from freeconv.measures import InputError, build_measure, moment
from freeconv.spectral import (
    default_window,
    density_grid,
    detect_support,
    grid_moment,
    write_csv,
)
from helpers import jacobi, sc2_density, semicircle, symmetric_two_cut


@pytest.fixture(scope="module")
def sc_pair_grid():
    mu = semicircle()
    return density_grid("pair", mu, mu, n_points=401)


def test_pair_density_closed_form(sc_pair_grid):
    dg = sc_pair_grid
    assert np.max(np.abs(dg.density - sc2_density(dg.grid))) < 1e-4
    assert np.max(dg.boundary_error) < 1e-5


def test_grid_normalization_and_moments(sc_pair_grid):
    assert 0.995 < grid_moment(sc_pair_grid, 0) < 1.005
    # mean and variance add under the convolution
    assert abs(grid_moment(sc_pair_grid, 1)) < 1e-3
    assert abs(grid_moment(sc_pair_grid, 2) - 2.0) < 1e-2


def test_support_detection_semicircle_pair(sc_pair_grid):
    sr = detect_support(sc_pair_grid)
    assert sr.counts == (1, 0, 0)
    (l, r), = sr.components
    edge = 2 * np.sqrt(2.0)
    assert l == pytest.approx(-edge, abs=1e-6)
    assert r == pytest.approx(edge, abs=1e-6)


def test_pair_matches_semigroup_t2(sc_pair_grid):
    mu = semicircle()
    dg2 = density_grid(
        "semigroup",
        mu,
        t=2.0,
        window=(sc_pair_grid.grid[0], sc_pair_grid.grid[-1]),
        n_points=401,
    )
    assert np.max(np.abs(dg2.density - sc_pair_grid.density)) < 1e-6


def test_divergence_point_of_critical_atom():
    # atom of mass exactly 1 - 1/t produces a density divergence at t*x0
    mu = build_measure(
        {
            "components": [jacobi(-2, 2, w=0.5)],
            "atoms": [{"x": 3.0, "mass": 0.5}],
        },
        allow_atomic=True,
    )
    dg = density_grid("semigroup", mu, t=2.0, n_points=401)
    sr = detect_support(dg)
    assert sr.divergence_points == [pytest.approx(6.0, abs=1e-9)]
    assert sr.counts[2] == 1
    assert sr.edge_mismatches == []


def test_mean_shift_covariance():
    # shifting one input shifts the convolution support by the same amount
    mu = symmetric_two_cut()
    nu = semicircle()
    sr1 = detect_support(density_grid("pair", mu, nu, n_points=301))
    sr2 = detect_support(density_grid("pair", mu.shifted(1.5), nu, n_points=301))
    assert len(sr1.components) == len(sr2.components)
    for (l1, r1), (l2, r2) in zip(sr1.components, sr2.components):
        assert l2 - l1 == pytest.approx(1.5, abs=1e-4)
        assert r2 - r1 == pytest.approx(1.5, abs=1e-4)


def test_default_window_covers_support():
    mu = semicircle()
    lo, hi = default_window("pair", mu, mu)
    assert lo < -2 * np.sqrt(2.0) and hi > 2 * np.sqrt(2.0)
    lo, hi = default_window("semigroup", mu, t=2.0)
    assert lo < -2 * np.sqrt(2.0) and hi > 2 * np.sqrt(2.0)


def test_csv_columns(tmp_path, sc_pair_grid):
    path = tmp_path / "grid.csv"
    write_csv(sc_pair_grid, str(path))
    lines = path.read_text().splitlines()
    assert lines[0] == "E,rho,im_omega_alpha,im_omega_beta,boundary_error"
    data = np.genfromtxt(str(path), delimiter=",", skip_header=1)
    assert data.shape[0] == sc_pair_grid.grid.size
    assert np.array_equal(data[:, 0], sc_pair_grid.grid)
    assert np.array_equal(data[:, 1], sc_pair_grid.density)


def test_semigroup_csv_columns(tmp_path):
    dg = density_grid("semigroup", semicircle(), t=2.0, n_points=101)
    path = tmp_path / "grid.csv"
    write_csv(dg, str(path))
    assert path.read_text().splitlines()[0] == "E,rho,im_omega_t,boundary_error"


def test_input_validation():
    mu = semicircle()
    with pytest.raises(InputError):
        density_grid("pair", mu)
    with pytest.raises(InputError):
        density_grid("semigroup", mu, t=1.0)
    with pytest.raises(InputError):
        density_grid("spectral", mu, mu)
