"""Monte Carlo cross-check: spectra of A + U B U* against computed densities.

A and B carry deterministic quantile spectra of the input measures, U is
Haar-distributed (unitary or orthogonal), and the pooled eigenvalues over
independent trials are compared to the computed free-convolution density by
a Kolmogorov-Smirnov distance against its trapezoid-integrated CDF.
"""

from dataclasses import dataclass

import numpy as np

from freeconv.measures import InputError, quantile


@dataclass(frozen=True)
class TrialConfig:
    matrix_size: int
    trials: int
    seed: int
    ensemble: str = "unitary"

    def __post_init__(self):
        if self.matrix_size < 2:
            raise InputError("matrix_size must be at least 2")
        if self.trials < 1:
            raise InputError("trials must be at least 1")
        if self.ensemble not in ("unitary", "orthogonal"):
            raise InputError(f"unknown ensemble {self.ensemble!r}")


@dataclass(frozen=True)
class ValidationReport:
    ks_distance: float
    matrix_size: int
    trials: int
    ensemble: str
    seed: int
    n_eigenvalues: int

    def to_dict(self):
        return {
            "ks_distance": self.ks_distance,
            "matrix_size": self.matrix_size,
            "trials": self.trials,
            "ensemble": self.ensemble,
            "seed": self.seed,
            "n_eigenvalues": self.n_eigenvalues,
        }


def sample_spectrum(mu, n, rng=None):
    """Deterministic quantile spectrum x_i = quantile(mu, (i - 1/2)/n)."""
    p = (np.arange(n) + 0.5) / n
    return np.array([quantile(mu, pi) for pi in p])


def haar_matrix(n, ensemble, rng):
    """Haar-distributed unitary (or orthogonal) matrix via phase-corrected QR."""
    if ensemble == "unitary":
        g = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    else:
        g = rng.standard_normal((n, n))
    q, r = np.linalg.qr(g)
    d = np.diagonal(r)
    return q * (d / np.abs(d))


def haar_conjugate_spectrum(spec_a, spec_b, ensemble, rng):
    """Sorted eigenvalues of diag(spec_a) + U diag(spec_b) U*."""
    a = np.asarray(spec_a, dtype=float)
    b = np.asarray(spec_b, dtype=float)
    if a.shape != b.shape or a.ndim != 1:
        raise InputError("spectra must be equal-length vectors")
    u = haar_matrix(a.size, ensemble, rng)
    h = np.diag(a) + (u * b[None, :]) @ u.conj().T
    return np.linalg.eigvalsh(h)


def _grid_cdf(dg):
    """Trapezoid-integrated CDF of a DensityGrid, normalized to 1."""
    cdf = np.concatenate(
        [[0.0], np.cumsum(np.diff(dg.grid) * 0.5 * (dg.density[1:] + dg.density[:-1]))]
    )
    return cdf / cdf[-1]


def ks_distance(eigs, dg):
    """KS distance between the empirical CDF of eigs and the grid CDF."""
    eigs = np.sort(np.asarray(eigs, dtype=float))
    model = np.interp(eigs, dg.grid, _grid_cdf(dg))
    n = eigs.size
    emp_hi = np.arange(1, n + 1) / n
    emp_lo = np.arange(0, n) / n
    return float(max(np.max(emp_hi - model), np.max(model - emp_lo)))


def validate(mu_alpha, mu_beta, cfg, dg):
    """Pool eigenvalues of A + U B U* over trials and compare CDFs."""
    spec_a = sample_spectrum(mu_alpha, cfg.matrix_size)
    spec_b = sample_spectrum(mu_beta, cfg.matrix_size)
    children = np.random.SeedSequence(cfg.seed).spawn(cfg.trials)
    pooled = np.concatenate(
        [
            haar_conjugate_spectrum(
                spec_a, spec_b, cfg.ensemble, np.random.default_rng(ss)
            )
            for ss in children
        ]
    )
    if pooled.min() < dg.grid[0] or pooled.max() > dg.grid[-1]:
        raise InputError(
            "empirical spectrum escapes the density grid window "
            f"[{dg.grid[0]}, {dg.grid[-1]}]"
        )
    return ValidationReport(
        ks_distance=ks_distance(pooled, dg),
        matrix_size=cfg.matrix_size,
        trials=cfg.trials,
        ensemble=cfg.ensemble,
        seed=cfg.seed,
        n_eigenvalues=int(pooled.size),
    )


def component_occupancy(eigs, components):
    """Fraction of eigenvalues inside each (left, right) support component."""
    eigs = np.asarray(eigs, dtype=float)
    return [
        float(np.mean((eigs >= l) & (eigs <= r))) for l, r in components
    ]
