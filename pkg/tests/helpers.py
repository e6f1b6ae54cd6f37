"""Shared builders and closed-form oracles for the test suite."""

import numpy as np

from freeconv.measures import build_measure


def jacobi(a, b, tm=0.5, tp=0.5, w=1.0, h=(1.0,)):
    return {
        "a": a,
        "b": b,
        "t_minus": tm,
        "t_plus": tp,
        "h": list(h),
        "weight": w,
    }


def semicircle():
    """Standard semicircle on [-2, 2], variance 1."""
    return build_measure({"components": [jacobi(-2.0, 2.0)]})


def bernoulli():
    """Symmetric two-point measure at +/-1."""
    return build_measure(
        {"atoms": [{"x": -1.0, "mass": 0.5}, {"x": 1.0, "mass": 0.5}]},
        allow_atomic=True,
    )


def symmetric_two_cut(w_left=0.5):
    return build_measure(
        {
            "components": [
                jacobi(-2.0, -1.0, w=w_left),
                jacobi(1.0, 2.0, w=1.0 - w_left),
            ]
        }
    )


def random_measure(rng, n_comp=None, n_atoms=None, planted_atom_mass=None):
    """Random admissible measure: 1-3 disjoint Jacobi components laid out
    left to right, 0-2 atoms outside the components, random edge exponents
    in (-0.9, 0.9)."""
    n_comp = int(rng.integers(1, 4)) if n_comp is None else n_comp
    n_atoms = int(rng.integers(0, 3)) if n_atoms is None else n_atoms
    comps, x = [], float(rng.uniform(-4, -2))
    for _ in range(n_comp):
        length = float(rng.uniform(0.5, 2.0))
        comps.append(
            jacobi(
                x,
                x + length,
                tm=float(rng.uniform(-0.9, 0.9)),
                tp=float(rng.uniform(-0.9, 0.9)),
            )
        )
        x += length + float(rng.uniform(0.6, 2.0))
    atoms = []
    spots = [
        comps[0]["a"] - float(rng.uniform(0.5, 1.5)),
        x + float(rng.uniform(0.5, 1.5)),
    ]
    masses = [float(rng.uniform(0.05, 0.3)) for _ in range(n_atoms)]
    if planted_atom_mass is not None:
        masses = [planted_atom_mass] + masses[: max(n_atoms - 1, 0)]
    for spot, mass in zip(spots, masses):
        atoms.append({"x": spot, "mass": mass})
    w = rng.uniform(0.2, 1.0, n_comp)
    w = w / w.sum() * (1.0 - sum(a["mass"] for a in atoms))
    for c, wi in zip(comps, w):
        c["weight"] = float(wi)
    return build_measure({"components": comps, "atoms": atoms}, allow_atomic=True)


def random_ac(rng, n_comp):
    """Random purely absolutely continuous multi-cut measure."""
    return random_measure(rng, n_comp=n_comp, n_atoms=0)


# ---------------------------------------------------------------- oracles

def sc_m(z):
    """Cauchy transform of the standard semicircle (branch with Im m > 0
    in the upper half plane)."""
    z = np.asarray(z, dtype=complex)
    s = np.sqrt(z * z - 4.0)
    s = np.where(np.imag(s) * np.imag(z) < 0, -s, s)
    return (-z + s) / 2.0


def sc2_m(z):
    """Cauchy transform of the variance-2 semicircle on [-2*sqrt(2), 2*sqrt(2)]."""
    z = np.asarray(z, dtype=complex)
    s = np.sqrt(z * z - 8.0)
    s = np.where(np.imag(s) * np.imag(z) < 0, -s, s)
    return (-z + s) / 4.0


def sc2_density(x):
    x = np.asarray(x, dtype=float)
    return np.where(x * x < 8.0, np.sqrt(np.maximum(8.0 - x * x, 0.0)) / (4 * np.pi), 0.0)


def arcsine_density(x):
    x = np.asarray(x, dtype=float)
    return np.where(
        x * x < 4.0, 1.0 / (np.pi * np.sqrt(np.maximum(4.0 - x * x, 1e-300))), 0.0
    )
