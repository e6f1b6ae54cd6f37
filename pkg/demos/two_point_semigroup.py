"""Semigroup of the symmetric two-point measure: atoms spread into an arcsine law.

The free convolution square of (delta_{-1} + delta_{+1})/2 is the arcsine
distribution 1/(pi sqrt(4 - x^2)) on [-2, 2] -- the atoms dissolve completely
into an absolutely continuous density with inverse-square-root edge blowup.
"""

import numpy as np

from freeconv.measures import build_measure
from freeconv.spectral import density_grid, detect_support

two_point = build_measure(
    {"atoms": [{"x": -1.0, "mass": 0.5}, {"x": 1.0, "mass": 0.5}]},
    allow_atomic=True,
)

dg = density_grid("semigroup", two_point, t=2.0, window=(-2.5, 2.5), n_points=801)
inner = np.abs(dg.grid) <= 1.9
exact = 1.0 / (np.pi * np.sqrt(4.0 - dg.grid[inner] ** 2))
print(f"sup density error on [-1.9, 1.9]: {np.max(np.abs(dg.density[inner] - exact)):.3e}")

support = detect_support(dg)
(left, right), = support.components
print(f"detected support: [{left:.9f}, {right:.9f}]  (expected [-2, 2])")

i0 = int(np.argmin(np.abs(dg.grid)))
print(f"density at 0: {dg.density[i0]:.9f}  (expected 1/(2 pi) = {1/(2*np.pi):.9f})")
