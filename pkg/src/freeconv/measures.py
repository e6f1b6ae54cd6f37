"""Multi-cut probability measures: Jacobi-type density pieces plus point masses.

Each absolutely continuous piece lives on an interval [a, b] with density

    rho(x) = c * (x - a)**t_minus * (b - x)**t_plus * h(x),

where t_minus, t_plus are in (-1, 1) and h is a polynomial strictly positive
on [a, b].  The constant c is fixed so the piece integrates to its weight.
Atoms are (location, mass) pairs.  Total mass is always 1.
"""

import json
from dataclasses import dataclass, field

import numpy as np
from scipy.special import beta as beta_fn
from scipy.special import roots_jacobi


class InputError(ValueError):
    """Invalid measure specification or bad user input."""


MASS_TOL = 1e-12
CENTER_TOL = 1e-10
ATOM_ENDPOINT_TOL = 1e-9


def _polyval(coeffs, x):
    """Evaluate a polynomial with coefficients in increasing-degree order."""
    return np.polynomial.polynomial.polyval(x, np.asarray(coeffs, dtype=float))


@dataclass(frozen=True)
class JacobiComponent:
    left_endpoint: float
    right_endpoint: float
    left_exponent: float
    right_exponent: float
    modulation_coeffs: tuple = (1.0,)
    weight: float = 1.0

    def __post_init__(self):
        a, b = self.left_endpoint, self.right_endpoint
        if not (np.isfinite(a) and np.isfinite(b) and a < b):
            raise InputError(f"component endpoints must satisfy a < b, got [{a}, {b}]")
        for t in (self.left_exponent, self.right_exponent):
            if not -1.0 < t < 1.0:
                raise InputError(f"edge exponent {t} outside (-1, 1)")
        if not self.weight > 0:
            raise InputError(f"component weight must be positive, got {self.weight}")
        # h > 0 checked at the Chebyshev points of the interval plus endpoints
        k = np.arange(33)
        cheb = 0.5 * (a + b) + 0.5 * (b - a) * np.cos(np.pi * k / 32)
        probe = np.concatenate(([a, b], cheb))
        if np.any(_polyval(self.modulation_coeffs, probe) <= 0):
            raise InputError("modulation polynomial h must be positive on the component")

    @property
    def length(self):
        return self.right_endpoint - self.left_endpoint

    def h(self, x):
        return _polyval(self.modulation_coeffs, x)


@dataclass(frozen=True)
class Atom:
    location: float
    mass: float

    def __post_init__(self):
        if not np.isfinite(self.location):
            raise InputError("atom location must be finite")
        if not 0 < self.mass < 1:
            raise InputError(f"atom mass must lie in (0, 1), got {self.mass}")


@dataclass(frozen=True)
class MultiCutMeasure:
    components: tuple
    atoms: tuple
    normalization_constants: tuple

    @property
    def n_ac(self):
        return len(self.components)

    @property
    def support_pieces(self):
        """Sorted support pieces: ('ac', a, b) intervals and ('pp', x, x) points."""
        pieces = [("ac", c.left_endpoint, c.right_endpoint) for c in self.components]
        pieces += [("pp", a.location, a.location) for a in self.atoms]
        return sorted(pieces, key=lambda p: p[1])

    @property
    def support_min(self):
        return self.support_pieces[0][1]

    @property
    def support_max(self):
        return max(p[2] for p in self.support_pieces)

    def density(self, x):
        """Absolutely continuous density at x (vectorized)."""
        x = np.asarray(x, dtype=float)
        out = np.zeros_like(x, dtype=float)
        for comp, c in zip(self.components, self.normalization_constants):
            a, b = comp.left_endpoint, comp.right_endpoint
            inside = (x > a) & (x < b)
            xi = x[inside]
            out[inside] = (
                c
                * (xi - a) ** comp.left_exponent
                * (b - xi) ** comp.right_exponent
                * comp.h(xi)
            )
        return out

    def shifted(self, s):
        """The pushforward under x -> x + s (same shape, same constants)."""
        comps = tuple(
            JacobiComponent(
                c.left_endpoint + s,
                c.right_endpoint + s,
                c.left_exponent,
                c.right_exponent,
                _shift_poly(c.modulation_coeffs, s),
                c.weight,
            )
            for c in self.components
        )
        atoms = tuple(Atom(a.location + s, a.mass) for a in self.atoms)
        return MultiCutMeasure(comps, atoms, self.normalization_constants)


def _shift_poly(coeffs, s):
    """Coefficients of p(x - s) given those of p(x), increasing-degree order."""
    p = np.polynomial.Polynomial(np.asarray(coeffs, dtype=float))
    return tuple((p(np.polynomial.Polynomial([-s, 1.0]))).coef)


def _component_base_integral(comp):
    """Integral of (x-a)^tm (b-x)^tp h(x) over the component."""
    tm, tp = comp.left_exponent, comp.right_exponent
    half = comp.length / 2.0
    if len(comp.modulation_coeffs) == 1:
        return comp.modulation_coeffs[0] * comp.length ** (tm + tp + 1) * beta_fn(
            1 + tm, 1 + tp
        )
    deg = len(comp.modulation_coeffs) - 1
    n = max(8, deg // 2 + 2)
    u, w = roots_jacobi(n, tp, tm)
    x = comp.left_endpoint + half * (u + 1)
    return half ** (tm + tp + 1) * np.sum(w * comp.h(x))


def _validate_layout(components, atoms):
    comps = sorted(components, key=lambda c: c.left_endpoint)
    for c1, c2 in zip(comps, comps[1:]):
        if c1.right_endpoint >= c2.left_endpoint:
            raise InputError(
                f"components overlap: [{c1.left_endpoint}, {c1.right_endpoint}] and "
                f"[{c2.left_endpoint}, {c2.right_endpoint}]"
            )
    atoms = sorted(atoms, key=lambda a: a.location)
    locs = [a.location for a in atoms]
    for l1, l2 in zip(locs, locs[1:]):
        if l2 - l1 < ATOM_ENDPOINT_TOL:
            raise InputError(f"coincident atoms near {l1}")
    for a in atoms:
        for c in comps:
            if (
                c.left_endpoint - ATOM_ENDPOINT_TOL
                < a.location
                < c.right_endpoint + ATOM_ENDPOINT_TOL
            ):
                raise InputError(
                    f"atom at {a.location} lies inside the component "
                    f"[{c.left_endpoint}, {c.right_endpoint}]"
                )
    total = sum(c.weight for c in comps) + sum(a.mass for a in atoms)
    if abs(total - 1.0) > MASS_TOL:
        raise InputError(f"total mass {total} differs from 1 by more than {MASS_TOL}")
    return tuple(comps), tuple(atoms)


def build_measure(spec, allow_atomic=False):
    """Build a MultiCutMeasure from a spec dict (see from_json for the format)."""
    comp_specs = spec.get("components", [])
    atom_specs = spec.get("atoms", [])
    components = [
        JacobiComponent(
            float(cs["a"]),
            float(cs["b"]),
            float(cs["t_minus"]),
            float(cs["t_plus"]),
            tuple(float(v) for v in cs.get("h", [1.0])),
            float(cs["weight"]),
        )
        for cs in comp_specs
    ]
    atoms = [Atom(float(at["x"]), float(at["mass"])) for at in atom_specs]
    components, atoms = _validate_layout(components, atoms)
    if atoms and not allow_atomic:
        raise InputError("measure has atoms; pass allow_atomic to accept them")
    if not components and not atoms:
        raise InputError("measure is empty")
    consts = tuple(c.weight / _component_base_integral(c) for c in components)
    mu = MultiCutMeasure(components, atoms, consts)
    if spec.get("centered", False):
        m1 = moment(mu, 1)
        if abs(m1) > CENTER_TOL:
            mu = mu.shifted(-m1)
    return mu


def from_json(path, allow_atomic=False):
    """Load a measure spec JSON file.

    Format: {"components": [{"a", "b", "t_minus", "t_plus", "h": [coeffs],
    "weight"}], "atoms": [{"x", "mass"}], "centered": bool}
    """
    try:
        with open(path) as f:
            spec = json.load(f)
    except OSError as e:
        raise InputError(f"cannot read measure spec {path}: {e}") from e
    except json.JSONDecodeError as e:
        raise InputError(f"invalid JSON in measure spec {path}: {e}") from e
    try:
        return build_measure(spec, allow_atomic=allow_atomic)
    except (KeyError, TypeError, ValueError) as e:
        if isinstance(e, InputError):
            raise
        raise InputError(f"malformed measure spec {path}: {e}") from e


def to_spec(mu):
    """Serialize a measure back to the spec dict format (bit-exact fields)."""
    return {
        "components": [
            {
                "a": c.left_endpoint,
                "b": c.right_endpoint,
                "t_minus": c.left_exponent,
                "t_plus": c.right_exponent,
                "h": list(c.modulation_coeffs),
                "weight": c.weight,
            }
            for c in mu.components
        ],
        "atoms": [{"x": a.location, "mass": a.mass} for a in mu.atoms],
        "centered": False,
    }


def component_quadrature(comp, c, n):
    """Nodes and weights integrating f against this component's density.

    Returns (x, w) with sum(w * f(x)) ~ integral of f d(component measure);
    the Jacobi weight absorbs both endpoint singularities and w includes the
    normalization constant and the polynomial h.
    """
    tm, tp = comp.left_exponent, comp.right_exponent
    u, w = roots_jacobi(n, tp, tm)
    half = comp.length / 2.0
    x = comp.left_endpoint + half * (u + 1)
    return x, c * half ** (tm + tp + 1) * w * comp.h(x)


def moment(mu, k):
    """k-th raw moment, k <= 8."""
    if not (isinstance(k, (int, np.integer)) and 0 <= k <= 8):
        raise InputError(f"moment order must be an integer in [0, 8], got {k}")
    total = 0.0
    for comp, c in zip(mu.components, mu.normalization_constants):
        deg = k + len(comp.modulation_coeffs) - 1
        x, w = component_quadrature(comp, c, max(8, deg // 2 + 2))
        total += np.sum(w * x**k)
    for a in mu.atoms:
        total += a.mass * a.location**k
    return float(total)


def variance(mu):
    m1 = moment(mu, 1)
    return moment(mu, 2) - m1 * m1


def _component_partial_mass(comp, c, x):
    """Mass of the component's density on [a, x], by adjusted Gauss-Jacobi."""
    a, b = comp.left_endpoint, comp.right_endpoint
    if x <= a:
        return 0.0
    if x >= b:
        return comp.weight
    tm, tp = comp.left_exponent, comp.right_exponent

    def _one_sided(lo, hi, t_at_lo, t_at_hi):
        # integrate c (s-a)^tm (b-s)^tp h(s) over [lo, hi]; the Jacobi weight
        # carries t_at_lo at lo and t_at_hi at hi, the rest is smooth
        half = (hi - lo) / 2.0
        prev = None
        for n in (16, 32, 64, 128, 256, 512, 1024):
            u, w = roots_jacobi(n, t_at_hi, t_at_lo)
            s = lo + half * (u + 1)
            smooth = c * comp.h(s)
            if t_at_lo == 0.0:
                smooth = smooth * (s - a) ** tm
            if t_at_hi == 0.0:
                smooth = smooth * (b - s) ** tp
            val = half ** (t_at_lo + t_at_hi + 1) * np.sum(w * smooth)
            if prev is not None and abs(val - prev) <= 1e-13 * (1 + abs(val)):
                return val
            prev = val
        return val

    if x - a <= b - x:
        return _one_sided(a, x, tm, 0.0)
    return comp.weight - _one_sided(x, b, 0.0, tp)


def cdf(mu, x):
    """CDF of the measure at x (right-continuous at atoms)."""
    total = 0.0
    for comp, c in zip(mu.components, mu.normalization_constants):
        total += _component_partial_mass(comp, c, x)
    for a in mu.atoms:
        if a.location <= x:
            total += a.mass
    return float(total)


def quantile(mu, p):
    """x with CDF(x) = p to 1e-10; atom locations inside their CDF jumps."""
    if not 0 < p < 1:
        raise InputError(f"quantile level must lie in (0, 1), got {p}")
    acc = 0.0
    for kind, lo, hi in mu.support_pieces:
        if kind == "pp":
            mass = next(a.mass for a in mu.atoms if a.location == lo)
            if p <= acc + mass + 1e-15:
                return float(lo)
            acc += mass
        else:
            comp_idx = next(
                i
                for i, c in enumerate(mu.components)
                if c.left_endpoint == lo and c.right_endpoint == hi
            )
            comp = mu.components[comp_idx]
            c = mu.normalization_constants[comp_idx]
            if p <= acc + comp.weight + 1e-15:
                target = p - acc
                a, b = lo, hi
                for _ in range(200):
                    mid = 0.5 * (a + b)
                    val = _component_partial_mass(comp, c, mid)
                    if abs(val - target) < 1e-10 * 0.5:
                        return float(mid)
                    if val < target:
                        a = mid
                    else:
                        b = mid
                    if b - a < 1e-15 * max(1.0, abs(a)):
                        break
                return float(0.5 * (a + b))
            acc += comp.weight
    # numerical slack at p ~ 1: return the top of the support
    return float(mu.support_max)
