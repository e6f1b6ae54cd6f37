"""Cauchy-Stieltjes transform machinery for multi-cut measures.

Evaluates m(z) = int 1/(x - z) dmu, its negative reciprocal F = -1/m, their
derivatives, the energy integrals I_mu and I_muhat, and the Nevanlinna data
of the auxiliary measure muhat defined by F(w) - w = shift + m_muhat(w).

Quadrature: per component, a Gauss-Jacobi rule matched to the component's own
edge exponents, with node doubling 8 -> 4096 until two successive evaluations
agree to relative 1e-12.  Points whose real part falls inside a component with
small imaginary part are handled by splitting the component at Re z.
"""

from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.special import roots_jacobi

from freeconv.measures import InputError

NODE_LADDER = (8, 16, 32, 64, 128, 256, 512, 1024, 2048, 4096)
QUAD_RTOL = 1e-12
ZERO_M_TOL = 1e-13
BOUNDARY_GUARD = 1e-3


class NumericalError(RuntimeError):
    """Quadrature or iteration failed to converge."""


@dataclass(frozen=True)
class NevanlinnaData:
    total_mass: float
    pure_points: tuple  # (location, mass) pairs
    shift: float


@lru_cache(maxsize=None)
def _rule(alpha, beta, n):
    return roots_jacobi(n, alpha, beta)


def _component_kernel_sum(comp, c, z, power, n):
    """sum over nodes of w_j (x_j - z)^(-power), vectorized over z."""
    tm, tp = comp.left_exponent, comp.right_exponent
    u, w = _rule(tp, tm, n)
    half = comp.length / 2.0
    x = comp.left_endpoint + half * (u + 1)
    wts = c * half ** (tm + tp + 1) * w * comp.h(x)
    d = x[None, :] - z[:, None]
    if power == 2:
        d = d * d
    return (wts[None, :] / d).sum(axis=1)


def _needs_split(comp, z):
    """True where z is close to the component and plain node doubling cannot
    resolve the kernel: Re z interior, or just outside an endpoint."""
    r, e = np.real(z), np.abs(np.imag(z))
    a, b = comp.left_endpoint, comp.right_endpoint
    L = comp.length
    inside = (r > a) & (r < b)
    near_edge = ((r >= a - 0.01 * L) & (r <= a)) | ((r >= b) & (r <= b + 0.01 * L))
    return (inside | near_edge) & (e < L / 10.0)


def _panel_value(comp, c, z, power, lo, hi, t_lo, t_hi):
    """Integral of the component's density times the kernel over [lo, hi].

    The Jacobi weight on the panel carries exponent t_lo at lo and t_hi at hi
    (0 where the density is smooth); missing endpoint factors are folded into
    the smooth part.  Node doubling with plateau acceptance.
    """
    a, b = comp.left_endpoint, comp.right_endpoint
    tm, tp = comp.left_exponent, comp.right_exponent
    half = (hi - lo) / 2.0
    prev = None
    best_val, best_diff = None, np.inf
    for n in NODE_LADDER:
        u, w = _rule(t_hi, t_lo, n)
        x = lo + half * (u + 1)
        smooth = c * comp.h(x)
        if t_lo == 0.0:
            smooth = smooth * ((lo - a) + half * (u + 1)) ** tm
        if t_hi == 0.0:
            smooth = smooth * ((b - lo) - half * (u + 1)) ** tp
        # (lo - z) is a fixed offset: forming d this way avoids cancellation
        # when x and z are both near lo
        d = (lo - z) + half * (u + 1)
        if power == 2:
            d = d * d
        val = half ** (t_lo + t_hi + 1) * np.sum(w * smooth / d)
        if prev is not None:
            diff = abs(val - prev)
            if diff <= QUAD_RTOL * (1 + abs(val)):
                return val, True
            if diff < best_diff:
                best_val, best_diff = val, diff
            elif diff > 100 * best_diff:
                break  # round-off divergence at large node counts
        prev = val
    # accept the round-off plateau: successive rules agreed to summation noise
    return best_val, best_diff <= 1e3 * QUAD_RTOL * (1 + abs(best_val))


def _graded_panels(comp, c, z, power, lo, hi, anchor_at_lo, eps):
    """Integrate the component kernel over [lo, hi] with panel sizes growing
    dyadically away from the anchor end, so every panel sees the pole at a
    distance comparable to its own length.  Panels touching a component
    endpoint keep the Jacobi weight there.  Scalar z."""
    a, b = comp.left_endpoint, comp.right_endpoint
    length = hi - lo
    offsets = [0.0]
    s = min(eps, length / 2)
    while s < length / 2:
        offsets.append(s)
        s *= 2
    offsets.append(length)
    if anchor_at_lo:
        pts = [lo + s for s in offsets]
    else:
        pts = [hi - s for s in reversed(offsets)]
    pts[0], pts[-1] = lo, hi
    total = 0.0 + 0.0j
    ok_all = True
    for p, q in zip(pts, pts[1:]):
        t_lo = comp.left_exponent if p == a else 0.0
        t_hi = comp.right_exponent if q == b else 0.0
        v, ok = _panel_value(comp, c, z, power, p, q, t_lo, t_hi)
        total += v
        ok_all = ok_all and ok
    return total, ok_all


def _split_component_value(comp, c, z, power):
    """Evaluate one component's kernel integral for z close to the component,
    grading the panels toward the point of [a, b] nearest to Re z."""
    a, b = comp.left_endpoint, comp.right_endpoint
    r = float(np.real(z))
    anchor = min(max(r, a), b)
    eps = max(abs(complex(z) - anchor), 1e-9 * comp.length)
    total = 0.0 + 0.0j
    ok_all = True
    if anchor > a:
        v, ok = _graded_panels(comp, c, z, power, a, anchor, False, eps)
        total += v
        ok_all = ok_all and ok
    if anchor < b:
        v, ok = _graded_panels(comp, c, z, power, anchor, b, True, eps)
        total += v
        ok_all = ok_all and ok
    return total, ok_all


def _kernel_integral(mu, z, power):
    """int (x - z)^(-power) dmu over the AC part plus atoms, vectorized."""
    z = np.asarray(z, dtype=complex)
    flat = z.ravel()
    out = np.zeros(flat.shape, dtype=complex)

    # route points near a component through the split path, the rest through
    # plain node doubling
    split_mask = np.zeros(flat.shape, dtype=bool)
    for comp in mu.components:
        split_mask |= _needs_split(comp, flat)

    plain_idx = np.nonzero(~split_mask)[0]
    if plain_idx.size:
        zp = flat[plain_idx]
        res = np.zeros(zp.shape, dtype=complex)
        active = np.arange(zp.size)
        prev = None
        # track the closest pair of successive rules per point: large node
        # counts can drift back out of agreement through round-off
        best_val = np.zeros(zp.shape, dtype=complex)
        best_diff = np.full(zp.shape, np.inf)
        for n in NODE_LADDER:
            vals = np.zeros(active.size, dtype=complex)
            za = zp[active]
            for comp, c in zip(mu.components, mu.normalization_constants):
                vals += _component_kernel_sum(comp, c, za, power, n)
            if prev is not None:
                diff = np.abs(vals - prev)
                done = diff <= QUAD_RTOL * (1 + np.abs(vals))
                res[active[done]] = vals[done]
                improve = diff < best_diff[active]
                best_val[active[improve]] = vals[improve]
                best_diff[active[improve]] = diff[improve]
                active = active[~done]
                prev = vals[~done]
                if active.size == 0:
                    break
            else:
                prev = vals
        if active.size:
            # accept the round-off plateau; flag genuine non-convergence
            bd, bv = best_diff[active], best_val[active]
            bad = bd > 1e3 * QUAD_RTOL * (1 + np.abs(bv))
            if np.any(bad):
                worst = int(np.argmax(np.where(bad, bd, 0.0)))
                raise NumericalError(
                    f"quadrature failed to converge at z={zp[active[worst]]}"
                )
            res[active] = bv
        out[plain_idx] = res

    for i in np.nonzero(split_mask)[0]:
        zi = complex(flat[i])
        val = 0.0 + 0.0j
        for comp, c in zip(mu.components, mu.normalization_constants):
            if _needs_split(comp, np.asarray([zi]))[0]:
                v, ok = _split_component_value(comp, c, zi, power)
                if not ok:
                    raise NumericalError(
                        f"quadrature failed to converge at z={zi} "
                        f"(too close to the support)"
                    )
                val += v
            else:
                # single far component evaluated by plain doubling
                prev, bv, bd = None, None, np.inf
                for n in NODE_LADDER:
                    v = _component_kernel_sum(comp, c, np.asarray([zi]), power, n)[0]
                    if prev is not None:
                        d = abs(v - prev)
                        if d <= QUAD_RTOL * (1 + abs(v)):
                            bv = v
                            break
                        if d < bd:
                            bv, bd = v, d
                    prev = v
                val += bv
        out[i] = val

    for a in mu.atoms:
        d = a.location - flat
        if np.any(d == 0):
            raise InputError(f"evaluation exactly on the atom at {a.location}")
        if power == 1:
            out += a.mass / d
        else:
            out += a.mass / (d * d)
    return out.reshape(z.shape) if z.shape else out[0]


def _check_boundary(mu, z):
    z = np.asarray(z, dtype=complex)
    r, e = np.real(z), np.abs(np.imag(z))
    for comp in mu.components:
        a, b = comp.left_endpoint, comp.right_endpoint
        bad = (r >= a) & (r <= b) & (e < BOUNDARY_GUARD * comp.length)
        if np.any(bad):
            raise InputError(
                "evaluation too close to the support of the AC part; boundary "
                "values are produced by the subordination route (density module)"
            )


def cauchy_m(mu, z, guard=True):
    """m(z) = int 1/(x - z) dmu; vectorized over z."""
    if guard:
        _check_boundary(mu, z)
    return _kernel_integral(mu, z, 1)


def m_prime(mu, z, guard=True):
    """m'(z) = int 1/(x - z)^2 dmu."""
    if guard:
        _check_boundary(mu, z)
    return _kernel_integral(mu, z, 2)


def F(mu, z, guard=True):
    """F(z) = -1/m(z)."""
    m = cauchy_m(mu, z, guard=guard)
    if np.any(np.abs(m) < ZERO_M_TOL):
        raise NumericalError("F undefined: m(z) vanishes at an evaluation point")
    return -1.0 / m


def F_prime(mu, z, guard=True):
    """F'(z) = m'(z)/m(z)^2."""
    m = cauchy_m(mu, z, guard=guard)
    if np.any(np.abs(m) < ZERO_M_TOL):
        raise NumericalError("F' undefined: m(z) vanishes at an evaluation point")
    return m_prime(mu, z, guard=guard) / (m * m)


def I_mu(mu, w, guard=True):
    """I(w) = int 1/|x - w|^2 dmu: Im m(w)/Im w off the real axis, m'(w) on it."""
    w = complex(w)
    if w.imag > 0:
        return float(np.imag(cauchy_m(mu, w, guard=guard)) / w.imag)
    val = m_prime(mu, w, guard=guard)
    return float(np.real(val))


def I_mu_hat(mu, w, guard=True):
    """I_muhat(w) = I_mu(w)/|m(w)|^2 - 1; +inf when m(w) vanishes."""
    w = complex(w)
    m = cauchy_m(mu, w, guard=guard)
    if abs(m) < ZERO_M_TOL:
        return float("inf")
    return float(I_mu(mu, w, guard=guard) / abs(m) ** 2 - 1.0)


def hat_data(mu):
    """Nevanlinna data of muhat: F(w) - w = shift + int 1/(x - w) dmuhat."""
    from freeconv.analysis import gap_zeros  # deferred: analysis imports transform

    from freeconv.measures import moment

    zeros = gap_zeros(mu)
    pure = tuple(
        (float(e), float(1.0 / np.real(m_prime(mu, e)))) for e in zeros
    )
    return NevanlinnaData(
        total_mass=moment(mu, 2),
        pure_points=pure,
        shift=-moment(mu, 1),
    )


class MeasureTransform:
    """F/F' provider backed by a MultiCutMeasure (the solvers' interface)."""

    def __init__(self, mu):
        self.mu = mu

    def F(self, z):
        return F(self.mu, z, guard=False)

    def F_prime(self, z):
        return F_prime(self.mu, z, guard=False)

    def m(self, z):
        return cauchy_m(self.mu, z, guard=False)

    def m_prime(self, z):
        return m_prime(self.mu, z, guard=False)
