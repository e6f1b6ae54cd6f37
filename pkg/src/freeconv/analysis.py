"""Classification sets, the semigroup edge equation, and bound verdicts.

m is strictly increasing on every connected component of the complement of
the support, positive left of the support and negative right of it, so each
bounded gap holds at most one zero.  Those zeros are the pure points of the
auxiliary measure muhat (mass 1/m'(E)) and the candidate locations where the
convolution support splits.
"""

from dataclasses import dataclass, field

import numpy as np

from freeconv.measures import InputError, MultiCutMeasure, moment, variance
from freeconv.transform import (
    NumericalError,
    F,
    F_prime,
    _rule,
    cauchy_m,
    m_prime,
)

P_SET_TOL = 1e-12
ZERO_XTOL = 1e-12


def _without_component(mu, i):
    comps = tuple(c for j, c in enumerate(mu.components) if j != i)
    consts = tuple(c for j, c in enumerate(mu.normalization_constants) if j != i)
    return MultiCutMeasure(comps, mu.atoms, consts)


def _m_at_component_endpoint(mu, i, which):
    """Limit of m at an endpoint of component i with positive exponent there.

    The Cauchy kernel is absorbed into the Jacobi weight: 1/(x-b) lowers the
    right exponent by one (sign flip), 1/(x-a) lowers the left exponent.
    """
    comp = mu.components[i]
    c = mu.normalization_constants[i]
    a, b = comp.left_endpoint, comp.right_endpoint
    tm, tp = comp.left_exponent, comp.right_exponent
    half = comp.length / 2.0
    if which == "right":
        e, alpha, beta, sign = b, tp - 1.0, tm, -1.0
    else:
        e, alpha, beta, sign = a, tp, tm - 1.0, 1.0
    prev = None
    val = 0.0
    for n in (16, 32, 64, 128, 256, 512, 1024):
        u, w = _rule(alpha, beta, n)
        x = a + half * (u + 1)
        val = sign * c * half ** (alpha + beta + 1) * np.sum(w * comp.h(x))
        if prev is not None and abs(val - prev) <= 1e-13 * (1 + abs(val)):
            break
        prev = val
    rest = _without_component(mu, i)
    if rest.components or rest.atoms:
        val += float(np.real(cauchy_m(rest, e, guard=False)))
    return val


def _gap_end_limits(mu):
    """For each bounded gap, the one-sided limits of m at both ends.

    Returns a list of (l, r, v_l, v_r) with v in R cup {+-inf}.
    """
    pieces = mu.support_pieces
    comp_index = {
        (c.left_endpoint, c.right_endpoint): i for i, c in enumerate(mu.components)
    }
    gaps = []
    for left, right in zip(pieces, pieces[1:]):
        l = left[2]
        r = right[1]
        if left[0] == "pp":
            v_l = -np.inf
        else:
            i = comp_index[(left[1], left[2])]
            comp = mu.components[i]
            v_l = (
                -np.inf
                if comp.right_exponent <= 0
                else _m_at_component_endpoint(mu, i, "right")
            )
        if right[0] == "pp":
            v_r = np.inf
        else:
            i = comp_index[(right[1], right[2])]
            comp = mu.components[i]
            v_r = (
                np.inf
                if comp.left_exponent <= 0
                else _m_at_component_endpoint(mu, i, "left")
            )
        gaps.append((l, r, v_l, v_r))
    return gaps


def _m_real(mu, u):
    return float(np.real(cauchy_m(mu, u, guard=False)))


def gap_zeros(mu):
    """Zeros of m in the bounded gaps of the support, at most one per gap."""
    zeros = []
    for l, r, v_l, v_r in _gap_end_limits(mu):
        if not (v_l < 0 < v_r):
            continue
        g = r - l
        # grow brackets geometrically toward the ends until the signs show
        u_lo = None
        for k in range(1, 21):
            u = l + g * 0.5**k
            if _m_real(mu, u) < 0:
                u_lo = u
                break
        u_hi = None
        for k in range(1, 21):
            u = r - g * 0.5**k
            if _m_real(mu, u) > 0:
                u_hi = u
                break
        if u_lo is None or u_hi is None or u_lo >= u_hi:
            # zero pressed against a gap end beyond quadrature resolution
            zeros.append(l + g * 0.5**20 if u_lo is None else r - g * 0.5**20)
            continue
        a, b = u_lo, u_hi
        while b - a > ZERO_XTOL * max(1.0, abs(a)):
            mid = 0.5 * (a + b)
            if _m_real(mu, mid) < 0:
                a = mid
            else:
                b = mid
        zeros.append(0.5 * (a + b))
    return [float(z) for z in zeros]


def classify_p_sets(mu_a, mu_b):
    """Gap zeros of each measure passing the variance criterion of the other.

    E in P_alpha iff Var(mu_b) * m_a'(E) <= 1 (ties included).  The
    equivalent muhat comparison (total mass of muhat_b vs the muhat_a point
    mass 1/m'(E)) is asserted on every classified point.
    """

    def classify(mu_x, mu_y):
        var_y = variance(mu_y)
        out = []
        for e in gap_zeros(mu_x):
            mp = float(np.real(m_prime(mu_x, e, guard=False)))
            crit = var_y * mp
            member = crit <= 1.0 + P_SET_TOL
            # cross-check: muhat_y(R) <= muhat_x({E}) is the same inequality
            alt = moment(mu_y, 2) - moment(mu_y, 1) ** 2 <= 1.0 / mp + P_SET_TOL / mp
            if member != alt:
                raise NumericalError(
                    f"P-set criteria disagree at E={e}: {crit} vs muhat masses"
                )
            if member:
                out.append(float(e))
        return out

    return classify(mu_a, mu_b), classify(mu_b, mu_a)


def n_set(mu):
    """Component indices i (1-based) with m < 0 throughout the gap left of
    component i+1 and m > 0 throughout the gap right of it.

    Checked at 64 interior sample points per gap; the sign is constant on a
    gap unless m has a zero there, in which case the gap is excluded.
    """
    comps = mu.components
    if len(comps) < 3:
        return set()

    def gap_sign(i):
        l = comps[i].right_endpoint
        r = comps[i + 1].left_endpoint
        u = np.linspace(l + (r - l) / 65, r - (r - l) / 65, 64)
        vals = np.real(cauchy_m(mu, u, guard=False))
        if np.all(vals < 0):
            return -1
        if np.all(vals > 0):
            return 1
        return 0

    signs = [gap_sign(i) for i in range(len(comps) - 1)]
    return {
        i + 1
        for i in range(len(comps) - 2)
        if signs[i] == -1 and signs[i + 1] == 1
    }


def _hat_support_pieces(mu):
    """Support pieces of muhat: the AC intervals plus the gap-zero points."""
    pieces = [(c.left_endpoint, c.right_endpoint) for c in mu.components]
    pieces += [(y, y) for y in gap_zeros(mu)]
    return sorted(pieces)


def semigroup_edges(mu, t):
    """Solve F'(omega) = 1 + 1/(t-1) on the complement of supp(muhat).

    F' - 1 is convex there and diverges at the support, so each bounded gap
    carries up to two roots (bracketed around the golden-section minimum) and
    each unbounded ray exactly one.  Returns (omega, E) pairs with
    E = t*omega - (t-1)*F(omega), sorted by E.
    """
    if t <= 1:
        raise InputError(f"semigroup parameter must satisfy t > 1, got {t}")
    level = 1.0 + 1.0 / (t - 1.0)

    def nudge(w):
        # F extends analytically through atoms of mu, but m itself has a
        # pole there; step off the exact location before evaluating
        for a in mu.atoms:
            d = 1e-9 * max(1.0, abs(a.location))
            if abs(w - a.location) < d:
                return a.location + (d if w >= a.location else -d)
        return w

    def phi(w):
        return float(np.real(F_prime(mu, nudge(w), guard=False))) - level

    pieces = _hat_support_pieces(mu)
    span = pieces[-1][1] - pieces[0][0] or 1.0
    roots = []

    def bisect(a, b, fa):
        # fa is the sign at a; phi has exactly one sign change in [a, b]
        while b - a > 1e-12 * max(1.0, abs(a), abs(b)):
            mid = 0.5 * (a + b)
            if (phi(mid) > 0) == (fa > 0):
                a = mid
            else:
                b = mid
        return 0.5 * (a + b)

    # bounded gaps
    for (l_lo, l_hi), (r_lo, r_hi) in zip(pieces, pieces[1:]):
        l, r = l_hi, r_lo
        if r - l <= 0:
            continue
        g = r - l
        wmin = _golden(phi, l + 1e-8 * g, r - 1e-8 * g, 1e-11 * g)
        fmin = phi(wmin)
        if fmin > 1e-13:
            continue
        if abs(fmin) <= 1e-13:
            roots.append(wmin)
            continue
        lo = None
        for k in range(1, 40):
            u = l + g * 0.5**k
            if u >= wmin:
                continue
            if phi(u) > 0:
                lo = u
                break
        hi = None
        for k in range(1, 40):
            u = r - g * 0.5**k
            if u <= wmin:
                continue
            if phi(u) > 0:
                hi = u
                break
        if lo is not None:
            roots.append(bisect(lo, wmin, 1))
        if hi is not None:
            roots.append(bisect(wmin, hi, -1))

    # unbounded rays: phi decreases from +inf to -1/(t-1) on the right ray
    # (mirror on the left); exactly one root each
    right_end = pieces[-1][1]
    left_end = pieces[0][0]
    for anchor, direction in ((right_end, 1.0), (left_end, -1.0)):
        inner = None
        for k in range(1, 60):
            u = anchor + direction * span * 0.5**k
            if phi(u) > 0:
                inner = u
                break
        outer = None
        for k in range(0, 60):
            u = anchor + direction * span * 2.0**k
            if phi(u) < 0:
                outer = u
                break
        if inner is None or outer is None:
            continue
        a, b = (inner, outer) if direction > 0 else (outer, inner)
        fa = 1 if direction > 0 else -1
        roots.append(bisect(a, b, fa))

    out = []
    for w in roots:
        e = t * w - (t - 1.0) * float(np.real(F(mu, nudge(w), guard=False)))
        out.append((float(w), float(e)))
    return sorted(out, key=lambda p: p[1])


def _golden(f, a, b, tol):
    phi = (np.sqrt(5.0) - 1) / 2
    c, d = b - phi * (b - a), a + phi * (b - a)
    fc, fd = f(c), f(d)
    while d - c > tol:
        if fc < fd:
            b, d, fd = d, c, fc
            c = b - phi * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + phi * (b - a)
            fd = f(d)
    return 0.5 * (c + d)


@dataclass
class BoundsReport:
    kind: str
    measured: dict                # {"I": ..., "C0": ..., "Cinf": ...}
    sets: dict
    lower: int
    upper: int
    verdicts: dict = field(default_factory=dict)

    @property
    def passed(self):
        return all(self.verdicts.values())

    def to_dict(self):
        return {
            "kind": self.kind,
            "measured": self.measured,
            "sets": self.sets,
            "lower": self.lower,
            "upper": self.upper,
            "verdicts": self.verdicts,
        }


def bounds_report(kind, mu_a, support_report, mu_b=None, t=None):
    """Evaluate the applicable component-count inequality chain."""
    I, C0, Cinf = support_report.counts
    ic = I + C0
    if kind == "semigroup":
        if t is None or t <= 1:
            raise InputError("semigroup bounds need t > 1")
        if mu_a.n_ac == 0:
            raise InputError("bound checks assume at least one AC component")
        zeros = gap_zeros(mu_a)
        n_ac = mu_a.n_ac
        n_pp_out = sum(
            1
            for a in mu_a.atoms
            if not any(
                c.left_endpoint < a.location < c.right_endpoint
                for c in mu_a.components
            )
        )
        upper = n_ac + len(zeros)
        chain_upper = 2 * n_ac + n_pp_out - 1
        planted = sum(
            1 for a in mu_a.atoms if abs(a.mass - (1.0 - 1.0 / t)) < 1e-9
        )
        verdicts = {
            "upper": ic <= upper,
            "chain": upper <= chain_upper,
            "cinf": Cinf == planted,
        }
        return BoundsReport(
            kind="semigroup",
            measured={"I": I, "C0": C0, "Cinf": Cinf},
            sets={"Z_mu": zeros, "n_ac": n_ac, "n_pp_out": n_pp_out},
            lower=1,
            upper=upper,
            verdicts=verdicts,
        )

    if kind != "pair":
        raise InputError(f"unknown bounds kind {kind!r}")
    if mu_b is None:
        raise InputError("pair bounds need two measures")
    if mu_a.atoms or mu_b.atoms:
        raise InputError("pair bounds assume absolutely continuous measures")
    # orient so the first measure has at least as many components
    swapped = mu_b.n_ac > mu_a.n_ac
    ma, mb = (mu_b, mu_a) if swapped else (mu_a, mu_b)
    n_a, n_b = ma.n_ac, mb.n_ac
    p_a, p_b = classify_p_sets(ma, mb)
    sets = {
        "E_alpha": gap_zeros(ma),
        "E_beta": gap_zeros(mb),
        "P_alpha": p_a,
        "P_beta": p_b,
        "n_alpha": n_a,
        "n_beta": n_b,
        "swapped": swapped,
    }
    if n_b == 1:
        nset = n_set(ma)
        sets["N_mu_alpha"] = sorted(nset)
        lower = 1 + len(p_a)
        upper = n_a - len(nset)
        verdicts = {"lower": lower <= ic, "upper": ic <= upper}
    else:
        lower = 1 + len(p_a) + len(p_b)
        upper = (len(p_b) + 1) * (n_a - 1) + (len(p_a) + 1) * (n_b - 1) + 1
        verdicts = {
            "lower": lower <= ic,
            "upper": ic <= upper,
            "remark_bound": upper < 2 * n_a * n_b,
        }
    return BoundsReport(
        kind="pair",
        measured={"I": I, "C0": C0, "Cinf": 0},
        sets=sets,
        lower=lower,
        upper=upper,
        verdicts=verdicts,
    )
