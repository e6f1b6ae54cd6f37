"""Density reconstruction on real grids and support detection.

The density of the convolution result at E is (1/pi) Im m at the
subordinated point: Im m_a(omega_beta(E)) for the pair, Im m(omega_t(E))
for the semigroup, with omega obtained from the eta ladder extrapolated to
the real line.  Support detection thresholds Im omega (comparable to the
density but cleaner near edges, where the density vanishes like a root).
"""

from dataclasses import dataclass, field

import numpy as np

from freeconv.measures import InputError
from freeconv.transform import MeasureTransform, NumericalError, cauchy_m
from freeconv.subordination import (
    continuation_ladder,
    solve_pair_grid,
    solve_semigroup_grid,
)

DENSITY_CAP = 1e6
SUPP_THRESHOLD_REL = 1e-7
EDGE_TOL = 1e-8
CUSP_MERGE_STEPS = 10
DIVERGENCE_GUARD = 1e6


@dataclass
class DensityGrid:
    kind: str                     # "pair" | "semigroup"
    grid: np.ndarray
    density: np.ndarray
    im_omega: np.ndarray          # Im omega_beta (pair) or Im omega_t (semigroup)
    boundary_error: np.ndarray
    omega: np.ndarray             # extrapolated omega_beta / omega_t
    omega_alpha: np.ndarray = None
    residual: np.ndarray = None
    capped: np.ndarray = None     # divergence flags on the density column
    mu_a: object = None
    mu_b: object = None
    t: float = None
    base_step: float = None


@dataclass
class SupportReport:
    components: list              # (left, right) pairs
    interior_zeros: list
    divergence_points: list
    counts: tuple                 # (I, C0, Cinf)
    threshold: float = 0.0
    edge_mismatches: list = field(default_factory=list)

    @property
    def I(self):
        return self.counts[0]


def default_window(kind, mu_a, mu_b=None, t=None):
    from freeconv.measures import variance

    if kind == "pair":
        lo = mu_a.support_min + mu_b.support_min
        hi = mu_a.support_max + mu_b.support_max
        pad = 0.05 * (hi - lo) + 0.1 * (
            np.sqrt(variance(mu_a)) + np.sqrt(variance(mu_b))
        )
        return lo - pad, hi + pad
    from freeconv.analysis import semigroup_edges

    cands = [e for _, e in semigroup_edges(mu_a, t)]
    cands += [t * a.location for a in mu_a.atoms]
    lo, hi = min(cands), max(cands)
    pad = 0.05 * (hi - lo) + 0.05
    return lo - pad, hi + pad


def _divergence_candidates(mu, t):
    return [
        t * a.location for a in mu.atoms if abs(a.mass - (1.0 - 1.0 / t)) < 1e-9
    ]


def _refined_grid(window, n_points, focus_points, base_step, focus_halfwidth, factor):
    grid = np.linspace(window[0], window[1], n_points)
    extras = []
    for p in focus_points:
        if not window[0] < p < window[1]:
            continue
        half = focus_halfwidth * base_step
        local = np.linspace(
            max(p - half, window[0]), min(p + half, window[1]), int(2 * focus_halfwidth * factor) + 1
        )
        extras.append(local)
        extras.append(np.array([p]))
    if extras:
        grid = np.unique(np.concatenate([grid] + extras))
    return grid


def _ladder_step(kind, mu_a, mu_b, t):
    tfa = MeasureTransform(mu_a)
    tfb = MeasureTransform(mu_b) if mu_b is not None else None

    if kind == "semigroup":

        def step(z, warm):
            om, res, _ = solve_semigroup_grid(
                tfa, t, z, warm[0] if warm else None
            )
            return (om,), res

    else:

        def step(z, warm):
            wa, wb, res, _ = solve_pair_grid(
                tfa, tfb, z, warm[1] if warm else None
            )
            return (wa, wb), res

    return step


def _density_from_omega(kind, mu_a, omega, atoms=()):
    """(1/pi) Im m_a at omega, capped near atoms of the result."""
    safe = np.ones(omega.shape, dtype=bool)
    for a in atoms:
        safe &= np.abs(omega - a.location) > 1e-12
    rho = np.full(omega.shape, DENSITY_CAP)
    if np.any(safe):
        rho[safe] = np.maximum(
            np.imag(cauchy_m(mu_a, omega[safe], guard=False)) / np.pi, 0.0
        )
    capped = rho > DENSITY_CAP
    rho = np.minimum(rho, DENSITY_CAP)
    capped |= ~safe
    return rho, capped


def density_grid(kind, mu_a, mu_b=None, t=None, window=None, n_points=2001):
    """Solve the subordination ladder over a real grid and return the density."""
    if kind not in ("pair", "semigroup"):
        raise InputError(f"unknown result kind {kind!r}")
    if kind == "pair" and mu_b is None:
        raise InputError("pair density needs two measures")
    if kind == "semigroup" and (t is None or t <= 1):
        raise InputError("semigroup density needs t > 1")
    if window is None:
        window = default_window(kind, mu_a, mu_b, t)
    base_step = (window[1] - window[0]) / (n_points - 1)

    if kind == "semigroup":
        focus = _divergence_candidates(mu_a, t)
        grid = _refined_grid(window, n_points, focus, base_step, 10, 100)
    else:
        from freeconv.analysis import gap_zeros
        from freeconv.measures import moment

        # a gap zero E of one input forces a density zero of the result at
        # E + mean(other input): there omega_alpha diverges while omega_beta
        # approaches E
        focus = [e + moment(mu_b, 1) for e in gap_zeros(mu_a)]
        focus += [e + moment(mu_a, 1) for e in gap_zeros(mu_b)]
        grid = _refined_grid(window, n_points, focus, base_step, 2, 20)

    step = _ladder_step(kind, mu_a, mu_b, t)
    lr = continuation_ladder(step, grid)
    bad = lr.residual >= 1e-8 * (1 + np.abs(grid))
    if np.mean(bad) > 0.01:
        raise NumericalError(
            f"ladder failed at {int(bad.sum())} of {grid.size} grid points"
        )

    if kind == "semigroup":
        omega = lr.omegas[0]
        omega_alpha = None
    else:
        omega_alpha, omega = lr.omegas
    atoms = mu_a.atoms if kind == "semigroup" else ()
    rho, capped = _density_from_omega(kind, mu_a, omega, atoms)
    return DensityGrid(
        kind=kind,
        grid=grid,
        density=rho,
        im_omega=np.imag(omega),
        boundary_error=lr.boundary_error,
        omega=omega,
        omega_alpha=omega_alpha,
        residual=lr.residual,
        capped=capped,
        mu_a=mu_a,
        mu_b=mu_b,
        t=t,
        base_step=base_step,
    )


def _im_omega_solver(dg):
    step = _ladder_step(dg.kind, dg.mu_a, dg.mu_b, dg.t)
    which = 0 if dg.kind == "semigroup" else 1

    def im_omega_at(E):
        E = np.atleast_1d(np.asarray(E, dtype=float))
        lr = continuation_ladder(step, E)
        return np.imag(lr.omegas[which])

    return im_omega_at


def _golden_min(f, a, b, tol):
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


def detect_support(dg, edge_check=True):
    """Threshold Im omega, refine edges by bisection, classify interior zeros."""
    imw = dg.im_omega
    # at a forced gap zero one subordination function blows up and the
    # extrapolated other one is pure noise; the density vanishes there, so
    # such points must feed neither the threshold level nor the mask
    finite = np.abs(dg.omega) < DIVERGENCE_GUARD
    if dg.kind == "pair" and dg.omega_alpha is not None:
        finite &= np.abs(dg.omega_alpha) < DIVERGENCE_GUARD
    if not np.any(finite):
        raise NumericalError("subordination diverged on the whole grid")
    eps = SUPP_THRESHOLD_REL * float(np.max(imw[finite]))
    above = (imw > eps) & finite
    if not np.any(above):
        return SupportReport([], [], _divergence_list(dg), (0, 0, len(_divergence_list(dg))), eps)
    # measure the hovering region in grid length, not point count, so that
    # locally refined clusters near an edge do not trip the guard
    hover = (np.abs(imw - eps) < 0.5 * eps) & finite
    spacing = np.gradient(dg.grid)
    if np.sum(spacing[hover]) > 0.01 * (dg.grid[-1] - dg.grid[0]):
        raise NumericalError("support threshold ambiguity: Im omega hovers at eps")

    grid = dg.grid
    # raw runs of above-threshold points
    edges = np.flatnonzero(np.diff(above.astype(int)))
    starts = [0] if above[0] else []
    starts += [i + 1 for i in edges if not above[i]]
    ends = []
    for i in edges:
        if above[i]:
            ends.append(i)
    if above[-1]:
        ends.append(len(grid) - 1)
    runs = list(zip(starts, ends))

    div_points = _divergence_list(dg)
    im_omega_at = _im_omega_solver(dg)

    # merge runs separated by short sub-threshold stretches: a cusp (interior
    # zero) or a divergence-point crossing, not a genuine gap
    merged = [list(runs[0])]
    interior = []
    for s, e in runs[1:]:
        gap_lo, gap_hi = grid[merged[-1][1]], grid[s]
        if gap_hi - gap_lo <= CUSP_MERGE_STEPS * dg.base_step:
            has_div = any(gap_lo <= p <= gap_hi for p in div_points)
            if not has_div:
                zero = _golden_min(
                    lambda x: float(im_omega_at(x)[0]), gap_lo, gap_hi, 1e-10
                )
                interior.append(float(zero))
            merged[-1][1] = e
        else:
            merged.append([s, e])

    # refine outer edges by bisection on the Im omega > eps predicate
    los, his = [], []
    for s, e in merged:
        los.append((grid[s - 1], grid[s]) if s > 0 else (grid[0], grid[0]))
        his.append((grid[e], grid[e + 1]) if e + 1 < len(grid) else (grid[-1], grid[-1]))

    def bisect_edges(brackets, rising):
        lo = np.array([b[0] for b in brackets])
        hi = np.array([b[1] for b in brackets])
        fixed = hi - lo <= 0
        while np.max(hi - lo) > EDGE_TOL:
            mid = 0.5 * (lo + hi)
            inside = im_omega_at(mid) > eps
            take_lo = inside if rising else ~inside
            hi = np.where(fixed, hi, np.where(take_lo, mid, hi))
            lo = np.where(fixed, lo, np.where(take_lo, lo, mid))
        return 0.5 * (lo + hi)

    lefts = bisect_edges(los, rising=True)
    rights = bisect_edges(his, rising=False)
    components = [(float(l), float(r)) for l, r in zip(lefts, rights)]

    mismatches = []
    if dg.kind == "semigroup" and edge_check:
        from freeconv.analysis import semigroup_edges

        cands = np.array([e for _, e in semigroup_edges(dg.mu_a, dg.t)])
        if cands.size:
            for l, r in components:
                for e in (l, r):
                    if np.min(np.abs(cands - e)) > 1e-6:
                        mismatches.append(float(e))

    counts = (len(components), len(interior), len(div_points))
    return SupportReport(
        components, interior, div_points, counts, eps, mismatches
    )


def _divergence_list(dg):
    if dg.kind != "semigroup":
        return []
    return _divergence_candidates(dg.mu_a, dg.t)


def write_csv(dg, path):
    """Write the grid as CSV; column set depends on the result kind."""
    if dg.kind == "pair":
        header = "E,rho,im_omega_alpha,im_omega_beta,boundary_error"
        cols = [
            dg.grid,
            dg.density,
            np.imag(dg.omega_alpha),
            dg.im_omega,
            dg.boundary_error,
        ]
    else:
        header = "E,rho,im_omega_t,boundary_error"
        cols = [dg.grid, dg.density, dg.im_omega, dg.boundary_error]
    data = np.column_stack(cols)
    with open(path, "w", newline="\n") as f:
        f.write(header + "\n")
        for row in data:
            f.write(",".join(repr(float(v)) for v in row) + "\n")


def grid_moment(dg, k):
    """k-th moment of the gridded density by the trapezoid rule."""
    return float(np.trapezoid(dg.density * dg.grid**k, dg.grid))
