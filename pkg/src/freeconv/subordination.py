"""Subordination solvers for the pair convolution and the semigroup.

Semigroup: omega_t(z) solves t*omega - z = (t-1) F_mu(omega), found as the
Denjoy-Wolff point of omega -> z/t + ((t-1)/t) F_mu(omega).

Pair: omega_beta(z) is the Denjoy-Wolff point of
omega -> F_b(F_a(omega) - omega + z) - F_a(omega) + omega,
with omega_alpha = F_a(omega_beta) - omega_beta + z.

Both iterations are globally convergent self-maps of the upper half plane;
they are accelerated by Anderson mixing (depth 3) with a residual
monotonicity guard and a guarded Newton polish, falling back to damped
Picard steps.  Real-line values come from a warm-started geometric eta
ladder with Richardson extrapolation of the last three levels.
"""

from dataclasses import dataclass

import numpy as np

from freeconv.transform import MeasureTransform, NumericalError

SEMIGROUP_TOL = 1e-12
PAIR_TOL = 1e-10
SEMIGROUP_MAX_ITER = 10**4
PAIR_MAX_ITER = 10**5
DIVERGENCE_SCALE = 1e8  # 1/eps_div
GAP_ZERO_WINDOW = 1e-4

ETA_TOP = 1e-2
ETA_RATIO = 0.5
ETA_LEVELS = 24  # 1e-2 * 0.5**23 ~ 1.2e-9


@dataclass
class SemigroupPoint:
    omega: complex
    residual: float
    iterations: int


@dataclass
class SubordinationPair:
    omega_alpha: complex
    omega_beta: complex
    residual: float
    iterations: int
    diverged_near: float = None


def _as_transform(mu_or_tf):
    if hasattr(mu_or_tf, "F") and hasattr(mu_or_tf, "F_prime"):
        return mu_or_tf
    return MeasureTransform(mu_or_tf)


def _accelerated_fixed_point(map_fn, newton_fn, z, omega0, tol, max_iter):
    """Drive omega to the fixed point of map_fn, vectorized over points.

    map_fn(w, idx) -> (f, res, aux): next Picard iterate, reported residual,
    and auxiliary data for newton_fn.  newton_fn(w, idx, aux) -> Newton step
    or None.  Returns (omega, res, iters, aux_final).
    """
    z = np.asarray(z, dtype=complex)
    n = z.size
    omega = (
        np.array(omega0, dtype=complex).reshape(n).copy()
        if omega0 is not None
        else z.reshape(n) + 1j
    )
    res = np.full(n, np.inf)
    scale = 1.0 + np.abs(z.reshape(n))
    prev_res = np.full(n, np.inf)
    iters = np.zeros(n, dtype=int)
    lam = np.ones(n)
    aux_out = None

    # Anderson history: two previous (g, f) slots per point
    g1 = np.zeros(n, dtype=complex)
    f1 = np.zeros(n, dtype=complex)
    g2 = np.zeros(n, dtype=complex)
    f2 = np.zeros(n, dtype=complex)
    valid = np.zeros((2, n), dtype=bool)

    stall = np.zeros(n, dtype=int)
    best = np.full(n, np.inf)

    active = np.ones(n, dtype=bool)
    for k in range(max_iter):
        idx = np.nonzero(active)[0]
        if idx.size == 0:
            break
        w = omega[idx]
        f, r, aux = map_fn(w, idx)
        g = f - w
        res[idx] = r
        iters[idx] = k + 1
        if aux_out is None:
            aux_out = {key: np.zeros(n, dtype=complex) for key in aux}
        for key, arr in aux.items():
            aux_out[key][idx] = arr

        done = r < tol * scale[idx]
        improved = r < best[idx] * (1 - 1e-3)
        stall[idx[~improved]] += 1
        stall[idx[improved]] = 0
        best[idx] = np.minimum(best[idx], r)
        active[idx[done | (stall[idx] > 200)]] = False
        keep = ~done & (stall[idx] <= 200)
        if not np.any(keep):
            prev_res[idx] = r
            continue

        # damping guard on residual growth
        grew = r > 1.2 * prev_res[idx]
        lam[idx[grew]] = np.maximum(lam[idx[grew]] * 0.5, 1.0 / 64)
        lam[idx[~grew]] = np.minimum(lam[idx[~grew]] * 1.25, 1.0)
        valid[:, idx[grew]] = False
        prev_res[idx] = r

        cand = w + lam[idx] * g  # damped Picard default

        # Anderson depth 2/3: minimize the affine combination of residuals
        v1 = valid[0, idx] & ~grew
        if np.any(v1):
            d = g1[idx] - g
            ok = v1 & (np.abs(d) > 1e-300)
            gam = np.where(ok, -g / np.where(ok, d, 1.0), 0.0)
            c2 = f + gam * (f1[idx] - f)
            v2 = valid[1, idx] & ok
            if np.any(v2):
                # least-norm solution of g + a*(g1-g) + b*(g2-g) = 0
                d1 = g1[idx] - g
                d2 = g2[idx] - g
                nrm = np.abs(d1) ** 2 + np.abs(d2) ** 2
                ok3 = v2 & (nrm > 1e-300)
                a = np.where(ok3, -g * np.conj(d1) / np.where(ok3, nrm, 1.0), 0.0)
                bb = np.where(ok3, -g * np.conj(d2) / np.where(ok3, nrm, 1.0), 0.0)
                c3 = f + a * (f1[idx] - f) + bb * (f2[idx] - f)
                c2 = np.where(ok3, c3, c2)
                ok = ok | ok3
            good = (
                ok
                & np.isfinite(c2)
                & (np.imag(c2) > 0)
                & (np.abs(c2 - w) <= 10 * (1 + np.abs(w)))
            )
            cand = np.where(good, c2, cand)

        # guarded Newton polish once the iterate is in the basin
        if newton_fn is not None and k >= 2:
            near = keep & (r < 1e-1 * scale[idx])
            if np.any(near):
                sub = np.nonzero(near)[0]
                step = newton_fn(w[sub], idx[sub], {k2: v[sub] for k2, v in aux.items()})
                if step is not None:
                    cn = w[sub] + step
                    goodn = (
                        np.isfinite(cn)
                        & (np.imag(cn) > 0)
                        & (np.abs(step) <= 10 * (1 + np.abs(w[sub])))
                    )
                    cand[sub[goodn]] = cn[goodn]

        # shift history
        g2[idx] = g1[idx]
        f2[idx] = f1[idx]
        valid[1, idx] = valid[0, idx]
        g1[idx] = g
        f1[idx] = f
        valid[0, idx] = True

        upd = np.nonzero(keep)[0]
        omega[idx[upd]] = cand[upd]

    return omega, res, iters, aux_out or {}


def solve_semigroup_grid(
    mu_or_tf, t, z, omega0=None, tol=SEMIGROUP_TOL, max_iter=SEMIGROUP_MAX_ITER
):
    """Solve the semigroup equation at an array of points z in the upper half plane."""
    tf = _as_transform(mu_or_tf)
    z = np.asarray(z, dtype=complex).ravel()

    def map_fn(w, idx):
        Fw = tf.F(w)
        f = z[idx] / t + ((t - 1.0) / t) * Fw
        res = np.abs(t * w - z[idx] - (t - 1.0) * Fw)
        return f, res, {"F": Fw}

    def newton_fn(w, idx, aux):
        Fp = tf.F_prime(w)
        gp = t - (t - 1.0) * Fp
        g = t * w - z[idx] - (t - 1.0) * aux["F"]
        bad = np.abs(gp) < 1e-300
        gp = np.where(bad, 1.0, gp)
        return np.where(bad, 0.0, -g / gp)

    omega, res, iters, _ = _accelerated_fixed_point(
        map_fn, newton_fn, z, omega0, tol, max_iter
    )
    return omega, res, iters


def solve_semigroup(mu_or_tf, t, z, omega0=None, tol=SEMIGROUP_TOL):
    """Pointwise semigroup solve; z in the upper half plane."""
    if t <= 1:
        raise ValueError(f"semigroup parameter must satisfy t > 1, got {t}")
    om0 = None if omega0 is None else [omega0]
    omega, res, iters = solve_semigroup_grid(mu_or_tf, t, [z], om0, tol=tol)
    if res[0] >= tol * (1 + abs(z)):
        raise NumericalError(
            f"semigroup iteration did not converge at z={z}: residual {res[0]:.3e}"
        )
    return SemigroupPoint(complex(omega[0]), float(res[0]), int(iters[0]))


def solve_pair_grid(
    mu_a, mu_b, z, omega0=None, tol=PAIR_TOL, max_iter=PAIR_MAX_ITER
):
    """Solve the pair subordination system at an array of points.

    Returns (omega_alpha, omega_beta, residual, iterations).
    """
    tfa = _as_transform(mu_a)
    tfb = _as_transform(mu_b)
    z = np.asarray(z, dtype=complex).ravel()

    def map_fn(w, idx):
        Fa = tfa.F(w)
        u = Fa - w + z[idx]
        Fb = tfb.F(u)
        f = Fb - Fa + w
        # first residual term |omega_a + omega_b - z - F_a(omega_b)| vanishes
        # identically for omega_a recovered from the first equation
        res = np.abs(f - w)
        return f, res, {"u": u}

    def newton_fn(w, idx, aux):
        u = aux["u"]
        Fpa = tfa.F_prime(w)
        Fpb = tfb.F_prime(u)
        gp = (Fpb - 1.0) * (Fpa - 1.0) - 1.0
        Fa = u + w - z[idx]
        g = (tfb.F(u) - Fa + w) - w
        bad = np.abs(gp) < 1e-300
        gp = np.where(bad, 1.0, gp)
        return np.where(bad, 0.0, -g / gp)

    omega_b, res, iters, aux = _accelerated_fixed_point(
        map_fn, newton_fn, z, omega0, tol, max_iter
    )
    omega_a = aux.get("u", tfa.F(omega_b) - omega_b + z)
    return omega_a, omega_b, res, iters


def solve_pair(mu_a, mu_b, z, omega0=None, tol=PAIR_TOL):
    """Pointwise pair solve with divergence detection near gap zeros of m_a."""
    om0 = None if omega0 is None else [omega0]
    omega_a, omega_b, res, iters = solve_pair_grid(mu_a, mu_b, [z], om0, tol=tol)
    wa, wb = complex(omega_a[0]), complex(omega_b[0])
    diverged_near = None
    if abs(wa) > DIVERGENCE_SCALE and not hasattr(mu_a, "F"):
        from freeconv.analysis import gap_zeros

        for e in gap_zeros(mu_a):
            if abs(wb - e) < GAP_ZERO_WINDOW:
                diverged_near = float(e)
                wa = complex(np.inf)
                break
    if res[0] >= tol * (1 + abs(z)) and diverged_near is None:
        raise NumericalError(
            f"pair iteration did not converge at z={z}: residual {res[0]:.3e}"
        )
    return SubordinationPair(wa, wb, float(res[0]), int(iters[0]), diverged_near)


def eta_ladder_levels(eta_top=ETA_TOP, ratio=ETA_RATIO, levels=ETA_LEVELS):
    return eta_top * ratio ** np.arange(levels)


@dataclass
class LadderResult:
    omegas: tuple       # extrapolated boundary values, one array per omega
    boundary_error: np.ndarray
    residual: np.ndarray
    last_eta: float


def continuation_ladder(solve_fn, E, eta_levels=None):
    """Track solutions down a geometric eta ladder and extrapolate to eta=0.

    solve_fn(z, warm) -> (omegas_tuple, residual); warm is the previous
    level's omegas tuple (or None).  Richardson extrapolation uses the last
    three levels (consecutive halvings); their disagreement is recorded as
    boundary_error.
    """
    E = np.asarray(E, dtype=float).ravel()
    etas = eta_ladder_levels() if eta_levels is None else np.asarray(eta_levels)
    warm = None
    history = []
    res = None
    for eta in etas:
        z = E + 1j * eta
        omegas, res = solve_fn(z, warm)
        warm = omegas
        history.append(omegas)
        if len(history) > 3:
            history.pop(0)
    s1, s2, s3 = history  # at eta, eta/2, eta/4
    extrap = []
    berr = np.zeros(E.size)
    for o1, o2, o3 in zip(s1, s2, s3):
        # eliminate the O(eta) and O(eta^2) terms
        extrap.append((8.0 * o3 - 6.0 * o2 + o1) / 3.0)
        berr = np.maximum(berr, np.abs(2.0 * o3 - 3.0 * o2 + o1))
    return LadderResult(tuple(extrap), berr, res, float(etas[-1]))


class SemigroupTransform:
    """F/F' of mu^[+]t, evaluated through the semigroup subordination."""

    def __init__(self, mu, t):
        self.tf = _as_transform(mu)
        self.t = float(t)
        self._warm = None

    def _omega(self, z):
        z = np.asarray(z, dtype=complex).ravel()
        warm = self._warm if self._warm is not None and self._warm.size == z.size else None
        omega, res, _ = solve_semigroup_grid(self.tf, self.t, z, warm)
        if np.any(res >= 1e-10):
            raise NumericalError("inner semigroup solve failed")
        self._warm = omega
        return omega

    def F(self, z):
        return self.tf.F(self._omega(z))

    def F_prime(self, z):
        omega = self._omega(z)
        Fp = self.tf.F_prime(omega)
        return Fp / (self.t - (self.t - 1.0) * Fp)
