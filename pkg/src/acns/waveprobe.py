"""Wave-equation structure probes.

Two families live here. On the torus: the rescaled-time pressure wave
equation satisfied along solver trajectories, its residual, and the
two-forcing splitting integrated by per-mode Duhamel formulas. On the free
space R^3: a radial wave solver (exact d'Alembert transport of v = r w)
used to measure space-time dispersive-estimate ratios, which have no torus
analogue because a compact domain does not disperse to infinity.

In the rescaled frame tau = t / sqrt(eps), utilde(x, tau) = u(x, sqrt(eps)
tau), ptilde likewise, the pressure of the integrated system satisfies

    d2/dtau2 ptilde - Lap(ptilde) = Lap(div utilde)
        - div((utilde . grad) utilde + (1/2) div(utilde) utilde)

(the right side is F1 + F2 below; the signs follow the package's pressure
convention, see README).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np
import scipy.fft

from .acsolver import ACState, advection_correction
from .radial import (
    radial_bessel_apply,
    radial_hdot,
    radial_inverse_sine,
    radial_lp,
    radial_sine_transform,
)
from .fields import ScalarField, VectorField
from .grid import Grid


# ---------------------------------------------------------------------------
# rescaling
# ---------------------------------------------------------------------------


@dataclass
class RescaledState:
    """Trajectory sample in the acoustic time tau = t / sqrt(eps).

    Field values are untouched by the substitution; only the clock changes.
    The source time stamp is kept so the round trip is bitwise exact.
    """

    tau: float
    u_tilde: VectorField
    p_tilde: ScalarField
    eps: float
    mu: float = 1.0
    t_source: float = 0.0

    @property
    def grid(self) -> Grid:
        return self.u_tilde.grid


def rescale(state: ACState) -> RescaledState:
    return RescaledState(
        tau=state.t / np.sqrt(state.eps),
        u_tilde=state.u,
        p_tilde=state.p,
        eps=state.eps,
        mu=state.mu,
        t_source=state.t,
    )


def unrescale(rs: RescaledState) -> ACState:
    return ACState(u=rs.u_tilde, p=rs.p_tilde, eps=rs.eps, mu=rs.mu, t=rs.t_source)


# ---------------------------------------------------------------------------
# pressure wave equation on the torus
# ---------------------------------------------------------------------------


def _wave_forcings_hat(u: VectorField, dealias: bool = True):
    """F1_hat = Lap(div u)_hat and F2_hat = -div((u.grad)u + 1/2 div(u) u)_hat."""
    g = u.grid
    uh = u.hat
    divh = np.zeros(g.shape, dtype=np.complex128)
    for j in range(g.dim):
        divh += 1j * g.k_deriv_axes[j] * uh[j]
    f1 = -g.k_sq * divh
    nl = advection_correction(u, dealias=dealias)
    f2 = np.zeros(g.shape, dtype=np.complex128)
    for j in range(g.dim):
        f2 -= 1j * g.k_deriv_axes[j] * nl.hat[j]
    return f1, f2


def pressure_wave_residual(trajectory, dealias: bool = True):
    """W^{-2,2} residual of the rescaled pressure wave equation per snapshot.

    trajectory: sequence of RescaledState with uniform tau spacing (>= 3
    samples); the second tau derivative is a centered difference, space is
    spectral. Returns (taus, relative residuals) for the interior samples.
    """
    if len(trajectory) < 3:
        raise ValueError("need at least 3 snapshots for second differences")
    taus = np.array([s.tau for s in trajectory])
    dtau = taus[1] - taus[0]
    if not np.allclose(np.diff(taus), dtau, rtol=1e-8, atol=1e-12):
        raise ValueError("snapshots are not uniformly spaced in tau")
    g = trajectory[0].grid
    mult = (1.0 + g.k_sq) ** -1.0  # W^{-2,2} Bessel weight

    def wm22(hat):
        return float(np.sqrt(g.parseval * np.sum(np.abs(hat * mult) ** 2)))

    out_t, out_r = [], []
    for i in range(1, len(trajectory) - 1):
        pm = trajectory[i - 1].p_tilde.hat
        p0 = trajectory[i].p_tilde.hat
        pp = trajectory[i + 1].p_tilde.hat
        d2p = (pp - 2.0 * p0 + pm) / (dtau * dtau)
        lap_p = -g.k_sq * p0
        f1, f2 = _wave_forcings_hat(trajectory[i].u_tilde, dealias=dealias)
        resid = d2p - lap_p - f1 - f2
        scale = max(wm22(d2p), wm22(lap_p), wm22(f1), wm22(f2), 1e-300)
        out_t.append(taus[i])
        out_r.append(wm22(resid) / scale)
    return np.array(out_t), np.array(out_r)


class TorusWaveSolver:
    """Per-mode Duhamel integrator for d2q/dtau2 - Lap(q) = F on the torus.

    Between snapshots the forcing is integrated by the trapezoidal rule in
    the variation-of-constants formula; the homogeneous propagation is
    exact per mode.
    """

    def __init__(self, grid: Grid, dtau: float):
        self.grid = grid
        self.dtau = dtau
        w = grid.k_mag
        wd = dtau * w
        self.cos = np.cos(wd)
        self.sinc = np.where(w > 0, np.sin(wd) / np.where(w > 0, w, 1.0), dtau)
        self.wsin = w * np.sin(wd)
        # trapezoidal Duhamel weights: integral sin(w(dt-s))/w F(s) ds and
        # integral cos(w(dt-s)) F(s) ds with endpoint values F0, F1
        self.q_w0 = 0.5 * dtau * self.sinc  # weight of F0 on q, sin side
        self.q_w1 = np.zeros_like(self.q_w0)  # sin(0)/w = 0
        self.v_w0 = 0.5 * dtau * self.cos
        self.v_w1 = 0.5 * dtau * np.ones_like(self.cos)

    def advance(self, qh, vh, f0h, f1h):
        """One interval: (q, dq/dtau) spectral arrays with forcing endpoints."""
        q_new = self.cos * qh + self.sinc * vh + self.q_w0 * f0h + self.q_w1 * f1h
        v_new = -self.wsin * qh + self.cos * vh + self.v_w0 * f0h + self.v_w1 * f1h
        return q_new, v_new


def split_pressure(trajectory, dealias: bool = True):
    """Split the rescaled pressure into forced parts q1 + q2.

    q1 solves the torus wave equation driven by the linear forcing
    F1 = Lap(div utilde) with zero initial data; q2 is driven by the
    quadratic forcing F2 = -div((utilde.grad)utilde + (1/2)div(utilde)
    utilde) and carries the initial data (ptilde(0), dptilde/dtau(0)),
    the latter reconstructed from the continuity equation as
    div(utilde(0)) / sqrt(eps). Superposition gives back ptilde up to
    the trapezoidal Duhamel and snapshot-spacing errors.

    Returns dict with tau array, q1/q2 ScalarField lists, and the relative
    L^2 reconstruction error per snapshot.
    """
    if len(trajectory) < 2:
        raise ValueError("need at least 2 snapshots")
    taus = np.array([s.tau for s in trajectory])
    dtau = taus[1] - taus[0]
    if not np.allclose(np.diff(taus), dtau, rtol=1e-8, atol=1e-12):
        raise ValueError("snapshots are not uniformly spaced in tau")
    g = trajectory[0].grid
    eps = trajectory[0].eps
    solver = TorusWaveSolver(g, dtau)

    q1 = np.zeros(g.shape, dtype=np.complex128)
    v1 = np.zeros(g.shape, dtype=np.complex128)
    q2 = trajectory[0].p_tilde.hat.copy()
    u0h = trajectory[0].u_tilde.hat
    v2 = np.zeros(g.shape, dtype=np.complex128)
    for j in range(g.dim):
        v2 += 1j * g.k_deriv_axes[j] * u0h[j]
    v2 /= np.sqrt(eps)

    f1_prev, f2_prev = _wave_forcings_hat(trajectory[0].u_tilde, dealias=dealias)
    q1_series = [ScalarField.from_hat(g, q1.copy())]
    q2_series = [ScalarField.from_hat(g, q2.copy())]
    recon_err = [0.0]

    def rel_err(i, q1h, q2h):
        ph = trajectory[i].p_tilde.hat
        num = np.sqrt(g.parseval * np.sum(np.abs(q1h + q2h - ph) ** 2))
        den = max(np.sqrt(g.parseval * np.sum(np.abs(ph) ** 2)), 1e-300)
        return float(num / den)

    for i in range(1, len(trajectory)):
        f1_next, f2_next = _wave_forcings_hat(trajectory[i].u_tilde, dealias=dealias)
        q1, v1 = solver.advance(q1, v1, f1_prev, f1_next)
        q2, v2 = solver.advance(q2, v2, f2_prev, f2_next)
        f1_prev, f2_prev = f1_next, f2_next
        q1_series.append(ScalarField.from_hat(g, q1.copy()))
        q2_series.append(ScalarField.from_hat(g, q2.copy()))
        recon_err.append(rel_err(i, q1, q2))

    return {
        "tau": taus,
        "q1": q1_series,
        "q2": q2_series,
        "reconstruction_error": np.array(recon_err),
    }


# ---------------------------------------------------------------------------
# radial free-space wave solver
# ---------------------------------------------------------------------------


@dataclass
class RadialWaveProblem:
    """Radially symmetric free-space wave problem on r in [0, r_max].

    f: initial displacement profile, g: initial velocity, F: space-time
    forcing (callable of (r, t) or None). Profiles must vanish for
    r > r_max / 2 so that outer-boundary reflections cannot re-enter the
    measured region before the horizon T (finite propagation speed 1).
    """

    r_max: float
    nr: int
    T: float
    f: Optional[Callable] = None
    g: Optional[Callable] = None
    F: Optional[Callable] = None

    def __post_init__(self):
        if self.r_max < 2.0 * self.T:
            raise ValueError(
                f"support invariant violated: need r_max >= 2 T, got "
                f"r_max={self.r_max}, T={self.T}"
            )

    def grid_r(self):
        return np.linspace(0.0, self.r_max, self.nr + 1)


def _eval_profile(fn, r):
    if fn is None:
        return np.zeros_like(r)
    vals = np.asarray(fn(r), dtype=np.float64)
    return vals


def _check_support(vals, r, r_max, name):
    outside = np.abs(vals[r > 0.5 * r_max])
    if outside.size and outside.max() > 1e-12 * max(np.abs(vals).max(), 1e-300):
        raise ValueError(f"{name} profile not supported inside r_max/2")


class RadialWaveSolution:
    """Solution samples w(r, t_j) plus the characteristic energy series."""

    def __init__(self, r, times, w_samples, energy_times, energies):
        self.r = r
        self.times = times
        self.w = w_samples  # list of arrays aligned with times
        self.energy_times = energy_times
        self.energies = energies


def _w_from_v(v, r):
    """w = v / r with the r -> 0 limit from a one-sided difference."""
    w = np.empty_like(v)
    w[1:] = v[1:] / r[1:]
    dr = r[1] - r[0]
    w[0] = (4.0 * v[1] - v[2]) / (2.0 * dr)  # second-order limit of v_r(0)
    return w


def solve_radial_wave(
    problem: RadialWaveProblem,
    sample_times=None,
    observer=None,
):
    """March v = r w by the unit-Courant leapfrog, exact for F = 0.

    With dt = dr the three-level scheme v_j^{n+1} = v_{j+1}^n + v_{j-1}^n
    - v_j^{n-1} transports the d'Alembert characteristics exactly (all
    truncation terms vanish at Courant number one). Forcing enters through
    the light-cone integral, dt^2 r F at the diamond center. The first
    level uses the exact half-cone formula with Simpson quadrature for the
    velocity data. Odd symmetry through r = 0 is built in (v_0 = 0).
    """
    r = problem.grid_r()
    nr = problem.nr
    dr = r[1] - r[0]
    dt = dr
    nsteps = int(round(problem.T / dt))

    f_vals = _eval_profile(problem.f, r)
    g_vals = _eval_profile(problem.g, r)
    _check_support(f_vals, r, problem.r_max, "displacement")
    _check_support(g_vals, r, problem.r_max, "velocity")

    v_prev = r * f_vals
    gt = r * g_vals

    def forcing_rF(t):
        if problem.F is None:
            return None
        return r * np.asarray(problem.F(r, t), dtype=np.float64)

    # exact first level: v(r, dt) = (v0(r+dt) + v0(r-dt))/2
    #   + 1/2 int_{r-dt}^{r+dt} g~  + forcing half-diamond
    v_curr = np.zeros_like(v_prev)
    v_curr[1:-1] = 0.5 * (v_prev[2:] + v_prev[:-2])
    # Simpson over the two-cell window, odd extension at the origin
    gt_ext = np.concatenate([[-gt[1]], gt])  # gt_ext[0] = gt(-dr)
    v_curr[1:-1] += 0.5 * (dr / 3.0) * (gt_ext[:-3] + 4.0 * gt[1:-1] + gt[2:])
    F0 = forcing_rF(0.0)
    if F0 is not None:
        v_curr[1:-1] += 0.5 * dt * dt * F0[1:-1]
    v_curr[0] = 0.0
    v_curr[-1] = 0.0

    sample_times = list(sample_times) if sample_times is not None else []
    sample_idx = {int(round(t / dt)) for t in sample_times}
    times_out, w_out = [], []
    energy_times, energies = [], []

    def characteristic_energy(vp, vc):
        # alpha_j = v^{n+1}_j - v^n_{j-1}, beta_j = v^{n+1}_j - v^n_{j+1}
        # are pure functions of the two Riemann invariants; their sum of
        # squares is exactly transported when F = 0.
        alpha = vc[1:] - vp[:-1]
        beta = vc[:-1] - vp[1:]
        return 0.5 * (np.sum(alpha**2) + np.sum(beta**2)) / dr

    def record(n, vp, vc):
        t = n * dt
        if n in sample_idx:
            times_out.append(t)
            w_out.append(_w_from_v(vc, r))
        energy_times.append(t)
        energies.append(characteristic_energy(vp, vc))
        if observer is not None:
            observer(n, t, vc, vp)

    record(1, v_prev, v_curr)
    if 0 in sample_idx:
        times_out.insert(0, 0.0)
        w_out.insert(0, _w_from_v(v_prev, r))

    for n in range(1, nsteps):
        v_next = np.empty_like(v_curr)
        v_next[1:-1] = v_curr[2:] + v_curr[:-2] - v_prev[1:-1]
        Fn = forcing_rF(n * dt)
        if Fn is not None:
            v_next[1:-1] += dt * dt * Fn[1:-1]
        v_next[0] = 0.0
        v_next[-1] = 0.0
        v_prev, v_curr = v_curr, v_next
        record(n + 1, v_prev, v_curr)

    return RadialWaveSolution(r, np.array(times_out), w_out, np.array(energy_times), np.array(energies))


# ---------------------------------------------------------------------------
# radial norms and Strichartz ratios
# ---------------------------------------------------------------------------


class _RatioAccumulator:
    """Streams the time integrals needed by the estimate ratios."""

    def __init__(self, problem, variant):
        if variant not in ("s1", "s3"):
            raise ValueError("variant must be 's1' or 's3'")
        self.variant = variant
        self.problem = problem
        self.r = problem.grid_r()
        self.dr = self.r[1] - self.r[0]
        self.dt = self.dr
        self.w4 = []  # (t, ||w||_L4^4) per time level
        self.dtw4 = []  # (t, ||(I-Lap)^{-1/2} dw/dt||_L4^4), centered in t
        self.fnorm = []  # (t, ||F(t)||_{L^q})
        self._w_hist = []  # last two w levels

    def _forcing_norm(self, t):
        if self.problem.F is None:
            return 0.0
        q = 2.0 if self.variant == "s1" else 1.5
        Fv = np.asarray(self.problem.F(self.r, t), dtype=np.float64)
        return radial_lp(Fv, self.r, q)

    def on_level(self, t, w):
        self.w4.append((t, radial_lp(w, self.r, 4.0) ** 4))
        self.fnorm.append((t, self._forcing_norm(t)))
        self._w_hist.append(w)
        if len(self._w_hist) == 3:
            w_t = (self._w_hist[2] - self._w_hist[0]) / (2.0 * self.dt)
            sm = radial_bessel_apply(w_t, self.r, -1.0)
            self.dtw4.append((t - self.dt, radial_lp(sm, self.r, 4.0) ** 4))
            self._w_hist.pop(0)


def strichartz_ratio(problem: RadialWaveProblem, variant: str, horizons=None):
    """LHS / RHS of the selected space-time estimate at one or many horizons.

    variant "s3": LHS = ||w||_{L4_t L4_x} + ||dw/dt||_{L4_t W^{-1,4}_x},
    RHS = ||f||_{Hdot^{1/2}} + ||g||_{Hdot^{-1/2}} + ||F||_{L1_t L^{3/2}_x}.
    variant "s1": same LHS, RHS with ||g||_{Hdot^{1/2}} and F in L1_t L2_x.
    Norms use the radial measure 4 pi r^2 dr; the data norms use the radial
    sine-transform multipliers |k|^{+-1/2}. Zero data returns ratio 0.

    With horizons=None returns the scalar ratio at problem.T; otherwise a
    dict horizon -> (lhs, rhs, ratio) computed from one solve.
    """
    single = horizons is None
    hs = [problem.T] if single else sorted(horizons)
    if max(hs) > problem.T + 1e-12:
        raise ValueError("requested horizon exceeds the problem horizon")

    acc = _RatioAccumulator(problem, variant)
    r = problem.grid_r()
    acc.on_level(0.0, _eval_profile(problem.f, r))

    def observer(n, t, v_curr, v_prev):
        acc.on_level(t, _w_from_v(v_curr, r))

    solve_radial_wave(problem, observer=observer)

    f_vals = _eval_profile(problem.f, r)
    g_vals = _eval_profile(problem.g, r)
    f_h = radial_hdot(f_vals, r, 0.5)
    g_h = radial_hdot(g_vals, r, 0.5 if variant == "s1" else -0.5)

    def prefix_lq(series, T, power):
        ts = np.array([t for t, _ in series])
        vs = np.array([v for _, v in series])
        m = ts <= T + 1e-12
        if m.sum() < 2:
            return 0.0
        return float(np.trapezoid(vs[m], x=ts[m]) ** power)

    out = {}
    for T in hs:
        lhs = prefix_lq(acc.w4, T, 0.25) + prefix_lq(acc.dtw4, T, 0.25)
        rhs = f_h + g_h + prefix_lq(acc.fnorm, T, 1.0)
        if rhs == 0.0:
            if lhs > 1e-12:
                raise ArithmeticError(
                    "estimate right side vanished while the left side did not; "
                    "norm computation is inconsistent"
                )
            out[T] = (lhs, rhs, 0.0)
        else:
            out[T] = (lhs, rhs, lhs / rhs)
    if single:
        return out[hs[0]][2]
    return out
