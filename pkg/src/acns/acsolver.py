"""Time integration of the artificial-compressibility system.

The integrated system (viscosity mu, compressibility parameter eps) is

    du/dt = grad(p) + mu Lap(u) - (u . grad) u - (1/2) div(u) u + f
    eps dp/dt = div(u)

whose pressure converges, as eps -> 0, to the incompressible limit pressure
InvLap(div((u . grad) u)). The sign pairing grad(p) / +div(u) keeps the
acoustic subsystem skew (energy-conserving for mu = 0) and is fixed
throughout the package; see README "Conventions".

The linear acoustic-diffusive part is integrated exactly per mode via
2x2 matrix exponentials; the quadratic terms get one ETDRK2 stage pair
(exponential time differencing, second order, Cox-Matthews coefficients).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from . import fields as fl
from .etd import AcousticPropagator
from .fields import ScalarField, VectorField
from .grid import Grid


class SolverBlowup(RuntimeError):
    """Raised when a step produces non-finite data."""

    def __init__(self, t, mode, which):
        self.t = t
        self.mode = mode
        super().__init__(
            f"non-finite {which} coefficient at t={t:.6g}, first offending "
            f"mode k={tuple(int(m) for m in mode)}"
        )


@dataclass
class ACState:
    """State (u, p, eps, t) of the approximating system."""

    u: VectorField
    p: ScalarField
    eps: float
    mu: float = 1.0
    t: float = 0.0

    def __post_init__(self):
        if self.u.grid != self.p.grid:
            raise ValueError("u and p must share one grid")
        if self.eps <= 0:
            raise ValueError("eps must be positive")

    @property
    def grid(self) -> Grid:
        return self.u.grid

    def energy(self) -> float:
        """E(t) = 1/2 ||u||_L2^2 + (eps/2) ||p||_L2^2."""
        return 0.5 * fl.lp_norm(self.u, 2) ** 2 + 0.5 * self.eps * fl.lp_norm(self.p, 2) ** 2


@dataclass
class ACStepConfig:
    dt: float
    dealias: bool = True
    nonlinear_on: bool = True
    forcing: Optional[Callable[[float], VectorField] | VectorField] = None

    def __post_init__(self):
        if self.dt < 0:
            raise ValueError("dt must be nonnegative")


def cfl_bound(state: ACState, c_adv: float = 0.5, dt_cap: float = 1e-2) -> float:
    """Advective time-step bound c_adv * spacing / max|u|.

    Acoustic and viscous terms impose no bound (they are integrated
    exactly); a quiescent field returns the configured cap.
    """
    umax = float(state.u.magnitude().max())
    if umax == 0.0:
        return dt_cap
    return c_adv * state.grid.spacing / umax


def advection_correction(u: VectorField, dealias: bool = True) -> VectorField:
    """(u . grad) u + (1/2) div(u) u, pseudo-spectral, optionally dealiased.

    This is the energy-neutral combination: its L^2 pairing with u vanishes,
    which is the whole point of the 1/2 div(u) u correction.
    """
    g = u.grid
    uh = u.hat
    uphys = u.values
    adv = np.zeros((g.dim,) + g.shape)
    divu = np.zeros(g.shape)
    for j in range(g.dim):
        for i in range(g.dim):
            dju_i = fl.ifftn(1j * g.k_deriv_axes[j] * uh[i], g).real
            adv[i] += uphys[j] * dju_i
            if i == j:
                divu += dju_i
    out = adv + 0.5 * divu * uphys
    res = VectorField(g, out)
    if dealias:
        res = fl.dealias(res)
    return res


def nonlinear_rhs(state: ACState, dealias: bool = True) -> VectorField:
    """N(u) = -(u . grad) u - (1/2) div(u) u."""
    return -1.0 * advection_correction(state.u, dealias=dealias)


class AcIntegrator:
    """ETDRK2 stepper for a fixed (grid, eps, mu, dt, config) combination."""

    def __init__(self, grid: Grid, eps: float, mu: float, config: ACStepConfig):
        self.grid = grid
        self.eps = eps
        self.mu = mu
        self.config = config
        self.prop = AcousticPropagator(eps, mu, config.dt, grid)
        self._mask = grid.dealias_mask if config.dealias else None

    # -- spectral helpers ------------------------------------------------

    def _split_longitudinal(self, vh: np.ndarray):
        """Return (a, vT_hat): amplitude along -k/|k| and transverse part."""
        g = self.grid
        kdotv = np.zeros(g.shape, dtype=np.complex128)
        for j in range(g.dim):
            kdotv += g.k_deriv_axes[j] * vh[j]
        a = -kdotv / g.k_mag_safe
        vT = vh.copy()
        proj = kdotv / g.k_sq_safe
        for j in range(g.dim):
            vT[j] -= g.k_deriv_axes[j] * proj
        return a, vT

    def _assemble(self, a: np.ndarray, vT: np.ndarray) -> np.ndarray:
        g = self.grid
        out = vT.copy()
        scaled = a / g.k_mag_safe
        for j in range(g.dim):
            out[j] -= g.k_deriv_axes[j] * scaled
        return out

    def _nonlinear_hat(self, uh: np.ndarray, t: float) -> np.ndarray:
        g = self.grid
        cfg = self.config
        if not cfg.nonlinear_on and cfg.forcing is None:
            return np.zeros_like(uh)
        nh = np.zeros_like(uh)
        if cfg.nonlinear_on:
            u = VectorField.from_hat(g, uh)
            n = advection_correction(u, dealias=False)
            nh = -fl.fftn(n.values, g)
            if self._mask is not None:
                nh *= self._mask
        if cfg.forcing is not None:
            f = cfg.forcing(t) if callable(cfg.forcing) else cfg.forcing
            nh = nh + f.hat
        return nh

    # -- stepping --------------------------------------------------------

    def step_hat(self, uh: np.ndarray, ph: np.ndarray, t: float):
        """One ETDRK2 step on spectral state arrays; returns (uh, ph, t)."""
        prop = self.prop
        dt = self.config.dt
        g = self.grid

        n0 = self._nonlinear_hat(uh, t)
        a0, uT0 = self._split_longitudinal(uh)
        na0, nT0 = self._split_longitudinal(n0)

        # predictor: exact linear flow + phi1-weighted tendency
        a1, p1 = prop.apply_block("exp", a0, ph)
        fa, fp = prop.apply_block_forcing("phi1", na0)
        a1 += dt * fa
        p1 += dt * fp
        uT1 = prop.transverse_exp * uT0 + dt * prop.transverse_phi1 * nT0
        uh1 = self._assemble(a1, uT1)
        p1[g.zero_mode_index()] = 0.0

        n1 = self._nonlinear_hat(uh1, t + dt)
        na1, nT1 = self._split_longitudinal(n1)

        # corrector: phi2-weighted difference of tendencies
        fa, fp = prop.apply_block_forcing("phi2", na1 - na0)
        a2 = a1 + dt * fa
        p2 = p1 + dt * fp
        uT2 = uT1 + dt * prop.transverse_phi2 * (nT1 - nT0)
        uh2 = self._assemble(a2, uT2)
        p2[g.zero_mode_index()] = 0.0

        if not np.isfinite(uh2.sum()) or not np.isfinite(p2.sum()):
            self._raise_blowup(uh2, p2, t + dt)
        return uh2, p2, t + dt

    def _raise_blowup(self, uh, ph, t):
        bad = ~np.isfinite(uh)
        which = "velocity"
        if not bad.any():
            bad = ~np.isfinite(ph)
            which = "pressure"
        idx = np.argwhere(bad)[0]
        idx = idx[-self.grid.dim :]
        k = [int(self.grid.k_axes[j].ravel()[idx[j]]) for j in range(self.grid.dim)]
        raise SolverBlowup(t, k, which)

    def run_hat(self, uh, ph, t, nsteps, observer=None):
        for _ in range(nsteps):
            uh, ph, t = self.step_hat(uh, ph, t)
            if observer is not None:
                observer(uh, ph, t)
        return uh, ph, t


_INTEGRATORS: dict = {}


def _integrator(grid: Grid, eps: float, mu: float, config: ACStepConfig) -> AcIntegrator:
    if config.forcing is not None:
        return AcIntegrator(grid, eps, mu, config)
    key = (grid.dim, grid.n, eps, mu, config.dt, config.dealias, config.nonlinear_on)
    it = _INTEGRATORS.get(key)
    if it is None:
        it = AcIntegrator(grid, eps, mu, config)
        _INTEGRATORS[key] = it
    return it


def step(state: ACState, config: ACStepConfig) -> ACState:
    """Advance one ETDRK2 step; pressure is re-centered to zero mean."""
    it = _integrator(state.grid, state.eps, state.mu, config)
    uh, ph, t = it.step_hat(state.u.hat.copy(), state.p.hat.copy(), state.t)
    return ACState(
        u=VectorField.from_hat(state.grid, uh),
        p=ScalarField.from_hat(state.grid, ph),
        eps=state.eps,
        mu=state.mu,
        t=t,
    )


# -- initial data ---------------------------------------------------------


def scaled_pressure_profile(grid: Grid) -> ScalarField:
    """Fixed mean-zero profile used by the scaled(beta) pressure policy."""
    xs = grid.coords()
    vals = np.sin(xs[0]) + 0.5 * np.cos(2.0 * xs[1])
    if grid.dim == 3:
        vals = vals + (1.0 / 3.0) * np.sin(xs[2])
    return ScalarField(grid, vals)


def ns_compatible_pressure(u0: VectorField, dealias: bool = True) -> ScalarField:
    """Mean-zero p0 = InvLap(div((u0 . grad) u0)), the limit-system pressure."""
    g = u0.grid
    uh = u0.hat
    adv = np.zeros((g.dim,) + g.shape)
    for j in range(g.dim):
        for i in range(g.dim):
            dju_i = fl.ifftn(1j * g.k_deriv_axes[j] * uh[i], g).real
            adv[i] += u0.values[j] * dju_i
    advh = fl.fftn(adv, g)
    if dealias:
        advh *= g.dealias_mask
    divh = np.zeros(g.shape, dtype=np.complex128)
    for j in range(g.dim):
        divh += 1j * g.k_deriv_axes[j] * advh[j]
    ph = -divh / g.k_sq_safe
    ph[g.zero_mode_index()] = 0.0
    return ScalarField.from_hat(g, ph)


def violates_id(p0_policy) -> bool:
    """True if the policy breaks the vanishing-initial-pressure condition."""
    if isinstance(p0_policy, tuple) and p0_policy[0] == "scaled":
        return p0_policy[1] >= 0.5
    return False


def make_initial_data(
    u0: VectorField,
    p0_policy="zero",
    eps: float = 1e-3,
    mu: float = 1.0,
) -> ACState:
    """Build the t=0 state under a pressure initialization policy.

    Policies: "zero"; "ns_compatible" (the limit-system pressure of u0);
    ("scaled", beta) with p0 = eps^-beta times a fixed mean-zero profile,
    admissible (vanishing sqrt(eps) p0 as eps -> 0) iff beta < 1/2.
    """
    g = u0.grid
    if p0_policy == "zero":
        p0 = ScalarField.zeros(g)
    elif p0_policy == "ns_compatible":
        p0 = ns_compatible_pressure(u0)
    elif isinstance(p0_policy, tuple) and len(p0_policy) == 2 and p0_policy[0] == "scaled":
        beta = float(p0_policy[1])
        if beta < 0:
            raise ValueError("scaled policy needs beta >= 0")
        p0 = (eps**-beta) * scaled_pressure_profile(g)
    else:
        raise ValueError(f"unknown p0 policy: {p0_policy!r}")
    return ACState(u=u0.copy(), p=p0, eps=eps, mu=mu, t=0.0)
