"""Incompressible Navier-Stokes reference solver and limit-pressure recovery.

The oracle integrates du/dt = P[mu Lap(u) - (u . grad) u] on the same grid,
with the same dealiasing and the same ETDRK2 coefficients as the
artificial-compressibility solver, so eps-convergence studies isolate eps
rather than scheme differences. The associated pressure (the one the
approximating pressure converges to) is p = InvLap(div((u . grad) u)),
equal to InvLap(tr((Du)^2)) for divergence-free u.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import fields as fl
from .etd import phi1, phi2
from .fields import ScalarField, VectorField
from .grid import Grid


@dataclass
class NSState:
    u: VectorField
    mu: float = 1.0
    t: float = 0.0

    @property
    def grid(self) -> Grid:
        return self.u.grid

    def energy(self) -> float:
        return 0.5 * fl.lp_norm(self.u, 2) ** 2


class NsIntegrator:
    """ETDRK2 with exact viscous propagator and Leray-projected advection."""

    def __init__(self, grid: Grid, mu: float, dt: float, dealias: bool = True):
        self.grid = grid
        self.mu = mu
        self.dt = dt
        z = -mu * grid.k_sq * dt
        self.expz = np.exp(z)
        self.phi1 = phi1(z).real
        self.phi2 = phi2(z).real
        self._mask = grid.dealias_mask if dealias else None
        self.dealias = dealias

    def _project(self, vh: np.ndarray) -> np.ndarray:
        g = self.grid
        kdotv = np.zeros(g.shape, dtype=np.complex128)
        for j in range(g.dim):
            kdotv += g.k_deriv_axes[j] * vh[j]
        kdotv /= g.k_sq_safe
        out = vh.copy()
        for j in range(g.dim):
            out[j] -= g.k_deriv_axes[j] * kdotv
        return out

    def _nonlinear_hat(self, uh: np.ndarray) -> np.ndarray:
        g = self.grid
        u = VectorField.from_hat(g, uh)
        adv = np.zeros((g.dim,) + g.shape)
        for j in range(g.dim):
            for i in range(g.dim):
                dju_i = fl.ifftn(1j * g.k_deriv_axes[j] * uh[i], g).real
                adv[i] += u.values[j] * dju_i
        nh = -fl.fftn(adv, g)
        if self._mask is not None:
            nh *= self._mask
        return self._project(nh)

    def step_hat(self, uh: np.ndarray, t: float):
        dt = self.dt
        n0 = self._nonlinear_hat(uh)
        uh1 = self.expz * uh + dt * self.phi1 * n0
        n1 = self._nonlinear_hat(uh1)
        uh2 = uh1 + dt * self.phi2 * (n1 - n0)
        uh2 = self._project(uh2)  # divergence hygiene after every step
        if not np.isfinite(uh2.sum()):
            raise FloatingPointError(f"non-finite oracle state at t={t + dt:.6g}")
        return uh2, t + dt

    def run_hat(self, uh, t, nsteps, observer=None):
        for _ in range(nsteps):
            uh, t = self.step_hat(uh, t)
            if observer is not None:
                observer(uh, t)
        return uh, t


def ns_step(state: NSState, dt: float, dealias: bool = True) -> NSState:
    """Advance the oracle one ETDRK2 step."""
    it = NsIntegrator(state.grid, state.mu, dt, dealias=dealias)
    uh, t = it.step_hat(state.u.hat.copy(), state.t)
    return NSState(u=VectorField.from_hat(state.grid, uh), mu=state.mu, t=t)


def _advection_hat(u: VectorField, dealias: bool = True) -> np.ndarray:
    """Spectral (u . grad) u with the 2/3 mask on the quadratic product."""
    g = u.grid
    uh = u.hat
    adv = np.zeros((g.dim,) + g.shape)
    for j in range(g.dim):
        for i in range(g.dim):
            dju_i = fl.ifftn(1j * g.k_deriv_axes[j] * uh[i], g).real
            adv[i] += u.values[j] * dju_i
    advh = fl.fftn(adv, g)
    if dealias:
        advh *= g.dealias_mask
    return advh


def limit_pressure(u: VectorField, dealias: bool = True, warn_tol: float = 1e-8):
    """Limit pressure InvLap(div((u . grad) u)) as a mean-zero field.

    Cross-checked against the equivalent InvLap(tr((Du)^2)) form, which is
    an identity only for divergence-free input; a warning is emitted when
    div u is not numerically zero.
    """
    import warnings

    g = u.grid
    divu = fl.divergence(u)
    if fl.lp_norm(divu, 2) > warn_tol * max(fl.lp_norm(u, 2), 1e-300):
        warnings.warn("limit_pressure called on a field with nonzero divergence")

    advh = _advection_hat(u, dealias=dealias)
    divh = np.zeros(g.shape, dtype=np.complex128)
    for j in range(g.dim):
        divh += 1j * g.k_deriv_axes[j] * advh[j]
    ph = -divh / g.k_sq_safe
    ph[g.zero_mode_index()] = 0.0
    return ScalarField.from_hat(g, ph)


def limit_pressure_trace_form(u: VectorField, dealias: bool = True) -> ScalarField:
    """InvLap(tr((Du)^2)) with tr((Du)^2) = sum_ij d_i u_j d_j u_i."""
    g = u.grid
    uh = u.hat
    grads = np.empty((g.dim, g.dim) + g.shape)
    for i in range(g.dim):
        for j in range(g.dim):
            grads[i, j] = fl.ifftn(1j * g.k_deriv_axes[i] * uh[j], g).real
    tr = np.zeros(g.shape)
    for i in range(g.dim):
        for j in range(g.dim):
            tr += grads[i, j] * grads[j, i]
    trh = fl.fftn(tr, g)
    if dealias:
        trh = trh * g.dealias_mask
    ph = -trh / g.k_sq_safe
    ph[g.zero_mode_index()] = 0.0
    return ScalarField.from_hat(g, ph)


def limit_gradient_identity(state, coefficient: float = 1.5, dealias: bool = True):
    """Residual of the gradient-pressure identity on one solver snapshot.

    Applying the gradient projector Q to the momentum equation gives the
    exact snapshot identity

        grad(p) = dQu/dt - Lap(Qu) + Q[ div(u x u) - (c - 1) u div(Qu) ]

    with c = 3/2, where dQu/dt is reconstructed spectrally from the momentum
    balance itself (convective form) and the bracket uses the conservative
    form, so the residual probes the product-rule rearrangement between the
    two and in particular the coefficient c. Returns the relative W^{-1,2}
    size of the mismatch; any other value of c (e.g. the negative control
    c = 1) leaves an O(1) multiple of Q[u div u].
    """
    from .acsolver import advection_correction

    g = state.grid
    u = state.u
    uh = u.hat
    ph = state.p.hat
    mu = state.mu

    def q_project(vh):
        kdotv = np.zeros(g.shape, dtype=np.complex128)
        for j in range(g.dim):
            kdotv += g.k_deriv_axes[j] * vh[j]
        kdotv /= g.k_sq_safe
        out = np.empty_like(vh)
        for j in range(g.dim):
            out[j] = g.k_deriv_axes[j] * kdotv
        out[(slice(None),) + g.zero_mode_index()] = 0.0
        return out

    grad_p = np.empty((g.dim,) + g.shape, dtype=np.complex128)
    for j in range(g.dim):
        grad_p[j] = 1j * g.k_deriv_axes[j] * ph

    # du/dt from the momentum balance, convective form
    nl = advection_correction(u, dealias=dealias)
    dudt = grad_p - mu * g.k_sq * uh - nl.hat
    dqu_dt = q_project(dudt)

    lap_qu = -g.k_sq * q_project(uh)

    # conservative form: div(u x u) and u div(Qu) = u div(u)
    uu = np.einsum("i...,j...->ij...", u.values, u.values)
    uuh = fl.fftn(uu, g)
    div_uu = np.zeros((g.dim,) + g.shape, dtype=np.complex128)
    for i in range(g.dim):
        for j in range(g.dim):
            div_uu[i] += 1j * g.k_deriv_axes[j] * uuh[i, j]
    divu_phys = fl.ifftn(
        sum(1j * g.k_deriv_axes[j] * uh[j] for j in range(g.dim)), g
    ).real
    u_divu_h = fl.fftn(u.values * divu_phys, g)
    if dealias:
        div_uu *= g.dealias_mask
        u_divu_h *= g.dealias_mask

    rhs = dqu_dt - lap_qu + q_project(div_uu - (coefficient - 1.0) * u_divu_h)

    def wm12(vh):
        mult = (1.0 + g.k_sq) ** -0.5
        return float(
            np.sqrt(g.parseval * np.sum(np.abs(vh * mult) ** 2))
        )

    resid = wm12(grad_p - rhs)
    scale = max(wm12(grad_p), wm12(dqu_dt), wm12(lap_qu), wm12(q_project(div_uu)))
    if scale == 0.0:
        return 0.0
    return resid / scale
