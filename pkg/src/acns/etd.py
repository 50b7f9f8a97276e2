"""Exponential-integrator coefficient machinery.

Scalar phi functions and analytic functions of the per-mode 2x2 acoustic
blocks. Any analytic f of a 2x2 matrix A reduces to f(A) = s0*I + s1*A with
s1 the divided difference of f over the eigenvalues and s0 = f(l+) - l+ s1.
Near-degenerate eigenvalue pairs are the numerically delicate case: there the
divided difference is evaluated by averaging f over a small complex contour
enclosing both eigenvalues (trapezoid rule on a circle, spectrally accurate),
which is the series expansion in disguise and immune to cancellation.
"""

from __future__ import annotations

import numpy as np

#: below this |z| the direct (e^z - 1)/z forms lose digits; switch to series
_SERIES_RADIUS = 0.35
#: eigenvalue gaps smaller than this use the contour divided difference
_GAP_THRESHOLD = 0.5
#: contour radius and node count for the near-degenerate branch
_CONTOUR_RADIUS = 1.0
_CONTOUR_NODES = 64


def phi1(z):
    """phi1(z) = (e^z - 1)/z, entire; series branch near 0."""
    z = np.asarray(z)
    out = np.empty(z.shape, dtype=np.result_type(z, np.float64))
    small = np.abs(z) < _SERIES_RADIUS
    zs = z[small]
    # sum_{m>=0} z^m / (m+1)!
    acc = np.zeros_like(zs)
    for m in range(14, -1, -1):
        acc = acc * zs / (m + 2) + 1.0
    out[small] = acc
    zb = z[~small]
    out[~small] = (np.exp(zb) - 1.0) / zb
    return out


def phi2(z):
    """phi2(z) = (e^z - 1 - z)/z^2, entire; series branch near 0."""
    z = np.asarray(z)
    out = np.empty(z.shape, dtype=np.result_type(z, np.float64))
    small = np.abs(z) < _SERIES_RADIUS
    zs = z[small]
    # sum_{m>=0} z^m / (m+2)!
    acc = np.full_like(zs, 0.5)
    term = np.full_like(zs, 0.5)
    for m in range(1, 16):
        term = term * zs / (m + 2)
        acc = acc + term
    out[small] = acc
    zb = z[~small]
    out[~small] = (np.exp(zb) - 1.0 - zb) / (zb * zb)
    return out


_FUNCS = {
    "exp": np.exp,
    "phi1": phi1,
    "phi2": phi2,
}


def matfun_coeffs(name: str, zc: np.ndarray, delta2: np.ndarray):
    """Coefficients (s0, s1) with f(A) = s0*I + s1*A for 2x2 blocks.

    zc = tr(A)/2 (real, <= 0 for the dissipative blocks here); delta2 =
    zc^2 - det(A) (real, either sign). Eigenvalues are zc +- sqrt(delta2).
    Returns real arrays: for real zc and real delta2 the coefficients are
    real whether the eigenvalues are a real or a conjugate pair.
    """
    f = _FUNCS[name]
    zc = np.asarray(zc, dtype=np.float64)
    delta2 = np.asarray(delta2, dtype=np.float64)
    delta = np.sqrt(delta2.astype(np.complex128))
    gap = np.abs(2.0 * delta)

    s0 = np.empty(zc.shape, dtype=np.float64)
    s1 = np.empty(zc.shape, dtype=np.float64)

    wide = gap >= _GAP_THRESHOLD
    if np.any(wide):
        zp = zc[wide] + delta[wide]
        zm = zc[wide] - delta[wide]
        fp = f(zp)
        fm = f(zm)
        dd = (fp - fm) / (zp - zm)
        s1[wide] = dd.real
        s0[wide] = (fp - zp * dd).real

    narrow = ~wide
    if np.any(narrow):
        zcn = zc[narrow]
        d2n = delta2[narrow]
        theta = 2.0 * np.pi * (np.arange(_CONTOUR_NODES) + 0.5) / _CONTOUR_NODES
        ring = _CONTOUR_RADIUS * np.exp(1j * theta)
        znodes = zcn[..., None] + ring
        fvals = f(znodes)
        # f(A) = (1/M) sum_j f(z_j) (z_j - zc) [(z_j - 2 zc) I + A] / ((z_j - zc)^2 - delta^2)
        w = ring / (ring**2 - d2n[..., None])
        s1n = np.mean(fvals * w, axis=-1)
        s0n = np.mean(fvals * w * (znodes - 2.0 * zcn[..., None]), axis=-1)
        s1[narrow] = s1n.real
        s0[narrow] = s0n.real

    return s0, s1


class AcousticPropagator:
    """Exact per-mode propagator of the linearized acoustic-diffusive system.

    For each wavenumber k != 0 the longitudinal velocity amplitude a(k)
    (component of u_hat along -k/|k|) and the pressure amplitude p_hat(k)
    satisfy d/dt (a, p) = A(k) (a, p) with

        A(k) = [[-mu |k|^2, -i |k|], [-i |k| / eps, 0]],

    while the transverse (divergence-free) part of u_hat decays by
    exp(-mu |k|^2 dt) and the zero mode is free. The exponential and the
    phi1/phi2 functions of dt*A are tabulated once per (eps, mu, dt, grid).
    """

    def __init__(self, eps: float, mu: float, dt: float, grid):
        if eps <= 0 or mu < 0 or dt < 0:
            raise ValueError("need eps > 0, mu >= 0, dt >= 0")
        self.eps = eps
        self.mu = mu
        self.dt = dt
        self.grid = grid

        k2 = grid.k_sq
        kmag = grid.k_mag
        zc = -0.5 * mu * k2 * dt  # dt * tr(A)/2
        delta2 = (zc * zc) - (dt * dt) * k2 / eps  # dt^2 (zc^2 - det A)

        coeffs = {}
        for name in ("exp", "phi1", "phi2"):
            s0, s1 = matfun_coeffs(name, zc, delta2)
            # entries of f(dt A): f11 = s0 - s1 dt mu k^2; f22 = s0;
            # f12 = -i s1 dt |k|; f21 = -i s1 dt |k| / eps.
            coeffs[name] = {
                "m11": s0 - s1 * dt * mu * k2,
                "m22": s0,
                "m12": s1 * dt * kmag,  # apply with factor -1j
                "m21": s1 * dt * kmag / eps,  # apply with factor -1j
            }
        self.block = coeffs

        z = -mu * k2 * dt
        self.transverse_exp = np.exp(z)
        self.transverse_phi1 = phi1(z).real
        self.transverse_phi2 = phi2(z).real

    def matrices(self, name: str = "exp") -> np.ndarray:
        """Materialize the per-mode 2x2 complex matrices (tests, oracles)."""
        c = self.block[name]
        out = np.empty(self.grid.shape + (2, 2), dtype=np.complex128)
        out[..., 0, 0] = c["m11"]
        out[..., 0, 1] = -1j * c["m12"]
        out[..., 1, 0] = -1j * c["m21"]
        out[..., 1, 1] = c["m22"]
        return out

    def apply_block(self, name: str, a: np.ndarray, p: np.ndarray):
        """Apply f(dt A) to the stacked (a, p_hat) amplitude pair."""
        c = self.block[name]
        a_new = c["m11"] * a - 1j * c["m12"] * p
        p_new = -1j * c["m21"] * a + c["m22"] * p
        return a_new, p_new

    def apply_block_forcing(self, name: str, fa: np.ndarray):
        """Apply f(dt A) to a longitudinal forcing amplitude (fa, 0)."""
        c = self.block[name]
        return c["m11"] * fa, -1j * c["m21"] * fa
