"""Radial (spherically symmetric) transforms and norms on [0, r_max].

A radial function f(|x|) on R^3 is handled through u(r) = r f(r): the 3-D
Fourier transform reduces to the sine transform S(k) = int_0^inf u(r)
sin(kr) dr, Laplacians act as -k^2 on S, and

    ||f||_{L^2(R^3)}^2   = 8 int_0^inf S(k)^2 dk
    ||f||_{Hdot^s}^2     = 8 int_0^inf S(k)^2 k^{2s} dk.

The discrete versions use DST-I on the interior nodes of a uniform r grid.
"""

from __future__ import annotations

import numpy as np
import scipy.fft


def radial_lp(vals, r, p):
    """L^p norm with the spherical measure 4 pi r^2 dr (trapezoidal)."""
    if p == np.inf:
        return float(np.abs(vals).max())
    dr = r[1] - r[0]
    return float(
        (4.0 * np.pi * np.trapezoid(np.abs(vals) ** p * r**2, dx=dr)) ** (1.0 / p)
    )


def radial_sine_transform(vals, r):
    """(k, S): S(k_m) = int (r vals) sin(k_m r) dr, k_m = pi m / r_max."""
    u = (r * vals)[1:-1]
    S = scipy.fft.dst(u, type=1) * 0.5 * (r[1] - r[0])
    k = np.pi * np.arange(1, len(u) + 1) / r[-1]
    return k, S


def radial_inverse_sine(S, r):
    """Invert radial_sine_transform; the r=0 value is the one-sided limit."""
    dr = r[1] - r[0]
    u = scipy.fft.idst(S / (0.5 * dr), type=1)
    vals = np.zeros(len(r))
    vals[1:-1] = u / r[1:-1]
    if len(u) >= 2:
        vals[0] = (4.0 * u[0] - u[1]) / (2.0 * dr)
    return vals


def radial_hdot(vals, r, s):
    """Homogeneous Sobolev norm of a radial function on R^3."""
    k, S = radial_sine_transform(vals, r)
    dk = k[0]
    return float(np.sqrt(8.0 * np.sum(S**2 * k ** (2.0 * s)) * dk))


def radial_l2(vals, r):
    return radial_lp(vals, r, 2.0)


def radial_bessel_apply(vals, r, order):
    """(I - Lap)^(order/2) for radial functions via the sine transform."""
    k, S = radial_sine_transform(vals, r)
    S = S * (1.0 + k * k) ** (order / 2.0)
    return radial_inverse_sine(S, r)


def radial_multiplier_apply(vals, r, mult_of_k):
    """Apply a radial Fourier multiplier m(|k|) given as a callable."""
    k, S = radial_sine_transform(vals, r)
    S = S * mult_of_k(k)
    return radial_inverse_sine(S, r)
