"""Periodic box discretization.

The box is the torus [0, 2*pi)^dim sampled on a uniform n^dim grid, so the
angular wavenumbers are integers and FFT indices coincide with wavenumbers.
"""

from __future__ import annotations

import math

import numpy as np

TWO_PI = 2.0 * math.pi


class Grid:
    """Uniform periodic grid on [0, 2*pi)^dim with cached wavenumber arrays."""

    def __init__(self, dim: int, n: int):
        if dim not in (2, 3):
            raise ValueError(f"dim must be 2 or 3, got {dim}")
        if n < 8 or n % 2 != 0:
            raise ValueError(f"n must be even and >= 8, got {n}")
        self.dim = dim
        self.n = n
        self.length = TWO_PI
        self.spacing = self.length / n
        self.shape = (n,) * dim
        self.size = n**dim
        self.cell_volume = self.spacing**dim

        k1 = np.fft.fftfreq(n, d=1.0 / n)  # integer wavenumbers 0..n/2-1, -n/2..-1
        # Nyquist column is zeroed in the derivative wavenumbers: ik at the
        # unpaired -n/2 mode would break conjugate symmetry of d/dx.
        k1_deriv = k1.copy()
        k1_deriv[n // 2] = 0.0

        self.k_axes = []
        self.k_deriv_axes = []
        for axis in range(dim):
            sh = [1] * dim
            sh[axis] = n
            self.k_axes.append(k1.reshape(sh))
            self.k_deriv_axes.append(k1_deriv.reshape(sh))

        self.k_sq = sum(k * k for k in self.k_axes)
        self.k_mag = np.sqrt(self.k_sq)
        # Safe divisors: 1.0 at the zero mode, |k| (or |k|^2) elsewhere.
        self.k_sq_safe = self.k_sq.copy()
        self.k_sq_safe[self.k_sq == 0] = 1.0
        self.k_mag_safe = np.sqrt(self.k_sq_safe)

        cutoff = n / 3.0  # 2/3 rule: keep |k_j| < n/3 on every axis
        mask = np.ones(self.shape, dtype=bool)
        for k in self.k_axes:
            mask &= np.abs(k) < cutoff
        self.dealias_mask = mask

        # Parseval factor: ||f||_L2^2 = parseval * sum |fhat|^2 for the
        # unnormalized forward transform.
        self.parseval = self.length**dim / self.size**2

    def coords(self):
        """Physical coordinate arrays, meshgrid with 'ij' indexing."""
        x = np.arange(self.n) * self.spacing
        return np.meshgrid(*([x] * self.dim), indexing="ij")

    def zero_mode_index(self):
        return (0,) * self.dim

    def __eq__(self, other):
        return (
            isinstance(other, Grid) and self.dim == other.dim and self.n == other.n
        )

    def __hash__(self):
        return hash((self.dim, self.n))

    def __repr__(self):
        return f"Grid(dim={self.dim}, n={self.n})"
