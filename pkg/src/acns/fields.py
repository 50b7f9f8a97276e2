"""Spectral field algebra on the periodic box.

Fields carry a physical representation (real float64 array) and a lazily
computed spectral one. FFT convention: unnormalized forward transform,
1/n^dim on the inverse (numpy default), so a unit-amplitude single mode
sin(x_1) has coefficients of modulus n^dim / 2 at wavenumbers +-e_1.
"""

from __future__ import annotations

import numbers

import numpy as np
import scipy.fft

from .grid import Grid

#: L^p exponents supported by quadrature norms.
SUPPORTED_LP = (1.0, 1.5, 2.0, 3.0, 4.0, 6.0, np.inf)

_FFT_WORKERS = 1


def set_fft_workers(count: int):
    """Pin the FFT thread count (recorded in run metadata for determinism)."""
    global _FFT_WORKERS
    _FFT_WORKERS = max(1, int(count))


def get_fft_workers() -> int:
    return _FFT_WORKERS


def fftn(values: np.ndarray, grid: Grid) -> np.ndarray:
    axes = tuple(range(-grid.dim, 0))
    return scipy.fft.fftn(values, axes=axes, workers=_FFT_WORKERS)


def ifftn(coeffs: np.ndarray, grid: Grid) -> np.ndarray:
    axes = tuple(range(-grid.dim, 0))
    return scipy.fft.ifftn(coeffs, axes=axes, workers=_FFT_WORKERS)


class ResolutionMismatch(ValueError):
    pass


class ScalarField:
    """Real scalar field with dual physical/spectral representations."""

    __slots__ = ("grid", "values", "_hat")

    def __init__(self, grid: Grid, values: np.ndarray, hat: np.ndarray = None):
        if values.shape != grid.shape:
            raise ResolutionMismatch(
                f"values shape {values.shape} does not match grid {grid.shape}"
            )
        self.grid = grid
        self.values = np.asarray(values, dtype=np.float64)
        self._hat = hat

    @classmethod
    def from_hat(cls, grid: Grid, hat: np.ndarray) -> "ScalarField":
        if hat.shape != grid.shape:
            raise ResolutionMismatch(
                f"coefficient shape {hat.shape} does not match grid {grid.shape}"
            )
        values = ifftn(hat, grid).real
        return cls(grid, values, hat=np.asarray(hat, dtype=np.complex128))

    @classmethod
    def zeros(cls, grid: Grid) -> "ScalarField":
        return cls(grid, np.zeros(grid.shape))

    @property
    def hat(self) -> np.ndarray:
        if self._hat is None:
            self._hat = fftn(self.values, self.grid)
        return self._hat

    def copy(self) -> "ScalarField":
        hat = None if self._hat is None else self._hat.copy()
        return ScalarField(self.grid, self.values.copy(), hat)

    def mean(self) -> float:
        return float(self.values.mean())

    def __add__(self, other):
        return ScalarField(self.grid, self.values + other.values)

    def __sub__(self, other):
        return ScalarField(self.grid, self.values - other.values)

    def __mul__(self, c):
        if not isinstance(c, numbers.Number):
            return NotImplemented
        hat = None if self._hat is None else self._hat * c
        return ScalarField(self.grid, self.values * c, hat)

    __rmul__ = __mul__


class VectorField:
    """Vector field stored as a (dim, n, ..., n) stack of real components."""

    __slots__ = ("grid", "values", "_hat")

    def __init__(self, grid: Grid, values: np.ndarray, hat: np.ndarray = None):
        values = np.asarray(values, dtype=np.float64)
        if values.shape != (grid.dim,) + grid.shape:
            raise ResolutionMismatch(
                f"values shape {values.shape} does not match (dim,)+grid {grid.shape}"
            )
        self.grid = grid
        self.values = values
        self._hat = hat

    @classmethod
    def from_hat(cls, grid: Grid, hat: np.ndarray) -> "VectorField":
        values = ifftn(hat, grid).real
        return cls(grid, values, hat=np.asarray(hat, dtype=np.complex128))

    @classmethod
    def from_components(cls, components) -> "VectorField":
        grid = components[0].grid
        return cls(grid, np.stack([c.values for c in components]))

    @classmethod
    def zeros(cls, grid: Grid) -> "VectorField":
        return cls(grid, np.zeros((grid.dim,) + grid.shape))

    @property
    def hat(self) -> np.ndarray:
        if self._hat is None:
            self._hat = fftn(self.values, self.grid)
        return self._hat

    def component(self, i: int) -> ScalarField:
        hat = None if self._hat is None else self._hat[i]
        return ScalarField(self.grid, self.values[i], hat)

    def copy(self) -> "VectorField":
        hat = None if self._hat is None else self._hat.copy()
        return VectorField(self.grid, self.values.copy(), hat)

    def magnitude(self) -> np.ndarray:
        return np.sqrt(np.sum(self.values**2, axis=0))

    def __add__(self, other):
        return VectorField(self.grid, self.values + other.values)

    def __sub__(self, other):
        return VectorField(self.grid, self.values - other.values)

    def __mul__(self, c):
        if not isinstance(c, numbers.Number):
            return NotImplemented
        hat = None if self._hat is None else self._hat * c
        return VectorField(self.grid, self.values * c, hat)

    __rmul__ = __mul__


Field = ScalarField | VectorField


def transform(field: Field) -> Field:
    """Populate the spectral representation (no-op if already cached)."""
    field.hat
    return field


def inverse_transform(field: Field) -> Field:
    """Rebuild physical values from the spectral coefficients."""
    if field._hat is None:
        raise ValueError("field has no spectral coefficients to invert")
    cls = type(field)
    return cls.from_hat(field.grid, field._hat)


def gradient(f: ScalarField) -> VectorField:
    g = f.grid
    out = np.empty((g.dim,) + g.shape, dtype=np.complex128)
    for j in range(g.dim):
        out[j] = 1j * g.k_deriv_axes[j] * f.hat
    return VectorField.from_hat(g, out)


def divergence(v: VectorField) -> ScalarField:
    g = v.grid
    out = np.zeros(g.shape, dtype=np.complex128)
    for j in range(g.dim):
        out += 1j * g.k_deriv_axes[j] * v.hat[j]
    return ScalarField.from_hat(g, out)


def laplacian(field: Field) -> Field:
    g = field.grid
    cls = type(field)
    return cls.from_hat(g, -g.k_sq * field.hat)


def leray_decompose(v: VectorField):
    """Split v into (Pv, Qv): divergence-free part and gradient part.

    Qv_hat(k) = k (k . v_hat) / |k|^2 for k != 0; the zero mode (spatial
    mean) is assigned entirely to Pv.
    """
    g = v.grid
    vh = v.hat
    kdotv = np.zeros(g.shape, dtype=np.complex128)
    for j in range(g.dim):
        kdotv += g.k_deriv_axes[j] * vh[j]
    kdotv /= g.k_sq_safe
    qh = np.empty_like(vh)
    for j in range(g.dim):
        qh[j] = g.k_deriv_axes[j] * kdotv
    qh[(slice(None),) + g.zero_mode_index()] = 0.0
    return VectorField.from_hat(g, vh - qh), VectorField.from_hat(g, qh)


def leray_p(v: VectorField) -> VectorField:
    return leray_decompose(v)[0]


def leray_q(v: VectorField) -> VectorField:
    return leray_decompose(v)[1]


def dealias(field: Field) -> Field:
    cls = type(field)
    return cls.from_hat(field.grid, field.hat * field.grid.dealias_mask)


def _check_p(p: float):
    if not any(p == q for q in SUPPORTED_LP):
        raise ValueError(f"unsupported L^p exponent p={p}; supported: {SUPPORTED_LP}")


def _pointwise_abs(field: Field) -> np.ndarray:
    if isinstance(field, VectorField):
        return field.magnitude()
    return np.abs(field.values)


def lp_norm(field: Field, p: float) -> float:
    """L^p norm by equal-weight quadrature on the uniform grid."""
    _check_p(p)
    a = _pointwise_abs(field)
    if p == np.inf:
        return float(a.max()) if a.size else 0.0
    vol = field.grid.cell_volume
    return float((vol * np.sum(a**p)) ** (1.0 / p))


def l2_inner(f: Field, g: Field) -> float:
    """L^2 inner product (sum over components for vector fields)."""
    return float(f.grid.cell_volume * np.sum(f.values * g.values))


def l2_norm_hat(hat: np.ndarray, grid: Grid) -> float:
    """L^2 norm straight from spectral coefficients (Parseval)."""
    return float(np.sqrt(grid.parseval * np.sum(np.abs(hat) ** 2)))


def bessel_multiplier(grid: Grid, order: float) -> np.ndarray:
    """Symbol of (I - Laplacian)^(order/2): (1 + |k|^2)^(order/2)."""
    return (1.0 + grid.k_sq) ** (order / 2.0)


def sobolev_norm(field: Field, k: float, p: float, homogeneous: bool = False) -> float:
    """W^{k,p} norm: L^p norm of (I - Laplacian)^{k/2} applied spectrally.

    With homogeneous=True the multiplier is |k|^k and the zero mode is
    dropped (the H-dot scale); only then may k be negative at p != 2.
    """
    _check_p(p)
    g = field.grid
    if homogeneous:
        mult = g.k_mag_safe**k
        mult[g.zero_mode_index()] = 0.0
    else:
        mult = bessel_multiplier(g, k)
    cls = type(field)
    smoothed = cls.from_hat(g, field.hat * mult)
    return lp_norm(smoothed, p)


def space_time_norm(fields, q: float, r: float, dt: float) -> float:
    """L^q in time (trapezoidal, uniform sampling dt) of L^r spatial norms."""
    if len(fields) < 2:
        raise ValueError("space_time_norm needs at least 2 samples")
    norms = np.array([lp_norm(f, r) for f in fields])
    return lq_time(norms, q, dt)


def lq_time(norms: np.ndarray, q: float, dt: float) -> float:
    """Trapezoidal L^q norm in time of a sampled scalar series."""
    norms = np.asarray(norms, dtype=np.float64)
    if q == np.inf:
        return float(np.max(norms))
    if q not in (1.0, 2.0, 4.0):
        raise ValueError(f"unsupported temporal exponent q={q}")
    return float(np.trapezoid(norms**q, dx=dt) ** (1.0 / q))


def recenter(f: ScalarField) -> ScalarField:
    """Remove the spatial mean (zero mode)."""
    hat = f.hat.copy()
    hat[f.grid.zero_mode_index()] = 0.0
    return ScalarField.from_hat(f.grid, hat)


def solve_poisson(rhs: ScalarField) -> ScalarField:
    """Solve Laplacian(u) = rhs with zero-mean convention (mean-zero rhs)."""
    g = rhs.grid
    hat = -rhs.hat / g.k_sq_safe
    hat[g.zero_mode_index()] = 0.0
    return ScalarField.from_hat(g, hat)


def band_limit(field: Field, kmax: float) -> Field:
    """Zero every mode with any |k_j| > kmax (sharp axis-wise cutoff)."""
    g = field.grid
    mask = np.ones(g.shape, dtype=bool)
    for k in g.k_axes:
        mask &= np.abs(k) <= kmax
    cls = type(field)
    return cls.from_hat(g, field.hat * mask)
