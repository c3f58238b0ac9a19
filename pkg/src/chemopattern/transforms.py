"""Cosine-basis fields on the rectangle and the transforms between grid and
coefficient space.

Fields satisfying no-flux boundary conditions are represented by real
coefficients c[k1, k2] of cos(k1*pi*x1/ell1)*cos(k2*pi*x2/ell2); the Neumann
condition then holds identically.  The collocation grid is the half-integer
(midpoint) grid x_i = (i + 1/2) * ell / n, on which the type-II/III discrete
cosine transforms implement exact analysis/synthesis.

Partial derivatives leave the cosine family: differentiating along an axis
turns the cosine factor into a sine, so derivative evaluation carries a
per-axis parity flag and uses the type-III discrete sine transform along the
differentiated axis.  Products of derivatives have even parity again and are
projected back with the plain cosine analysis.  All evaluation routines accept
a target grid shape so nonlinear terms can be formed on a padded (dealiased)
grid.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.fft import dct, dst

from .core import DomainGeometry, ModeIndex, rho_table


@dataclass
class SpectralField:
    """Cosine coefficients (n1, n2) of a real Neumann field on ``geometry``."""

    coeffs: np.ndarray
    geometry: DomainGeometry

    def __post_init__(self) -> None:
        self.coeffs = np.asarray(self.coeffs, dtype=float)
        if self.coeffs.ndim != 2:
            raise ValueError("coeffs must be a 2D array")
        if not np.all(np.isfinite(self.coeffs)):
            raise ValueError("coeffs must be finite")

    @property
    def shape(self) -> tuple[int, int]:
        return self.coeffs.shape

    def mode(self, k: ModeIndex) -> float:
        """Amplitude of mode ``k`` (the normalized projection on e_k)."""
        return float(self.coeffs[k])

    def l2_norm(self) -> float:
        """Domain-averaged L2 norm, sqrt(<u^2>/|Omega|), computed spectrally."""
        w1 = np.where(np.arange(self.shape[0]) == 0, 1.0, 0.5)[:, None]
        w2 = np.where(np.arange(self.shape[1]) == 0, 1.0, 0.5)[None, :]
        return float(np.sqrt(np.sum(w1 * w2 * self.coeffs**2)))


@dataclass
class GridField:
    """Point values on the (n1, n2) midpoint collocation grid of ``geometry``."""

    values: np.ndarray
    geometry: DomainGeometry

    def __post_init__(self) -> None:
        self.values = np.asarray(self.values, dtype=float)
        if self.values.ndim != 2:
            raise ValueError("values must be a 2D array")
        if not np.all(np.isfinite(self.values)):
            raise ValueError("values must be finite")


def collocation_points(n: int, ell: float) -> np.ndarray:
    """Midpoint grid (i + 1/2) * ell / n, i = 0..n-1."""
    return (np.arange(n) + 0.5) * ell / n


def grid_to_coeffs(values: np.ndarray) -> np.ndarray:
    """Cosine analysis: point values on the midpoint grid -> coefficients."""
    m1, m2 = values.shape
    c = dct(dct(values, type=2, axis=0), type=2, axis=1)
    c /= (2.0 * m1) * (2.0 * m2)
    c[1:, :] *= 2.0
    c[:, 1:] *= 2.0
    return c


def coeffs_to_grid(coeffs: np.ndarray, shape: tuple[int, int] | None = None) -> np.ndarray:
    """Cosine synthesis on a grid of ``shape`` (>= coefficient shape)."""
    n1, n2 = coeffs.shape
    m1, m2 = shape if shape is not None else (n1, n2)
    if m1 < n1 or m2 < n2:
        raise ValueError(f"target grid {m1}x{m2} smaller than coefficients {n1}x{n2}")
    p = np.zeros((m1, m2))
    p[:n1, :n2] = coeffs
    p[1:, :] *= 0.5
    p[:, 1:] *= 0.5
    return dct(dct(p, type=3, axis=0), type=3, axis=1)


def _sine_synthesis(coeffs: np.ndarray, axis: int) -> np.ndarray:
    """Evaluate sum_j c[j] * sin(j*pi*x/ell) along ``axis`` on the midpoint
    grid; c[0] corresponds to j=0 and is ignored (sin(0) = 0)."""
    b = np.roll(coeffs, -1, axis=axis) * 0.5
    if axis == 0:
        b[-1, :] = 0.0
    else:
        b[:, -1] = 0.0
    return dst(b, type=3, axis=axis)


def coeffs_to_grid_dx(coeffs: np.ndarray, geometry: DomainGeometry,
                      shape: tuple[int, int] | None = None) -> np.ndarray:
    """Synthesis of the x1-derivative: sine parity along axis 0."""
    n1, n2 = coeffs.shape
    m1, m2 = shape if shape is not None else (n1, n2)
    if m1 < n1 or m2 < n2:
        raise ValueError(f"target grid {m1}x{m2} smaller than coefficients {n1}x{n2}")
    p = np.zeros((m1, m2))
    k1 = np.arange(n1)[:, None]
    p[:n1, :n2] = -(k1 * np.pi / geometry.ell1) * coeffs
    p[:, 1:] *= 0.5
    g = dct(p, type=3, axis=1)
    return _sine_synthesis(g, axis=0)


def coeffs_to_grid_dy(coeffs: np.ndarray, geometry: DomainGeometry,
                      shape: tuple[int, int] | None = None) -> np.ndarray:
    """Synthesis of the x2-derivative: sine parity along axis 1."""
    n1, n2 = coeffs.shape
    m1, m2 = shape if shape is not None else (n1, n2)
    if m1 < n1 or m2 < n2:
        raise ValueError(f"target grid {m1}x{m2} smaller than coefficients {n1}x{n2}")
    p = np.zeros((m1, m2))
    k2 = np.arange(n2)[None, :]
    p[:n1, :n2] = -(k2 * np.pi / geometry.ell2) * coeffs
    p[1:, :] *= 0.5
    g = dct(p, type=3, axis=0)
    return _sine_synthesis(g, axis=1)


def project_to_coeffs(values: np.ndarray, n1: int, n2: int) -> np.ndarray:
    """Cosine analysis of (possibly padded) grid values, truncated to n1 x n2."""
    return grid_to_coeffs(values)[:n1, :n2]


def transform_forward(g: GridField) -> SpectralField:
    """Exact analysis on the midpoint grid; inverse of :func:`transform_inverse`."""
    return SpectralField(grid_to_coeffs(g.values), g.geometry)


def transform_inverse(s: SpectralField) -> GridField:
    """Exact synthesis on the matching midpoint grid."""
    return GridField(coeffs_to_grid(s.coeffs), s.geometry)


def helmholtz_inverse(u: SpectralField, coupling: float) -> SpectralField:
    """Quasi-static chemoattractant solve: v = coupling * (-Lap + 1)^(-1) u.

    Diagonal in the cosine basis: v_k = coupling * u_k / (1 + rho_k), so
    (-Lap + 1) v recovers coupling * u exactly in the truncated basis.
    """
    n1, n2 = u.shape
    table = rho_table(n1, n2, u.geometry)
    return SpectralField(coupling * u.coeffs / (1.0 + table), u.geometry)


def laplacian(u: SpectralField) -> SpectralField:
    """Spectral Laplacian: multiply mode k by -rho_k."""
    n1, n2 = u.shape
    return SpectralField(-rho_table(n1, n2, u.geometry) * u.coeffs, u.geometry)
