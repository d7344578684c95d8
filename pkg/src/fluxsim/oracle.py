"""Independent phase-grid solver used to cross-check the oscillator basis.

The Hamiltonian is discretized on a uniform grid in phi with a high-order
central-difference Laplacian and solved as a banded symmetric eigenproblem.
The result is packaged as a :class:`~fluxsim.spectrum.Spectrum` whose
eigenvectors are grid wavefunctions, so ``basis.dim`` is the point count.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.linalg import eigvals_banded, solve_banded

from .errors import ConvergenceError
from .spectrum import CircuitParams, FluxBias, TransitionTable, as_flux

__all__ = ["GridSpectrum", "grid_oracle", "grid_transitions", "fd_second_derivative_coefficients"]

STENCIL_ORDER = 10
CONFINEMENT_FACTOR = 20.0


def fd_second_derivative_coefficients(order: int) -> np.ndarray:
    """Central stencil for d^2/dx^2 accurate to ``O(h^order)``."""
    half = order // 2
    offsets = np.arange(-half, half + 1)
    vander = np.vander(offsets, increasing=True).T.astype(float)
    rhs = np.zeros(len(offsets))
    rhs[2] = 2.0
    return np.linalg.solve(vander, rhs)


@dataclass(frozen=True)
class GridSpectrum:
    energies: np.ndarray
    wavefunctions: np.ndarray  # columns normalized so sum |psi|^2 = 1
    grid: np.ndarray
    params: CircuitParams
    flux: FluxBias

    @property
    def f01(self) -> float:
        return float(self.energies[1] - self.energies[0])


def _phi_max(params: CircuitParams, n_levels: int) -> float:
    # upper bound on the highest retained level, measured from the potential minimum
    e_top = params.plasma_frequency * (n_levels + 2) + 2 * params.E_J
    return math.sqrt(2 * CONFINEMENT_FACTOR * e_top / params.E_L) + math.pi


def _solve_grid(params, flux, n_levels, points):
    phi_max = _phi_max(params, n_levels)
    grid = np.linspace(-phi_max, phi_max, points)
    h = grid[1] - grid[0]
    coeffs = fd_second_derivative_coefficients(STENCIL_ORDER)
    half = STENCIL_ORDER // 2
    potential = 0.5 * params.E_L * grid**2 - params.E_J * np.cos(grid - flux.phi_ext)
    kinetic = -4 * params.E_C / h**2
    bands = np.zeros((half + 1, points))
    bands[0] = potential + kinetic * coeffs[half]
    for k in range(1, half + 1):
        bands[k, : points - k] = kinetic * coeffs[half + k]
    energies = eigvals_banded(bands, lower=True, select="i", select_range=(0, n_levels - 1))
    return energies, bands, grid


def _inverse_iteration(bands, energies, iterations=3):
    """Eigenvectors of a symmetric banded matrix for known eigenvalues."""
    half = bands.shape[0] - 1
    points = bands.shape[1]
    full = np.zeros((2 * half + 1, points))
    full[half:] = bands
    for k in range(1, half + 1):
        full[half - k, k:] = bands[k, : points - k]
    rng = np.random.default_rng(0)
    scale = max(np.max(np.abs(energies)), 1.0)
    vecs = np.empty((points, len(energies)))
    for col, energy in enumerate(energies):
        shifted = full.copy()
        shifted[half] -= energy + 1e-10 * scale
        x = rng.standard_normal(points)
        for _ in range(iterations):
            x = solve_banded((half, half), shifted, x)
            x /= np.linalg.norm(x)
        vecs[:, col] = x
    return vecs


def grid_oracle(
    params: CircuitParams,
    flux: FluxBias | float,
    n_levels: int = 5,
    points: int = 2048,
    tol: float = 1e-9,
) -> GridSpectrum:
    """Solve on ``points`` and ``2 * points`` grid points; raise if they disagree."""
    flux = as_flux(flux)
    points = max(int(points), 2048)
    coarse, _, _ = _solve_grid(params, flux, n_levels, points)
    energies, bands, grid = _solve_grid(params, flux, n_levels, 2 * points)
    rel = np.max(np.abs(coarse - energies) / np.maximum(np.abs(energies), 1.0))
    if rel > tol:
        raise ConvergenceError(f"phase grid under-resolved: doubling moved levels by {rel:.3g}")
    vecs = _inverse_iteration(bands, energies)
    signs = np.sign(vecs[np.argmax(np.abs(vecs), axis=0), np.arange(vecs.shape[1])])
    return GridSpectrum(energies, vecs * signs, grid, params, flux)


def grid_transitions(spec: GridSpectrum) -> TransitionTable:
    """Same observables as :func:`fluxsim.spectrum.transitions`, on the grid."""
    psi = spec.wavefunctions
    h = spec.grid[1] - spec.grid[0]
    freq = spec.energies[None, :] - spec.energies[:, None]
    phi = np.abs(psi.T @ (spec.grid[:, None] * psi))
    # n = -i d/dphi, fourth-order central first derivative
    d = np.zeros_like(psi)
    d[2:-2] = (-psi[4:] + 8 * psi[3:-1] - 8 * psi[1:-3] + psi[:-4]) / (12 * h)
    n = np.abs(psi.T @ d)
    return TransitionTable(freq, phi, n)

