"""Fluxonium Hamiltonian, spectra, matrix elements and flux derivatives.

The Hamiltonian ``4 E_C n^2 + E_L phi^2 / 2 - E_J cos(phi - phi_ext)`` is
represented in the eigenbasis of its linear part (a harmonic oscillator of
frequency ``sqrt(8 E_L E_C)``).  With ``phi = phi_zpf (a + a^dag)`` the cosine
term reduces to matrix elements of the displacement operator
``exp(i phi) = D(i phi_zpf)``, which are known in closed form through
generalized Laguerre polynomials.  Evaluating them exactly (rather than
exponentiating a truncated ``phi``) keeps the truncated cosine free of edge
artefacts.

All energies are in GHz (E/h) and flux biases in units of the flux quantum.
"""

from __future__ import annotations

import functools
import math
import warnings
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np
from scipy.linalg import eigh
from scipy.special import eval_genlaguerre, gammaln

from .constants import CONST, GHZ
from .errors import ConvergenceError, DegenerateLevelError, InputError, NumericalError

__all__ = [
    "CircuitParams",
    "FluxBias",
    "BasisConfig",
    "Spectrum",
    "TransitionTable",
    "FluxoniumRegimeWarning",
    "make_hamiltonian",
    "spectrum",
    "transitions",
    "flux_sweep",
    "flux_derivative",
    "phase_operator",
    "charge_operator",
    "sin_operator",
    "as_flux",
]


class FluxoniumRegimeWarning(UserWarning):
    """Parameters outside ``E_L << E_J`` and ``1 <~ E_J/E_C <~ 10``."""


@dataclass(frozen=True)
class CircuitParams:
    """Fluxonium circuit energies in GHz and the chain junction count."""

    E_J: float
    E_C: float
    E_L: float
    N: int = 1

    def __post_init__(self):
        for name in ("E_J", "E_C", "E_L"):
            value = getattr(self, name)
            if not isinstance(value, (int, float, np.floating, np.integer)) or not math.isfinite(value):
                raise InputError(f"{name} must be a finite number, got {value!r}")
        if self.E_J < 0:
            raise InputError(f"E_J must be non-negative, got {self.E_J}")
        if self.E_C <= 0 or self.E_L <= 0:
            raise InputError("E_C and E_L must be positive")
        if int(self.N) != self.N or self.N < 1:
            raise InputError(f"junction count N must be an integer >= 1, got {self.N!r}")
        if not self.in_fluxonium_regime:
            warnings.warn(
                f"E_J={self.E_J}, E_C={self.E_C}, E_L={self.E_L} is outside the fluxonium regime",
                FluxoniumRegimeWarning,
                stacklevel=3,
            )

    @property
    def in_fluxonium_regime(self) -> bool:
        return self.E_L < self.E_J and 1.0 <= self.E_J / self.E_C <= 10.0

    @property
    def capacitance(self) -> float:
        """Shunt capacitance in F, from ``E_C = e^2 / 2C``."""
        return CONST.e**2 / (2 * CONST.h * self.E_C * GHZ)

    @property
    def inductance(self) -> float:
        """Shunt inductance in H, from ``E_L = (hbar / 2e)^2 / L``."""
        return (CONST.hbar / (2 * CONST.e)) ** 2 / (CONST.h * self.E_L * GHZ)

    @property
    def plasma_frequency(self) -> float:
        """Frequency of the linear part, ``sqrt(8 E_L E_C)`` in GHz."""
        return math.sqrt(8 * self.E_L * self.E_C)

    @property
    def phi_zpf(self) -> float:
        return (2 * self.E_C / self.E_L) ** 0.25


@dataclass(frozen=True)
class FluxBias:
    """External flux in units of the flux quantum; ``f = 0.5`` is the sweet spot."""

    f: float

    def __post_init__(self):
        if not math.isfinite(self.f):
            raise InputError(f"flux must be finite, got {self.f!r}")

    @property
    def phi_ext(self) -> float:
        return 2 * math.pi * self.f


def as_flux(flux: FluxBias | float) -> FluxBias:
    return flux if isinstance(flux, FluxBias) else FluxBias(float(flux))


@dataclass(frozen=True)
class BasisConfig:
    dim: int = 60
    tol: float = 1e-6

    def __post_init__(self):
        if int(self.dim) != self.dim or self.dim < 10:
            raise InputError(f"basis dimension must be an integer >= 10, got {self.dim!r}")
        if not self.tol > 0:
            raise InputError(f"tolerance must be positive, got {self.tol!r}")


DEFAULT_BASIS = BasisConfig()


@dataclass(frozen=True)
class Spectrum:
    """Lowest eigenpairs of the fluxonium Hamiltonian.

    ``eigenvectors[:, k]`` holds the oscillator-basis coefficients of level k.
    """

    energies: np.ndarray
    eigenvectors: np.ndarray
    params: CircuitParams
    flux: FluxBias
    basis: BasisConfig

    @property
    def n_levels(self) -> int:
        return len(self.energies)

    @property
    def f01(self) -> float:
        return float(self.energies[1] - self.energies[0])

    def operator(self, op: np.ndarray) -> np.ndarray:
        """Matrix of an oscillator-basis operator between retained levels."""
        v = self.eigenvectors
        return v.conj().T @ op @ v


@dataclass(frozen=True)
class TransitionTable:
    """Pairwise transition frequencies and dipole magnitudes.

    ``freq[i, j] = E_j - E_i`` (GHz), ``phi[i, j] = |<i|phi|j>|`` and
    ``n[i, j] = |<i|n|j>|``.
    """

    freq: np.ndarray
    phi: np.ndarray
    n: np.ndarray

    @property
    def n_levels(self) -> int:
        return self.freq.shape[0]

    def rows(self) -> Iterable[tuple[int, int, float, float, float]]:
        for i in range(self.n_levels):
            for j in range(i + 1, self.n_levels):
                yield i, j, float(self.freq[i, j]), float(self.phi[i, j]), float(self.n[i, j])

    @property
    def anharmonicity_ratio(self) -> float:
        """omega_12 / omega_01."""
        return float(self.freq[1, 2] / self.freq[0, 1])


@functools.lru_cache(maxsize=64)
def _displacement(dim: int, phi_zpf: float) -> np.ndarray:
    """Matrix of ``exp(i phi)`` with ``phi = phi_zpf (a + a^dag)``.

    For ``alpha = i phi_zpf`` and ``m >= n``:
    ``<m|D(alpha)|n> = sqrt(n!/m!) alpha^(m-n) exp(-|alpha|^2/2) L_n^(m-n)(|alpha|^2)``;
    the matrix is symmetric for purely imaginary alpha.
    """
    x = phi_zpf**2
    idx = np.arange(dim)
    rows, cols = np.meshgrid(idx, idx, indexing="ij")
    lo = np.minimum(rows, cols)
    k = np.abs(rows - cols)
    log_mag = 0.5 * (gammaln(lo + 1) - gammaln(lo + k + 1)) + k * math.log(phi_zpf) - x / 2
    mag = np.exp(log_mag) * eval_genlaguerre(lo, k, x)
    out = (1j) ** k * mag
    out.setflags(write=False)
    return out


def _ladder(dim: int) -> np.ndarray:
    """Annihilation operator."""
    return np.diag(np.sqrt(np.arange(1, dim, dtype=float)), 1)


def phase_operator(params: CircuitParams, dim: int) -> np.ndarray:
    a = _ladder(dim)
    return params.phi_zpf * (a + a.T)


def charge_operator(params: CircuitParams, dim: int) -> np.ndarray:
    """Cooper-pair number ``n = i n_zpf (a^dag - a)``, ``n_zpf = 1 / (2 phi_zpf)``."""
    a = _ladder(dim)
    return 1j / (2 * params.phi_zpf) * (a.T - a)


def sin_operator(params: CircuitParams, flux: FluxBias, dim: int) -> np.ndarray:
    """Matrix of ``sin(phi - phi_ext)``."""
    d = _displacement(dim, params.phi_zpf)
    return np.imag(np.exp(-1j * flux.phi_ext) * d)


def make_hamiltonian(
    params: CircuitParams, flux: FluxBias | float, basis: BasisConfig = DEFAULT_BASIS
) -> np.ndarray:
    """Real symmetric Hamiltonian matrix (GHz) in the oscillator basis."""
    flux = as_flux(flux)
    dim = basis.dim
    d = _displacement(dim, params.phi_zpf)
    cos_term = np.real(np.exp(-1j * flux.phi_ext) * d)
    ham = -params.E_J * cos_term
    ham[np.diag_indices(dim)] += params.plasma_frequency * (np.arange(dim) + 0.5)
    return 0.5 * (ham + ham.T)


def _solve(params, flux, dim, n_levels, vectors=True):
    ham = make_hamiltonian(params, flux, BasisConfig(dim=dim))
    if not np.all(np.isfinite(ham)):
        raise NumericalError("Hamiltonian contains non-finite entries")
    if not vectors:
        return eigh(ham, eigvals_only=True, subset_by_index=(0, n_levels - 1)), None
    energies, vecs = eigh(ham, subset_by_index=(0, n_levels - 1))
    # ties: dominant oscillator component with lower index first
    order = np.lexsort((np.argmax(np.abs(vecs), axis=0), energies))
    vecs = vecs[:, order]
    # fix the arbitrary sign: largest component positive
    signs = np.sign(vecs[np.argmax(np.abs(vecs), axis=0), np.arange(vecs.shape[1])])
    return energies[order], vecs * signs


def spectrum(
    params: CircuitParams,
    flux: FluxBias | float,
    n_levels: int = 6,
    basis: BasisConfig = DEFAULT_BASIS,
) -> Spectrum:
    """Lowest ``n_levels`` eigenpairs, checked against a basis twice as large."""
    flux = as_flux(flux)
    if n_levels < 2:
        raise InputError(f"n_levels must be >= 2, got {n_levels}")
    if n_levels > basis.dim / 3:
        raise InputError(f"n_levels={n_levels} needs a basis of at least {3 * n_levels}, got {basis.dim}")
    energies, vecs = _solve(params, flux, basis.dim, n_levels)
    check, _ = _solve(params, flux, 2 * basis.dim, n_levels, vectors=False)
    shift = float(np.max(np.abs(check - energies)))
    if not shift < basis.tol:
        raise ConvergenceError(
            f"eigenvalues moved by {shift:.3g} GHz when doubling the basis from {basis.dim}"
        )
    return Spectrum(energies, vecs, params, flux, basis)


def transitions(spec: Spectrum) -> TransitionTable:
    if spec.n_levels < 2:
        raise InputError("need at least two levels")
    e = spec.energies
    freq = e[None, :] - e[:, None]
    phi = np.abs(spec.operator(phase_operator(spec.params, spec.basis.dim)))
    n = np.abs(spec.operator(charge_operator(spec.params, spec.basis.dim)))
    return TransitionTable(freq, phi, n)


def flux_sweep(
    params: CircuitParams,
    flux_grid: Sequence[FluxBias | float],
    n_levels: int = 6,
    basis: BasisConfig = DEFAULT_BASIS,
) -> list[tuple[FluxBias, TransitionTable]]:
    if len(flux_grid) == 0:
        raise InputError("flux grid is empty")
    out = []
    for item in flux_grid:
        flux = as_flux(item)
        try:
            out.append((flux, transitions(spectrum(params, flux, n_levels, basis))))
        except NumericalError as exc:
            raise type(exc)(f"at flux {flux.f:g} Phi0: {exc}") from exc
    return out


def _level_slopes(params, flux, levels, basis):
    """Hellmann-Feynman dE_k/df in GHz per flux quantum."""
    n_levels = max(max(levels) + 2, 2)
    n_levels = min(n_levels, basis.dim // 3)
    spec = spectrum(params, flux, n_levels, basis)
    gaps = np.diff(spec.energies)
    for k in levels:
        near = [gaps[k - 1]] if k > 0 else []
        if k < len(gaps):
            near.append(gaps[k])
        if near and min(near) < 1e-6:
            raise DegenerateLevelError(
                f"level {k} is degenerate within 1e-6 GHz at flux {spec.flux.f:g}"
            )
    # dH/dphi_ext = -E_J sin(phi - phi_ext)
    dh = -params.E_J * sin_operator(params, spec.flux, basis.dim)
    v = spec.eigenvectors
    diag = np.einsum("ik,ij,jk->k", v, dh, v)
    return {k: 2 * math.pi * float(diag[k]) for k in levels}


def flux_derivative(
    params: CircuitParams,
    flux: FluxBias | float,
    order: int = 1,
    basis: BasisConfig = DEFAULT_BASIS,
    levels: tuple[int, int] = (0, 1),
    step: float = 1e-4,
) -> float:
    """Flux derivative of the ``levels`` transition frequency.

    Order 1 returns GHz/Phi0 by Hellmann-Feynman; order 2 returns GHz/Phi0^2
    as a central difference of order-1 values, cross-checked at half step.
    """
    flux = as_flux(flux)
    i, j = levels
    if order == 1:
        slopes = _level_slopes(params, flux, (i, j), basis)
        return slopes[j] - slopes[i]
    if order != 2:
        raise InputError(f"order must be 1 or 2, got {order}")

    def central(h):
        up = flux_derivative(params, flux.f + h, 1, basis, levels)
        down = flux_derivative(params, flux.f - h, 1, basis, levels)
        return (up - down) / (2 * h)

    coarse = central(step)
    fine = central(step / 2)
    if abs(coarse - fine) > 1e-3 * max(abs(fine), 1e-6):
        raise ConvergenceError(
            f"second derivative not converged in step: {coarse:.6g} vs {fine:.6g}"
        )
    return coarse
