"""Qubit-cavity dispersive shifts and fluxonium-fluxonium coupling."""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .errors import InputError, NearResonanceError
from .spectrum import (
    DEFAULT_BASIS,
    CircuitParams,
    FluxBias,
    Spectrum,
    TransitionTable,
    as_flux,
    charge_operator,
    phase_operator,
    sin_operator,
    spectrum,
)

__all__ = [
    "CavityParams",
    "TwoQubitCoupling",
    "SpinModel",
    "CoupledSpectrum",
    "dispersive_shift",
    "dispersive_shift_exact",
    "coupling_strength",
    "coupled_spectrum",
    "zz_perturbative",
    "spin_projection",
]

KINDS = ("capacitive", "inductive")


@dataclass(frozen=True)
class CavityParams:
    """Readout mode: ``f_r`` in GHz, ``kappa`` and ``g`` as ordinary frequencies in MHz."""

    f_r: float = 7.5
    kappa: float = 15.0
    g: float = 70.0
    coupling_kind: str = "capacitive"

    def __post_init__(self):
        if self.coupling_kind not in KINDS:
            raise InputError(f"coupling_kind must be one of {KINDS}, got {self.coupling_kind!r}")
        if not (self.f_r > 0 and self.kappa > 0 and self.g >= 0):
            raise InputError("f_r and kappa must be positive and g non-negative")


@dataclass(frozen=True)
class TwoQubitCoupling:
    kind: str
    C_M_over_C: float | None = None
    m: float | None = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise InputError(f"coupling kind must be one of {KINDS}, got {self.kind!r}")
        if self.C_M_over_C is not None and self.m is not None:
            raise InputError("give either C_M_over_C (capacitive) or m (inductive), not both")
        if self.kind == "capacitive":
            if self.C_M_over_C is None or self.C_M_over_C < 0:
                raise InputError("capacitive coupling needs C_M_over_C >= 0")
        else:
            if self.m is None or self.m < 0:
                raise InputError("inductive coupling needs m >= 0")
            if self.m > 0.3:
                warnings.warn(f"shared-junction fraction m={self.m} is not small", stacklevel=3)


@dataclass(frozen=True)
class SpinModel:
    """Computational-subspace projection ``H = sum h_Z Z + h_X X + J_XX X X``.

    Fields are in GHz with Pauli eigenvalues +-1, so ``h_Z`` is half the qubit
    splitting.
    """

    h_Z: tuple[float, float]
    h_X: tuple[float, float]
    J_XX: float
    convention: str = "sigma_pm1"

    def to_dict(self) -> dict:
        return {
            "h_Z_GHz": list(self.h_Z),
            "h_X_GHz": list(self.h_X),
            "J_XX_GHz": self.J_XX,
            "convention": self.convention,
        }


def _coupling_matrix(trans: TransitionTable, kind: str) -> np.ndarray:
    return trans.n if kind == "capacitive" else trans.phi


def dispersive_shift(
    trans: TransitionTable, cavity: CavityParams, n_levels: int | None = None
) -> tuple[float, float, float]:
    """Second-order cavity pulls ``chi_0``, ``chi_1`` and ``chi_01 = chi_1 - chi_0`` in MHz.

    ``chi_i = sum_j g^2 |O_ij|^2 2 f_ij / (f_ij^2 - f_r^2)`` with ``O = n`` for
    capacitive and ``O = phi`` for inductive coupling.  Here ``f_ij = E_i - E_j``
    so that ``chi_i`` is the shift of the cavity frequency with the qubit in
    ``i`` (positive when every transition out of ``i`` lies below the
    cavity).  A transition whose detuning from the cavity is below ten times its dressed coupling
    ``g |O_ij|`` makes the expansion invalid and raises.
    """
    n_levels = trans.n_levels if n_levels is None else n_levels
    if n_levels < 2 or n_levels > trans.n_levels:
        raise InputError(f"n_levels must be between 2 and {trans.n_levels}, got {n_levels}")
    g = cavity.g * 1e-3  # GHz
    elem = _coupling_matrix(trans, cavity.coupling_kind)
    chis = []
    for i in (0, 1):
        total = 0.0
        for j in range(n_levels):
            if j == i:
                continue
            f_ij = float(trans.freq[j, i])
            g_ij = g * float(elem[i, j])
            if abs(abs(f_ij) - cavity.f_r) < 10 * g_ij:
                lo, hi = sorted((i, j))
                raise NearResonanceError(
                    f"transition {lo}-{hi} at {abs(f_ij):.4f} GHz is within 10 g of the cavity"
                )
            total += g_ij**2 * 2 * f_ij / (f_ij**2 - cavity.f_r**2)
        chis.append(total * 1e3)
    return chis[0], chis[1], chis[1] - chis[0]


def dispersive_shift_exact(
    spec: Spectrum, cavity: CavityParams, n_photons: int = 3
) -> tuple[float, float, float]:
    """Cavity pulls (MHz) from diagonalizing qubit levels times a truncated cavity."""
    nq = spec.n_levels
    if spec.params is None:
        raise InputError("spectrum carries no circuit parameters")
    if cavity.coupling_kind == "capacitive":
        q_op = spec.operator(charge_operator(spec.params, spec.basis.dim))
        a = np.diag(np.sqrt(np.arange(1, n_photons + 1, dtype=float)), 1)
        c_op = 1j * (a - a.T)
    else:
        q_op = spec.operator(phase_operator(spec.params, spec.basis.dim))
        a = np.diag(np.sqrt(np.arange(1, n_photons + 1, dtype=float)), 1)
        c_op = a + a.T
    g = cavity.g * 1e-3
    bare = np.add.outer(spec.energies - spec.energies[0], cavity.f_r * np.arange(n_photons + 1))
    ham = np.diag(bare.ravel()) + g * np.kron(q_op, c_op)
    ham = np.real_if_close(ham, tol=1e6)
    energies, vecs = np.linalg.eigh(ham)

    def dressed(q, k):
        idx = q * (n_photons + 1) + k
        return energies[np.argmax(np.abs(vecs[idx]) ** 2)]

    chi = [(dressed(q, 1) - dressed(q, 0) - cavity.f_r) * 1e3 for q in (0, 1)]
    return chi[0], chi[1], chi[1] - chi[0]


def coupling_strength(
    params_a: CircuitParams, params_b: CircuitParams, coupling: TwoQubitCoupling
) -> float:
    """Interaction constant J in GHz.

    Capacitive: ``2 E_C C_M / C``; inductive: ``m pi^2 E_L``.  For unequal
    qubits the geometric mean of the two energies is used.
    """
    if coupling.kind == "capacitive":
        e_c = math.sqrt(params_a.E_C * params_b.E_C)
        return 2 * e_c * coupling.C_M_over_C
    e_l = math.sqrt(params_a.E_L * params_b.E_L)
    return coupling.m * math.pi**2 * e_l


def _qubit_operator(spec: Spectrum, kind: str, n_keep: int) -> np.ndarray:
    if kind == "capacitive":
        op = spec.operator(charge_operator(spec.params, spec.basis.dim))
    else:
        op = spec.operator(phase_operator(spec.params, spec.basis.dim)) / math.pi
    return op[:n_keep, :n_keep]


@dataclass(frozen=True)
class CoupledSpectrum:
    energies: np.ndarray
    labels: list[tuple[int, int]]
    ambiguous: list[bool]
    J: float

    def energy(self, label: tuple[int, int]) -> float:
        return float(self.energies[self.labels.index(tuple(label))])

    @property
    def zz(self) -> float:
        """``E_11 - E_10 - E_01 + E_00`` in GHz."""
        e = self.energy
        return e((1, 1)) - e((1, 0)) - e((0, 1)) + e((0, 0))


def _joint_hamiltonian(spec_a, spec_b, coupling, n_keep, J):
    op_a = _qubit_operator(spec_a, coupling.kind, n_keep)
    op_b = _qubit_operator(spec_b, coupling.kind, n_keep)
    bare = np.add.outer(spec_a.energies[:n_keep], spec_b.energies[:n_keep]).ravel()
    interaction = J * np.kron(op_a, op_b)
    return bare, np.real(interaction)


def coupled_spectrum(
    spec_a: Spectrum, spec_b: Spectrum, coupling: TwoQubitCoupling, n_keep: int = 10
) -> CoupledSpectrum:
    """Joint levels of two coupled fluxoniums, labelled by the closest bare product state."""
    if n_keep < 3:
        raise InputError(f"n_keep must be >= 3, got {n_keep}")
    if spec_a.n_levels < n_keep or spec_b.n_levels < n_keep:
        raise InputError(f"both spectra need at least n_keep={n_keep} levels")
    J = coupling_strength(spec_a.params, spec_b.params, coupling)
    bare, interaction = _joint_hamiltonian(spec_a, spec_b, coupling, n_keep, J)
    energies, vecs = np.linalg.eigh(np.diag(bare) + interaction)
    weights = np.abs(vecs) ** 2
    labels, ambiguous = [], []
    for col in range(weights.shape[1]):
        order = np.argsort(weights[:, col])[::-1]
        labels.append(divmod(int(order[0]), n_keep))
        ambiguous.append(bool(weights[order[0], col] - weights[order[1], col] < 1e-3))
    if any(ambiguous):
        warnings.warn("some joint levels have ambiguous bare-state labels", stacklevel=2)
    return CoupledSpectrum(energies, labels, ambiguous, J)


def zz_perturbative(
    spec_a: Spectrum, spec_b: Spectrum, coupling: TwoQubitCoupling, n_keep: int = 10
) -> float:
    """Second-order ZZ shift in GHz."""
    J = coupling_strength(spec_a.params, spec_b.params, coupling)
    bare, interaction = _joint_hamiltonian(spec_a, spec_b, coupling, n_keep, J)

    def shift(a, b):
        k = a * n_keep + b
        diff = bare[k] - bare
        # exactly degenerate partners (|10>, |01> of identical qubits) enter the
        # ZZ combination as +g^2/D and -g^2/D, which cancel as D -> 0
        mask = np.abs(diff) > 1e-12 * max(1.0, abs(bare[k]))
        return interaction[k, k] + np.sum(interaction[k, mask] ** 2 / diff[mask])

    return shift(1, 1) - shift(1, 0) - shift(0, 1) + shift(0, 0)


def _sweet_spot_terms(params: CircuitParams, basis):
    spec = spectrum(params, 0.5, 3, basis)
    dh_df = -2 * math.pi * params.E_J * sin_operator(params, FluxBias(0.5), basis.dim)
    transverse = float(spec.operator(dh_df)[0, 1])
    return spec, abs(transverse)


def spin_projection(
    spec_a: Spectrum,
    spec_b: Spectrum,
    trans_a: TransitionTable,
    trans_b: TransitionTable,
    coupling: TwoQubitCoupling,
    flux_a: FluxBias | float,
    flux_b: FluxBias | float,
    basis=DEFAULT_BASIS,
) -> SpinModel:
    """Project two coupled fluxoniums near the sweet spot onto spin-1/2 fields.

    ``h_Z`` is half the sweet-spot splitting, ``h_X`` is the transverse matrix
    element of ``dH/df`` at the sweet spot times the detuning, and ``J_XX`` is
    ``J`` times the 0-1 matrix elements of the coupling operators.
    """
    h_z, h_x = [], []
    for spec, trans, flux in ((spec_a, trans_a, flux_a), (spec_b, trans_b, flux_b)):
        flux = as_flux(flux)
        if abs(flux.f - 0.5) >= 0.1:
            raise InputError(f"flux {flux.f} is too far from the sweet spot for a spin projection")
        sweet, transverse = _sweet_spot_terms(spec.params, basis)
        h_z.append(sweet.f01 / 2)
        h_x.append(transverse * (flux.f - 0.5))
        if trans.anharmonicity_ratio < 2:
            warnings.warn(
                f"omega12/omega01 = {trans.anharmonicity_ratio:.2f} < 2: projection is unreliable",
                stacklevel=2,
            )
    J = coupling_strength(spec_a.params, spec_b.params, coupling)
    if coupling.kind == "capacitive":
        elem_a, elem_b = trans_a.n[0, 1], trans_b.n[0, 1]
    else:
        elem_a, elem_b = trans_a.phi[0, 1] / math.pi, trans_b.phi[0, 1] / math.pi
    return SpinModel((h_z[0], h_z[1]), (h_x[0], h_x[1]), float(J * elem_a * elem_b))
