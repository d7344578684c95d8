"""Decoherence channels, coherence budgets and loss-parameter inversion.

Relaxation rates follow the golden rule ``Gamma = |<0|Phi|1>|^2 S_II / hbar^2``
with ``S_II = hbar omega Re[Y] (coth(hbar omega / 2 k_B T) + 1)``, which gives
the closed forms implemented below.  Frequencies enter in GHz, temperatures in
mK, rates leave in 1/s and lifetimes in microseconds.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, fields
from typing import NamedTuple

import numpy as np
from scipy.optimize import brentq

from .constants import CONST, GHZ
from .errors import InputError, NumericalError
from .spectrum import (
    DEFAULT_BASIS,
    BasisConfig,
    CircuitParams,
    FluxBias,
    Spectrum,
    TransitionTable,
    as_flux,
    flux_derivative,
    spectrum,
    transitions,
)

__all__ = [
    "EnvironmentParams",
    "CoherenceBudget",
    "FluxDephasing",
    "REFERENCE_FREQUENCY_GHZ",
    "RELAXATION_CHANNELS",
    "DEPHASING_CHANNELS",
    "thermal_factor",
    "relaxation_rates",
    "flux_dephasing",
    "thermal_photon_dephasing",
    "thermal_photons_for_rate",
    "budget",
    "invert_loss",
    "derived_tan_delta_L",
    "chain_aux",
    "normalized_t1",
]

REFERENCE_FREQUENCY_GHZ = 6.0
RELAXATION_CHANNELS = ("dielectric", "inductive", "quasiparticle", "flux_noise", "junction_oxide")
DEPHASING_CHANNELS = ("flux_first_order", "flux_second_order", "thermal_photon")


@dataclass(frozen=True)
class EnvironmentParams:
    """Noise-channel parameters.

    A loss parameter left at ``None`` disables its channel.  ``T_mK``,
    ``eps``, ``Delta_GHz`` and ``C_J_fF`` are auxiliary and carry defaults
    (20 mK, 0.15, 44 GHz, 36 fF).  ``tan_delta_C`` is quoted at 6 GHz and scaled
    to the qubit frequency as ``(f / 6 GHz) ** eps``.
    """

    T_mK: float = 20.0
    A: float | None = None
    tan_delta_C: float | None = None
    eps: float = 0.15
    tan_delta_L: float | None = None
    tan_delta_AlOx: float | None = None
    x_qp: float | None = None
    Delta_GHz: float = 44.0
    C_J_fF: float = 36.0
    C_g_fF: float | None = None

    def __post_init__(self):
        for f in fields(self):
            value = getattr(self, f.name)
            if value is None:
                continue
            if not math.isfinite(value) or value < 0:
                raise InputError(f"{f.name} must be finite and non-negative, got {value!r}")
        if not 0.0 <= self.eps <= 1.0:
            raise InputError(f"eps must lie in [0, 1], got {self.eps}")

    def tan_delta_C_at(self, f_ghz: float) -> float | None:
        if self.tan_delta_C is None:
            return None
        return self.tan_delta_C * (f_ghz / REFERENCE_FREQUENCY_GHZ) ** self.eps


def thermal_factor(f01: float, T_mK: float) -> float:
    """Stimulated-emission enhancement ``(coth(h f / 2 k_B T) + 1) / 2``."""
    if f01 <= 0:
        raise InputError(f"frequency must be positive, got {f01}")
    if T_mK < 0:
        raise InputError(f"temperature must be non-negative, got {T_mK}")
    if T_mK == 0:
        return 1.0
    # divide by T last so a tiny T overflows to inf instead of dividing by 0
    with np.errstate(over="ignore"):
        x = np.float64(CONST.h * f01 * GHZ / (2 * CONST.k_B * 1e-3)) / T_mK
    # (coth x + 1) / 2 = 1 / (1 - exp(-2x)), stable for large x
    return float(-1.0 / np.expm1(-2 * x))


# --- single-channel rates (1/s); each is linear in its loss parameter -------


def dielectric_rate(f01, phi01, E_C, tan_delta, T_mK):
    """``tan_delta * hbar omega^2 / (8 E_C) * |phi01|^2 * (coth + 1)``."""
    omega = 2 * math.pi * f01 * GHZ
    prefactor = CONST.hbar * omega**2 / (8 * CONST.h * E_C * GHZ)
    return tan_delta * prefactor * phi01**2 * 2 * thermal_factor(f01, T_mK)


def inductive_rate(f01, phi01, E_L, tan_delta_L, T_mK):
    """``tan_delta_L * E_L / hbar * |phi01|^2 * (coth + 1)``."""
    return tan_delta_L * (E_L * GHZ * 2 * math.pi) * phi01**2 * 2 * thermal_factor(f01, T_mK)


def quasiparticle_rate(f01, phi01, E_L, x_qp, Delta_GHz):
    """``|<0|phi/2|1>|^2 * 8 E_L / (pi hbar) * x_qp * sqrt(2 Delta / hbar omega)``."""
    e_l = CONST.h * E_L * GHZ
    return (phi01 / 2) ** 2 * 8 * e_l / (math.pi * CONST.hbar) * x_qp * math.sqrt(2 * Delta_GHz / f01)


def flux_noise_relaxation_rate(f01, phi01, params: CircuitParams, A):
    """Golden rule with the persistent current ``Phi / L`` and ``S_Phi = 2 pi A^2 / omega``."""
    omega = 2 * math.pi * f01 * GHZ
    flux_me = CONST.hbar / (2 * CONST.e) * phi01
    s_phi = 2 * math.pi * (A * CONST.Phi0) ** 2 / omega
    return flux_me**2 * s_phi / (CONST.hbar**2 * params.inductance**2)


def junction_oxide_rate(f01, phi01, params: CircuitParams, tan_delta_AlOx, C_J_fF, T_mK):
    """Chain junctions seen as a lossy ``C_J / N`` in parallel with the antenna."""
    participation = C_J_fF * 1e-15 / (params.N * params.capacitance)
    return participation * dielectric_rate(f01, phi01, params.E_C, tan_delta_AlOx, T_mK)


def relaxation_rates(
    spec: Spectrum,
    trans: TransitionTable,
    env: EnvironmentParams,
    params: CircuitParams | None = None,
) -> dict[str, float | None]:
    """Per-channel 0-1 relaxation rates in 1/s; ``None`` marks an absent channel."""
    params = params or spec.params
    f01 = float(trans.freq[0, 1])
    phi01 = float(trans.phi[0, 1])
    T = env.T_mK
    rates: dict[str, float | None] = dict.fromkeys(RELAXATION_CHANNELS)
    if env.tan_delta_C is not None:
        rates["dielectric"] = dielectric_rate(f01, phi01, params.E_C, env.tan_delta_C_at(f01), T)
    if env.tan_delta_L is not None:
        rates["inductive"] = inductive_rate(f01, phi01, params.E_L, env.tan_delta_L, T)
    if env.x_qp is not None:
        rates["quasiparticle"] = quasiparticle_rate(f01, phi01, params.E_L, env.x_qp, env.Delta_GHz)
    if env.A is not None:
        rates["flux_noise"] = flux_noise_relaxation_rate(f01, phi01, params, env.A)
    if env.tan_delta_AlOx is not None:
        rates["junction_oxide"] = junction_oxide_rate(
            f01, phi01, params, env.tan_delta_AlOx, env.C_J_fF, T
        )
    return rates


class FluxDephasing(NamedTuple):
    first_order: float
    second_order: float
    first_order_shape: str = "gaussian"
    second_order_shape: str = "exponential"


def flux_dephasing(slope: float, curvature: float, A: float) -> FluxDephasing:
    """Flux-noise dephasing rates (1/s).

    ``slope`` is d f01/d Phi in GHz/Phi0 and ``curvature`` the second
    derivative in GHz/Phi0^2; ``A`` is the 1/f amplitude in Phi0/sqrt(Hz).
    The first-order rate is the inverse of the Gaussian decay time.
    """
    if A < 0:
        raise InputError(f"flux-noise amplitude must be non-negative, got {A}")
    first = 2 * math.pi * abs(slope) * GHZ * A * math.sqrt(math.log(2))
    second = 2 * math.pi * abs(curvature) * GHZ * A**2
    return FluxDephasing(first, second)


def thermal_photon_dephasing(chi: float, kappa: float, n_th: float) -> float:
    """Dephasing (1/s) from thermal photons in a dispersively coupled cavity.

    ``chi`` and ``kappa`` are ordinary frequencies in Hz (chi/2pi, kappa/2pi).
    """
    if not kappa > 0:
        raise InputError(f"kappa must be positive, got {kappa}")
    if n_th < 0:
        raise InputError(f"thermal photon number must be non-negative, got {n_th}")
    if n_th == 0:
        return 0.0
    k = 2 * math.pi * kappa
    c = 2 * math.pi * chi
    root = np.sqrt((1 + 2j * c / k) ** 2 + 8j * c * n_th / k)
    return max(float(k / 2 * np.real(root - 1)), 0.0)


def thermal_photons_for_rate(chi: float, kappa: float, rate: float) -> float:
    """Thermal photon number at which the cavity alone dephases at ``rate`` (1/s)."""
    if rate <= 0:
        return 0.0
    upper = 1.0
    while thermal_photon_dephasing(chi, kappa, upper) < rate:
        upper *= 2
        if upper > 1e12:
            raise NumericalError("thermal photon dephasing never reaches the requested rate")
    return brentq(lambda n: thermal_photon_dephasing(chi, kappa, n) - rate, 0.0, upper, xtol=1e-14)


@dataclass
class CoherenceBudget:
    gamma1: dict[str, float | None]
    gamma_phi: dict[str, float | None]
    T1_us: float
    T2_us: float
    f01_GHz: float
    phi01: float
    flux: float
    env: EnvironmentParams
    dephasing_shape: dict[str, str] = field(default_factory=dict)

    @property
    def evaluated(self) -> dict[str, bool]:
        both = {**self.gamma1, **self.gamma_phi}
        return {k: v is not None for k, v in both.items()}

    def to_dict(self) -> dict:
        from .io import constants_provenance  # local import keeps io optional here

        return {
            "flux_phi0": self.flux,
            "f01_GHz": self.f01_GHz,
            "phi01": self.phi01,
            "gamma1_per_s": self.gamma1,
            "gamma_phi_per_s": self.gamma_phi,
            "dephasing_shape": self.dephasing_shape,
            "channels_evaluated": self.evaluated,
            "T1_us": self.T1_us,
            "T2_us": self.T2_us,
            "environment": {f.name: getattr(self.env, f.name) for f in fields(self.env)},
            "constants": constants_provenance(),
        }


def _lifetime_us(total_rate: float) -> float:
    return math.inf if total_rate == 0 else 1e6 / total_rate


def budget(
    params: CircuitParams,
    flux: FluxBias | float,
    env: EnvironmentParams,
    cavity=None,
    n_th: float | None = None,
    n_levels: int = 6,
    basis: BasisConfig = DEFAULT_BASIS,
) -> CoherenceBudget:
    """Evaluate every available channel and combine into echo T1 and T2.

    Rates add; ``1/T2 = 1/(2 T1) + sum(Gamma_phi)``.  The thermal-photon
    channel needs both ``cavity`` (a :class:`~fluxsim.coupling.CavityParams`)
    and ``n_th``.
    """
    flux = as_flux(flux)
    spec = spectrum(params, flux, n_levels, basis)
    trans = transitions(spec)
    gamma1 = relaxation_rates(spec, trans, env, params)
    gamma_phi: dict[str, float | None] = dict.fromkeys(DEPHASING_CHANNELS)
    if env.A is not None:
        slope = flux_derivative(params, flux, 1, basis)
        curvature = flux_derivative(params, flux, 2, basis)
        deph = flux_dephasing(slope, curvature, env.A)
        gamma_phi["flux_first_order"] = deph.first_order
        gamma_phi["flux_second_order"] = deph.second_order
    if cavity is not None and n_th is not None:
        from .coupling import dispersive_shift

        wide = transitions(spectrum(params, flux, max(n_levels, 10), BasisConfig(max(basis.dim, 60), basis.tol)))
        _, _, chi01 = dispersive_shift(wide, cavity)
        gamma_phi["thermal_photon"] = thermal_photon_dephasing(
            abs(chi01) * 1e6, cavity.kappa * 1e6, n_th
        )
    total1 = sum(v for v in gamma1.values() if v is not None)
    total_phi = sum(v for v in gamma_phi.values() if v is not None)
    T1 = _lifetime_us(total1)
    T2 = _lifetime_us(total1 / 2 + total_phi)
    shapes = {"flux_first_order": "gaussian", "flux_second_order": "exponential",
              "thermal_photon": "exponential"}
    return CoherenceBudget(
        gamma1=gamma1,
        gamma_phi=gamma_phi,
        T1_us=T1,
        T2_us=T2,
        f01_GHz=float(trans.freq[0, 1]),
        phi01=float(trans.phi[0, 1]),
        flux=flux.f,
        env=env,
        dephasing_shape=shapes,
    )


_INVERTIBLE = ("dielectric", "quasiparticle", "junction_oxide", "inductive")


def invert_loss(
    channel: str,
    T1_measured: float,
    spec: Spectrum,
    trans: TransitionTable,
    env: EnvironmentParams | None = None,
    params: CircuitParams | None = None,
) -> float:
    """Loss parameter that alone would produce ``T1_measured`` (microseconds).

    ``dielectric`` returns tan(delta_C) referred to 6 GHz with ``env.eps``;
    ``quasiparticle`` returns x_qp; ``junction_oxide`` returns tan(delta_AlOx);
    ``inductive`` returns tan(delta_L).
    """
    if channel not in _INVERTIBLE:
        raise InputError(f"unknown channel {channel!r}; expected one of {', '.join(_INVERTIBLE)}")
    if not T1_measured > 0 or not math.isfinite(T1_measured):
        raise InputError(f"T1 must be positive and finite, got {T1_measured}")
    env = env or EnvironmentParams()
    params = params or spec.params
    f01 = float(trans.freq[0, 1])
    phi01 = float(trans.phi[0, 1])
    T = env.T_mK
    if channel == "dielectric":
        unit = dielectric_rate(f01, phi01, params.E_C, 1.0, T) * (f01 / REFERENCE_FREQUENCY_GHZ) ** env.eps
    elif channel == "quasiparticle":
        unit = quasiparticle_rate(f01, phi01, params.E_L, 1.0, env.Delta_GHz)
    elif channel == "junction_oxide":
        unit = junction_oxide_rate(f01, phi01, params, 1.0, env.C_J_fF, T)
    else:
        unit = inductive_rate(f01, phi01, params.E_L, 1.0, T)
    if not unit > 0 or not math.isfinite(unit):
        raise NumericalError(f"{channel} rate is not strictly increasing in its loss parameter")
    return (1e6 / T1_measured) / unit


def derived_tan_delta_L(params: CircuitParams, f01: float, tan_delta_C: float) -> float:
    """Inductive loss tangent giving the same T1 as ``tan_delta_C``.

    Evaluated both as ``(h f)^2 / (8 E_C E_L)`` and as ``omega^2 L C``; the two
    must agree.
    """
    if f01 <= 0 or tan_delta_C < 0:
        raise InputError("f01 must be positive and tan_delta_C non-negative")
    energy_form = f01**2 / (8 * params.E_C * params.E_L)
    omega = 2 * math.pi * f01 * GHZ
    circuit_form = omega**2 * params.inductance * params.capacitance
    if not math.isclose(energy_form, circuit_form, rel_tol=1e-12):
        raise NumericalError(f"loss-tangent ratio forms disagree: {energy_form!r} vs {circuit_form!r}")
    return tan_delta_C * energy_form


def chain_aux(N: int, C_g_fF: float, T2_target_us: float) -> tuple[float, float]:
    """Chain ground capacitance ``C_g N / 6`` (fF) and photon-free time ``N T2`` (ms)."""
    if int(N) != N or N < 1:
        raise InputError(f"N must be an integer >= 1, got {N!r}")
    return C_g_fF * N / 6, N * T2_target_us * 1e-3


def normalized_t1(T1_us: float, phi01: float) -> float:
    """``T1 * |<0|phi|1>|^2`` in microseconds."""
    if not T1_us > 0:
        raise InputError(f"T1 must be positive, got {T1_us}")
    return T1_us * phi01**2
