import math

import numpy as np
import pytest

from fluxsim import (
    CavityParams,
    EnvironmentParams,
    InputError,
    NumericalError,
    budget,
    derived_tan_delta_L,
    flux_dephasing,
    invert_loss,
    relaxation_rates,
    spectrum,
    thermal_factor,
    thermal_photon_dephasing,
    transitions,
)
from fluxsim.constants import CONST
from fluxsim.noise import (
    chain_aux,
    dielectric_rate,
    flux_noise_relaxation_rate,
    normalized_t1,
    thermal_photons_for_rate,
)


@pytest.fixture(scope="module")
def sweet_a():
    from fluxsim.io import load_registry

    params = load_registry()["A"].params
    spec = spectrum(params, 0.5)
    return params, spec, transitions(spec)


# --- thermal factor ---------------------------------------------------------


def test_thermal_factor_limits():
    assert thermal_factor(0.5, 0.0) == 1.0
    assert thermal_factor(10.0, 20.0) - 1 < 1e-10


def test_thermal_factor_half_ghz_25mk():
    # Bose occupation oracle: n + 1 with n = 1 / (exp(hf / kT) - 1)
    x = CONST.h * 0.5e9 / (CONST.k_B * 0.025)
    expected = 1 / math.expm1(x) + 1
    assert thermal_factor(0.5, 25.0) == pytest.approx(expected, rel=1e-12)
    assert thermal_factor(0.5, 25.0) == pytest.approx(1.62, abs=0.005)


def test_thermal_factor_high_temperature_asymptote():
    # hf / kT = 0.04: factor -> kT / hf + 1/2
    T_mK = CONST.h * 1e9 / (0.04 * CONST.k_B) * 1e3
    assert thermal_factor(1.0, T_mK) == pytest.approx(1 / 0.04 + 0.5, rel=1e-3)


def test_thermal_factor_rejects_bad_input():
    with pytest.raises(InputError):
        thermal_factor(0.0, 20)
    with pytest.raises(InputError):
        thermal_factor(1.0, -1)


# --- relaxation -------------------------------------------------------------------


def test_dielectric_only_t1(sweet_a):
    params = sweet_a[0]
    b = budget(params, 0.5, EnvironmentParams(tan_delta_C=1.7e-6, eps=0.0))
    assert b.T1_us == pytest.approx(110, rel=0.4)


def test_quasiparticle_only_t1(sweet_a):
    params = sweet_a[0]
    b = budget(params, 0.5, EnvironmentParams(x_qp=3.84e-8, Delta_GHz=44.0))
    assert 55 < b.T1_us < 220


def test_zero_loss_zero_temperature(sweet_a):
    params, spec, trans = sweet_a
    env = EnvironmentParams(T_mK=0.0, tan_delta_C=0.0, tan_delta_L=0.0, tan_delta_AlOx=0.0, x_qp=0.0, A=0.0)
    rates = relaxation_rates(spec, trans, env)
    assert all(v == 0.0 for v in rates.values())
    assert budget(params, 0.5, env).T1_us == math.inf


def test_flux_noise_relaxation_negligible(sweet_a):
    params, _, trans = sweet_a
    rate = flux_noise_relaxation_rate(trans.freq[0, 1], trans.phi[0, 1], params, 2e-6)
    # tens of ms: far beyond the measured 110 us
    assert 1 / rate > 10e-3


def test_rates_linear_and_invertible(sweet_a):
    params, spec, trans = sweet_a
    base = EnvironmentParams(T_mK=20.0, eps=0.15)
    for channel, key in (("dielectric", "tan_delta_C"), ("inductive", "tan_delta_L"),
                         ("quasiparticle", "x_qp"), ("junction_oxide", "tan_delta_AlOx")):
        rates = []
        for value in (1e-7, 2e-7, 5e-7):
            env = EnvironmentParams(**{**base.__dict__, key: value})
            rate = relaxation_rates(spec, trans, env)[channel]
            rates.append(rate)
            T1 = 1e6 / rate
            assert invert_loss(channel, T1, spec, trans, env, params) == pytest.approx(value, rel=1e-10)
        assert rates[0] < rates[1] < rates[2]
        assert rates[1] == pytest.approx(2 * rates[0], rel=1e-12)


def test_invert_device_a(sweet_a):
    params, spec, trans = sweet_a
    env = EnvironmentParams(T_mK=20.0, eps=0.0)
    assert invert_loss("dielectric", 110, spec, trans, env) == pytest.approx(1.7e-6, rel=0.4)
    assert invert_loss("junction_oxide", 110, spec, trans, env) == pytest.approx(1.1e-4, rel=0.4)


def test_invert_dielectric_in_fig3_band(sweet_a):
    # referred to 6 GHz with the default eps = 0.15
    _, spec, trans = sweet_a
    value = invert_loss("dielectric", 110, spec, trans, EnvironmentParams())
    assert 2.0e-6 <= value <= 3.6e-6


def test_invert_rejects(sweet_a):
    _, spec, trans = sweet_a
    with pytest.raises(InputError):
        invert_loss("magic", 110, spec, trans)
    with pytest.raises(InputError):
        invert_loss("dielectric", 0, spec, trans)


def test_derived_tan_delta_l(sweet_a):
    params = sweet_a[0]
    assert derived_tan_delta_L(params, 0.78, 1.7e-6) == pytest.approx(15.4e-8, rel=2e-3)
    assert derived_tan_delta_L(params, 0.78, 0.0) == 0.0


def test_derived_tan_delta_l_device_h(registry):
    # the table lists 2.85e-8; the formula with the table's own inputs gives 1.6e-8
    params = registry["H"].params
    value = derived_tan_delta_L(params, 0.32, 1.1e-6)
    assert value == pytest.approx(1.1e-6 * 0.32**2 / (8 * 1.0 * 0.79), rel=1e-12)
    assert abs(value / 2.85e-8 - 1) > 0.3


# --- dephasing ---------------------------------------------------------------------


def test_gaussian_flux_dephasing():
    assert flux_dephasing(0.0, 100.0, 2e-6).first_order == 0.0
    rate = flux_dephasing(20.0, 0.0, 1.8e-6).first_order
    assert 1e6 / rate == pytest.approx(5.3, abs=0.05)
    assert 3 <= 1e6 / rate <= 6


def test_flux_dephasing_linear():
    a = flux_dephasing(7.0, 0.0, 1e-6).first_order
    assert flux_dephasing(14.0, 0.0, 1e-6).first_order == pytest.approx(2 * a, rel=1e-14)
    assert flux_dephasing(7.0, 0.0, 3e-6).first_order == pytest.approx(3 * a, rel=1e-14)


def test_second_order_device_a(device_a):
    from fluxsim import flux_derivative

    curvature = flux_derivative(device_a, 0.5, 2)
    tphi_ms = 1e3 / flux_dephasing(0.0, curvature, 2e-6).second_order
    assert 10 <= tphi_ms <= 100


def test_thermal_photon_limits():
    assert thermal_photon_dephasing(1e5, 15e6, 0.0) == 0.0
    chi, kappa = 15e3, 15e6
    for n in (0.01, 0.1, 0.5):
        exact = thermal_photon_dephasing(chi, kappa, n)
        # weak-dispersive limit of the exact root: 4 chi^2 n (n + 1) / kappa
        limit = 4 * (2 * math.pi * chi) ** 2 * n * (n + 1) / (2 * math.pi * kappa)
        assert exact == pytest.approx(limit, rel=1e-3)


def test_thermal_photon_strong_dispersive():
    # chi >> kappa: the rate saturates at kappa n_th
    kappa = 1e6
    rate = thermal_photon_dephasing(1e9, kappa, 0.01)
    assert rate == pytest.approx(2 * math.pi * kappa * 0.01, rel=0.02)


def test_thermal_photons_for_device_c():
    n = thermal_photons_for_rate(0.08e6, 15e6, 1 / 350e-6)
    assert thermal_photon_dephasing(0.08e6, 15e6, n) == pytest.approx(1 / 350e-6, rel=1e-10)
    assert 0.2 < n < 0.3


# --- budget ------------------------------------------------------------------------


def test_empty_budget(device_a):
    b = budget(device_a, 0.5, EnvironmentParams())
    assert b.T1_us == math.inf and b.T2_us == math.inf
    assert not any(b.evaluated.values())


def test_table_env_budget(device_a):
    b = budget(device_a, 0.5, EnvironmentParams(tan_delta_C=1.7e-6, A=2e-6, eps=0.0))
    assert b.T1_us == pytest.approx(110, rel=0.4)
    assert b.T2_us <= 2 * b.T1_us


def test_budget_rates_add(device_a):
    env = EnvironmentParams(tan_delta_C=1.7e-6, x_qp=3.84e-8, tan_delta_AlOx=1.1e-4, tan_delta_L=1.5e-7, A=2e-6)
    b = budget(device_a, 0.5, env)
    best = min(1e6 / r for r in b.gamma1.values() if r)
    assert b.T1_us <= best
    total = sum(b.gamma1.values())
    assert b.T1_us == pytest.approx(1e6 / total, rel=1e-12)
    assert 1 / b.T2_us == pytest.approx(1 / (2 * b.T1_us) + sum(v for v in b.gamma_phi.values() if v) * 1e-6)


def test_budget_max_slope_gaussian_dominated(device_a):
    b = budget(device_a, 0.425, EnvironmentParams(tan_delta_C=1.7e-6, A=1.8e-6, eps=0.0))
    assert 3 <= b.T2_us <= 6
    assert b.gamma_phi["flux_first_order"] > 10 * b.gamma1["dielectric"]


def test_budget_thermal_photon_channel(registry):
    entry = registry["C"]
    b = budget(entry.params, 0.5, EnvironmentParams(), cavity=entry.cavity, n_th=0.2)
    assert b.gamma_phi["thermal_photon"] > 0
    assert b.T1_us == math.inf
    assert b.T2_us == pytest.approx(1e6 / b.gamma_phi["thermal_photon"])


def test_budget_to_dict_serializes(device_a):
    from fluxsim.io import dumps_json

    text = dumps_json(budget(device_a, 0.5, EnvironmentParams()).to_dict())
    assert '"T1_us": "inf"' in text
    assert "CODATA" in text


def test_environment_validation():
    with pytest.raises(InputError):
        EnvironmentParams(tan_delta_C=-1e-6)
    with pytest.raises(InputError):
        EnvironmentParams(eps=2.0)


# --- auxiliaries ----------------------------------------------------------------------


def test_chain_aux():
    assert chain_aux(400, 0.06, 140)[1] == pytest.approx(56.0)
    assert chain_aux(1, 0.06, 10)[0] == pytest.approx(0.01)
    assert chain_aux(100, 0.06, 160)[1] == pytest.approx(16.0)
    with pytest.raises(InputError):
        chain_aux(0, 0.06, 100)


def test_normalized_t1():
    assert normalized_t1(110.0, 1.0) == 110.0
    assert normalized_t1(110.0, 2.0) == pytest.approx(4 * normalized_t1(110.0, 1.0))
    with pytest.raises(InputError):
        normalized_t1(0.0, 1.0)


def test_dielectric_rate_formula():
    # Q = 1/tan_delta; Gamma = hbar omega^2 / (8 E_C) phi^2 tan_delta (coth + 1)
    f, phi, e_c, tan = 0.78, 1.87, 0.84, 1.7e-6
    omega = 2 * math.pi * f * 1e9
    expected = CONST.hbar * omega**2 / (8 * CONST.h * e_c * 1e9) * phi**2 * tan * 2
    assert dielectric_rate(f, phi, e_c, tan, 0.0) == pytest.approx(expected, rel=1e-12)


def test_derived_form_mismatch_guard(monkeypatch, device_a):
    import fluxsim.noise as noise

    monkeypatch.setattr(noise, "GHZ", 1.0001e9)
    with pytest.raises(NumericalError):
        noise.derived_tan_delta_L(device_a, 0.78, 1.7e-6)


def test_cavity_and_flux_independent(device_a):
    a = budget(device_a, 0.5, EnvironmentParams(tan_delta_C=1e-6), cavity=CavityParams(), n_th=0.0)
    assert a.gamma_phi["thermal_photon"] == 0.0
    assert np.isfinite(a.T1_us)
