"""Reproduction of the derived device columns, side by side with the reference values."""

from __future__ import annotations

from dataclasses import asdict, dataclass

from .coupling import CavityParams, dispersive_shift
from .io import DeviceRegistry, write_csv
from .noise import EnvironmentParams, derived_tan_delta_L, flux_dephasing, invert_loss
from .spectrum import BasisConfig, flux_derivative, spectrum, transitions

__all__ = ["Table1Settings", "table1_rows", "table1_csv", "TABLE1_COLUMNS"]


@dataclass(frozen=True)
class Table1Settings:
    T_mK: float = 20.0
    eps: float = 0.0
    Delta_GHz: float = 44.0
    C_J_fF: float = 36.0
    A: float = 2e-6
    chi_levels: int = 12
    dim: int = 60


# (computed column, reference key)
_COMPARED = (
    ("f01_GHz", "f01_GHz"),
    ("ratio_12_01", "ratio_12_01"),
    ("chi01_MHz", "chi01_MHz"),
    ("tan_delta_C", "tan_delta_C"),
    ("tan_delta_AlOx", "tan_delta_AlOx"),
    ("x_qp", "x_qp"),
    ("tan_delta_L_formula", "tan_delta_L"),
    ("tan_delta_L_inverted", "tan_delta_L"),
)

TABLE1_COLUMNS = ["device"]
for _col, _ in _COMPARED:
    TABLE1_COLUMNS += [_col, f"{_col}_ref", f"{_col}_rel_dev"]
TABLE1_COLUMNS += ["Tphi_flux2_ms", "T_mK", "eps", "Delta_GHz", "C_J_fF", "A_phi0_per_rtHz"]


def _device_row(entry, settings: Table1Settings) -> dict:
    params = entry.params
    ref_values = entry.reference
    basis = BasisConfig(dim=settings.dim)
    spec = spectrum(params, 0.5, settings.chi_levels, basis)
    trans = transitions(spec)
    env = EnvironmentParams(
        T_mK=settings.T_mK, eps=settings.eps, Delta_GHz=settings.Delta_GHz, C_J_fF=settings.C_J_fF
    )
    cavity = entry.cavity or CavityParams()
    _, _, chi01 = dispersive_shift(trans, cavity)
    T1 = ref_values["T1_us"]
    curvature = flux_derivative(params, 0.5, 2, basis)
    row = {
        "device": entry.name,
        "f01_GHz": spec.f01,
        "ratio_12_01": trans.anharmonicity_ratio,
        "chi01_MHz": abs(chi01),
        "tan_delta_C": invert_loss("dielectric", T1, spec, trans, env, params),
        "tan_delta_AlOx": invert_loss("junction_oxide", T1, spec, trans, env, params),
        "x_qp": invert_loss("quasiparticle", T1, spec, trans, env, params),
        "tan_delta_L_formula": derived_tan_delta_L(params, spec.f01, ref_values["tan_delta_C"]),
        "tan_delta_L_inverted": invert_loss("inductive", T1, spec, trans, env, params),
        "Tphi_flux2_ms": 1e3 / flux_dephasing(0.0, curvature, settings.A).second_order,
        "T_mK": settings.T_mK,
        "eps": settings.eps,
        "Delta_GHz": settings.Delta_GHz,
        "C_J_fF": settings.C_J_fF,
        "A_phi0_per_rtHz": settings.A,
    }
    for col, key in _COMPARED:
        ref = ref_values.get(key)
        row[f"{col}_ref"] = ref
        row[f"{col}_rel_dev"] = None if not ref else row[col] / ref - 1
    return row


def table1_rows(registry: DeviceRegistry, settings: Table1Settings | None = None) -> list[dict]:
    settings = settings or Table1Settings()
    return [_device_row(registry[name], settings) for name in sorted(registry)]


def table1_csv(rows: list[dict]) -> str:
    def cell(v):
        return "" if v is None else v

    return write_csv(([cell(r[c]) for c in TABLE1_COLUMNS] for r in rows), TABLE1_COLUMNS)


def settings_dict(settings: Table1Settings) -> dict:
    return asdict(settings)
