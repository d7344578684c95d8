"""File formats: device/environment/cavity/coupling JSON, sweep and dataset CSV.

Floats are written with 12 significant digits so repeated runs produce
byte-identical files.  Infinite lifetimes are written as the string ``"inf"``.
"""

from __future__ import annotations

import csv
import io
import json
import math
import os
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Any, Iterable, Mapping

import numpy as np

from .constants import CONST
from .coupling import CavityParams, TwoQubitCoupling
from .errors import InputError
from .fitting import DEFAULT_SIGMA_GHZ, SpectroscopyDataset, SpectroscopyPoint
from .noise import EnvironmentParams
from .spectrum import CircuitParams, FluxBias, TransitionTable

SIG_DIGITS = 12
REGISTRY_ENV_VAR = "FLUXSIM_REGISTRY"

DATASET_HEADER = ("bias", "freq_GHz", "label", "sigma_GHz")

ENV_KEYS = {
    "T_mK": "T_mK",
    "A_phi0_per_rtHz": "A",
    "tan_delta_C_6GHz": "tan_delta_C",
    "eps": "eps",
    "tan_delta_L": "tan_delta_L",
    "tan_delta_AlOx": "tan_delta_AlOx",
    "x_qp": "x_qp",
    "Delta_GHz": "Delta_GHz",
    "C_J_fF": "C_J_fF",
    "C_g_fF": "C_g_fF",
}


def fmt(x) -> str:
    """Fixed 12-significant-digit formatting."""
    if isinstance(x, (int, np.integer)) and not isinstance(x, bool):
        return str(int(x))
    x = float(x)
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    if math.isnan(x):
        return "nan"
    out = format(x, f".{SIG_DIGITS}g")
    return "0" if out == "-0" else out


def _round(obj: Any) -> Any:
    if isinstance(obj, bool) or obj is None or isinstance(obj, str):
        return obj
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        if math.isinf(x) or math.isnan(x):
            return fmt(x)
        return float(fmt(x))
    if isinstance(obj, Mapping):
        return {str(k): _round(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple, np.ndarray)):
        return [_round(v) for v in obj]
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def dumps_json(obj: Any) -> str:
    return json.dumps(_round(obj), indent=2, sort_keys=False) + "\n"


def constants_provenance() -> dict:
    return {
        "h_J_s": CONST.h,
        "hbar_J_s": CONST.hbar,
        "e_C": CONST.e,
        "k_B_J_per_K": CONST.k_B,
        "Phi0_Wb": CONST.Phi0,
        "source": "CODATA 2018 exact SI values (scipy.constants)",
    }


def _load_json(path) -> Any:
    try:
        with open(path, encoding="utf-8") as fh:
            return json.load(fh)
    except FileNotFoundError:
        raise InputError(f"file not found: {path}") from None
    except json.JSONDecodeError as exc:
        raise InputError(f"malformed JSON in {path}: {exc.msg} (line {exc.lineno})") from None


def _require_mapping(data, what) -> Mapping:
    if not isinstance(data, Mapping):
        raise InputError(f"{what} must be a JSON object")
    return data


def params_from_dict(data: Mapping) -> CircuitParams:
    data = _require_mapping(data, "device parameters")
    try:
        return CircuitParams(
            float(data["E_J_GHz"]), float(data["E_C_GHz"]), float(data["E_L_GHz"]), int(data.get("N", 1))
        )
    except KeyError as exc:
        raise InputError(f"device parameters lack {exc.args[0]!r}") from None
    except (TypeError, ValueError) as exc:
        raise InputError(f"bad device parameters: {exc}") from None


def params_to_dict(params: CircuitParams) -> dict:
    return {"E_J_GHz": params.E_J, "E_C_GHz": params.E_C, "E_L_GHz": params.E_L, "N": params.N}


def load_params(path) -> CircuitParams:
    return params_from_dict(_load_json(path))


def env_from_dict(data: Mapping) -> EnvironmentParams:
    data = _require_mapping(data, "environment")
    unknown = set(data) - set(ENV_KEYS)
    if unknown:
        raise InputError(f"unknown environment keys: {', '.join(sorted(unknown))}")
    kwargs = {}
    for key, attr in ENV_KEYS.items():
        if key in data and data[key] is not None:
            try:
                kwargs[attr] = float(data[key])
            except (TypeError, ValueError):
                raise InputError(f"environment value {key} is not a number") from None
    return EnvironmentParams(**kwargs)


def load_env(path) -> EnvironmentParams:
    return env_from_dict(_load_json(path))


def cavity_from_dict(data: Mapping) -> CavityParams:
    data = _require_mapping(data, "cavity")
    try:
        return CavityParams(
            f_r=float(data.get("f_r_GHz", 7.5)),
            kappa=float(data.get("kappa_MHz", 15.0)),
            g=float(data.get("g_MHz", 70.0)),
            coupling_kind=str(data.get("coupling_kind", "capacitive")),
        )
    except (TypeError, ValueError) as exc:
        raise InputError(f"bad cavity parameters: {exc}") from None


def load_cavity(path) -> CavityParams:
    return cavity_from_dict(_load_json(path))


def coupling_from_dict(data: Mapping) -> TwoQubitCoupling:
    data = _require_mapping(data, "coupling")
    if "kind" not in data:
        raise InputError("coupling file lacks 'kind'")
    ratio = data.get("C_M_over_C")
    m = data.get("m")
    return TwoQubitCoupling(
        str(data["kind"]),
        None if ratio is None else float(ratio),
        None if m is None else float(m),
    )


def load_coupling(path) -> TwoQubitCoupling:
    return coupling_from_dict(_load_json(path))


# --- registry ---------------------------------------------------------------


@dataclass(frozen=True)
class DeviceEntry:
    name: str
    params: CircuitParams
    cavity: CavityParams | None = None
    env: EnvironmentParams | None = None
    reference: dict = field(default_factory=dict)
    note: str = ""


class DeviceRegistry(dict):
    """Device name -> :class:`DeviceEntry`."""

    @classmethod
    def from_dict(cls, data: Mapping) -> "DeviceRegistry":
        data = _require_mapping(data, "device registry")
        reg = cls()
        for name, block in data.items():
            block = _require_mapping(block, f"device {name!r}")
            reg[name] = DeviceEntry(
                name=name,
                params=params_from_dict(block),
                cavity=cavity_from_dict(block["cavity"]) if "cavity" in block else None,
                env=env_from_dict(block["env"]) if "env" in block else None,
                reference=dict(block.get("reference", {})),
                note=str(block.get("note", "")),
            )
        return reg

    def get_device(self, name: str) -> DeviceEntry:
        try:
            return self[name]
        except KeyError:
            raise InputError(f"unknown device {name!r}; known: {', '.join(sorted(self))}") from None


def load_registry(path=None) -> DeviceRegistry:
    """Bundled device set, or the file named by ``path`` / ``$FLUXSIM_REGISTRY``."""
    path = path or os.environ.get(REGISTRY_ENV_VAR)
    if path:
        return DeviceRegistry.from_dict(_load_json(path))
    text = resources.files("fluxsim").joinpath("data/devices.json").read_text(encoding="utf-8")
    return DeviceRegistry.from_dict(json.loads(text))


# --- CSV ----------------------------------------------------------------------


def write_csv(rows: Iterable[Iterable[Any]], header: Iterable[str]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(list(header))
    for row in rows:
        writer.writerow([v if isinstance(v, str) else fmt(v) for v in row])
    return buf.getvalue()


def sweep_header(n_levels: int) -> list[str]:
    cols = ["flux_phi0"] + [f"E{k}_GHz" for k in range(n_levels)]
    for i in range(n_levels):
        for j in range(i + 1, n_levels):
            cols += [f"f{i}{j}_GHz", f"phi{i}{j}_rad", f"n{i}{j}_cooper_pairs"]
    return cols


def sweep_csv(sweep: Iterable[tuple[FluxBias, TransitionTable]]) -> str:
    """One row per flux point.  Level energies are relative to the ground state."""
    sweep = list(sweep)
    n_levels = sweep[0][1].n_levels
    rows = []
    for flux, table in sweep:
        row = [flux.f] + [float(table.freq[0, k]) for k in range(n_levels)]
        for i, j, f, phi, n in table.rows():
            row += [f, phi, n]
        rows.append(row)
    return write_csv(rows, sweep_header(n_levels))


def dataset_csv(data: SpectroscopyDataset) -> str:
    return write_csv(((p.bias, p.freq, p.label, p.sigma) for p in data.points), DATASET_HEADER)


def read_dataset(path) -> SpectroscopyDataset:
    try:
        fh = open(path, newline="", encoding="utf-8")
    except FileNotFoundError:
        raise InputError(f"file not found: {path}") from None
    points = []
    with fh:
        reader = csv.DictReader(fh)
        missing = {"bias", "freq_GHz", "label"} - set(reader.fieldnames or ())
        if missing:
            raise InputError(f"dataset {path} lacks columns: {', '.join(sorted(missing))}")
        for lineno, row in enumerate(reader, start=2):
            try:
                sigma = row.get("sigma_GHz")
                points.append(
                    SpectroscopyPoint(
                        float(row["bias"]),
                        float(row["freq_GHz"]),
                        row["label"].strip(),
                        float(sigma) if sigma not in (None, "") else DEFAULT_SIGMA_GHZ,
                    )
                )
            except (TypeError, ValueError) as exc:
                raise InputError(f"{path}:{lineno}: {exc}") from None
    if not points:
        raise InputError(f"dataset {path} is empty")
    return SpectroscopyDataset(tuple(points))


def write_text(text: str, out: str | Path | None) -> None:
    if out is None or str(out) == "-":
        import sys

        sys.stdout.write(text)
        return
    Path(out).write_text(text, encoding="utf-8")
