"""``fluxsim`` command line.

Every subcommand reads JSON/CSV files, writes CSV or JSON to ``--out``
(stdout by default) and optionally a figure with ``--figure``.  Exit codes:
0 success, 2 bad input, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import sys
import warnings

import numpy as np

from . import io
from .coupling import (
    CavityParams,
    TwoQubitCoupling,
    coupled_spectrum,
    dispersive_shift,
    dispersive_shift_exact,
    spin_projection,
    zz_perturbative,
)
from .errors import InputError, NumericalError
from .fitting import PARAM_NAMES, FluxCalibration, fit, synth_dataset
from .noise import EnvironmentParams, budget, derived_tan_delta_L, invert_loss
from .report import Table1Settings, table1_csv, table1_rows
from .spectrum import BasisConfig, flux_sweep, spectrum, transitions

PROG = "fluxsim"
EXIT_OK, EXIT_INPUT, EXIT_NUMERICAL = 0, 2, 3


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise _UsageError(message)


# --- shared option groups ---------------------------------------------------


def _common(sub):
    sub.add_argument("--out", default="-", help="output file (default: stdout)")
    sub.add_argument("--config", help="JSON file of option defaults; flags take precedence")
    sub.add_argument("--dim", type=int, default=60, help="oscillator basis size")
    sub.add_argument("--tol", type=float, default=1e-6, help="basis convergence tolerance (GHz)")


def _device(sub, suffix="", required=True):
    grp = sub.add_mutually_exclusive_group(required=False)
    grp.add_argument(f"--device{suffix}", help="device name in the registry")
    grp.add_argument(f"--params{suffix}", help="JSON file with E_J_GHz, E_C_GHz, E_L_GHz, N")
    sub.set_defaults(**{f"_device_required{suffix.replace('-', '_')}": required})


def _env_overrides(sub):
    sub.add_argument("--env", help="environment JSON file")
    sub.add_argument("--T-mK", dest="T_mK", type=float, help="bath temperature (mK)")
    sub.add_argument("--eps", type=float, help="dielectric loss frequency exponent")
    sub.add_argument("--delta-ghz", dest="Delta_GHz", type=float, help="superconducting gap (GHz)")
    sub.add_argument("--cj-ff", dest="C_J_fF", type=float, help="chain junction capacitance (fF)")


def build_parser() -> _Parser:
    parser = _Parser(prog=PROG, description="Fluxonium spectra, coherence budgets and fits.")
    subs = parser.add_subparsers(dest="command", required=True, metavar="COMMAND")

    p = subs.add_parser("spectrum", help="flux sweep of transition frequencies and matrix elements")
    _common(p)
    _device(p)
    p.add_argument("--from", dest="flux_from", type=float, default=0.0, help="start flux (Phi0)")
    p.add_argument("--to", dest="flux_to", type=float, default=0.5, help="end flux (Phi0)")
    p.add_argument("--steps", type=int, default=101)
    p.add_argument("--levels", type=int, default=6)
    p.add_argument("--figure", help="write a PNG/PDF plot here")

    p = subs.add_parser("budget", help="coherence budget at one flux point")
    _common(p)
    _device(p)
    p.add_argument("--flux", type=float, default=0.5, help="flux (Phi0)")
    p.add_argument("--env", help="environment JSON file (absent channels are skipped)")
    p.add_argument("--cavity", help="cavity JSON file")
    p.add_argument("--n-th", dest="n_th", type=float, help="thermal photon number in the cavity")

    p = subs.add_parser("invert", help="loss parameters implied by a measured T1")
    _common(p)
    _device(p)
    _env_overrides(p)
    p.add_argument("--flux", type=float, default=0.5)
    p.add_argument("--T1", dest="T1_us", type=float, help="measured T1 (us); default: registry value")
    p.add_argument("--tan-delta-c", dest="tan_delta_C", type=float,
                   help="capacitive loss tangent for the tan(delta_L) formula; default: registry value")

    p = subs.add_parser("table1", help="derived columns for every registry device, with reference values")
    _common(p)
    p.add_argument("--T-mK", dest="T_mK", type=float, default=Table1Settings.T_mK)
    p.add_argument("--eps", type=float, default=Table1Settings.eps)
    p.add_argument("--delta-ghz", dest="Delta_GHz", type=float, default=Table1Settings.Delta_GHz)
    p.add_argument("--cj-ff", dest="C_J_fF", type=float, default=Table1Settings.C_J_fF)
    p.add_argument("--A", dest="A", type=float, default=Table1Settings.A, help="flux noise (Phi0/rtHz)")
    p.add_argument("--chi-levels", type=int, default=Table1Settings.chi_levels)
    p.add_argument("--figure")

    p = subs.add_parser("fit", help="fit circuit energies and flux calibration to spectroscopy lines")
    _common(p)
    _device(p)
    p.add_argument("--data", required=True, help="CSV with bias,freq_GHz,label[,sigma_GHz]")
    p.add_argument("--offset", type=float, default=0.0, help="initial flux offset (Phi0)")
    p.add_argument("--scale", type=float, default=1.0, help="initial flux per bias unit (Phi0)")
    p.add_argument("--f-readout", dest="f_readout", type=float, default=7.5, help="cavity (GHz)")
    p.add_argument("--method", choices=("lm", "simplex"), default="lm")
    p.add_argument("--max-iter", dest="max_iter", type=int, default=200)
    p.add_argument("--figure")

    p = subs.add_parser("synth", help="synthetic spectroscopy dataset from a device")
    _common(p)
    _device(p)
    p.add_argument("--offset", type=float, default=0.0)
    p.add_argument("--scale", type=float, default=1.0)
    p.add_argument("--bias-from", dest="bias_from", type=float, default=0.0)
    p.add_argument("--bias-to", dest="bias_to", type=float, default=0.5)
    p.add_argument("--points", type=int, default=20, help="bias values")
    p.add_argument("--labels", default="01,12", help="comma-separated transition labels")
    p.add_argument("--sigma", type=float, default=0.001, help="noise (GHz)")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--f-readout", dest="f_readout", type=float, default=7.5)

    p = subs.add_parser("couple", help="two coupled fluxoniums: J, ZZ and spin model")
    _common(p)
    _device(p)
    _device(p, "-b", required=False)
    p.add_argument("--coupling", help="coupling JSON file")
    p.add_argument("--kind", choices=("capacitive", "inductive"))
    p.add_argument("--m", type=float, help="shared inductance fraction")
    p.add_argument("--cm-over-c", dest="C_M_over_C", type=float, help="mutual capacitance ratio")
    p.add_argument("--flux-a", dest="flux_a", type=float, default=0.5)
    p.add_argument("--flux-b", dest="flux_b", type=float, default=0.5)
    p.add_argument("--n-keep", dest="n_keep", type=int, default=10)

    p = subs.add_parser("chi", help="dispersive shift of the readout cavity")
    _common(p)
    _device(p)
    p.add_argument("--cavity", help="cavity JSON file; default: registry or 7.5 GHz / 70 MHz")
    p.add_argument("--flux", type=float, default=0.5)
    p.add_argument("--levels", type=int, default=12)
    p.add_argument("--exact", action="store_true", help="also diagonalize qubit x cavity")
    return parser


# --- helpers ------------------------------------------------------------------


def _apply_config(parser: _Parser, argv: list[str]) -> argparse.Namespace:
    """Parse twice so that config-file values sit between defaults and flags."""
    args = parser.parse_args(argv)
    if not args.config:
        return args
    data = io._require_mapping(io._load_json(args.config), "config")
    sub = parser._subparsers._group_actions[0].choices[args.command]
    # keys may name either the long option ("to", "T-mK") or its dest ("flux_to")
    dests = {}
    for action in sub._actions:
        dests[action.dest] = action.dest
        for opt in action.option_strings:
            if opt.startswith("--"):
                dests[opt[2:]] = dests[opt[2:].replace("-", "_")] = action.dest
    cleaned = {}
    for key, value in data.items():
        dest = dests.get(key, dests.get(key.replace("-", "_")))
        if dest is None or dest in ("config", "help"):
            raise InputError(f"config key {key!r} is not an option of '{args.command}'")
        cleaned[dest] = value
    sub.set_defaults(**cleaned)
    return parser.parse_args(argv)


def _basis(args) -> BasisConfig:
    return BasisConfig(dim=args.dim, tol=args.tol)


def _select(args, suffix=""):
    """(name, params, registry entry) for --device/--params."""
    key = suffix.replace("-", "_")
    name = getattr(args, f"device{key}")
    path = getattr(args, f"params{key}")
    if name:
        entry = io.load_registry().get_device(name)
        return name, entry.params, entry
    if path:
        return path, io.load_params(path), None
    if getattr(args, f"_device_required{key}", True):
        raise InputError(f"one of --device{suffix} or --params{suffix} is required")
    return None, None, None


def _env(args, entry=None) -> EnvironmentParams:
    if args.env:
        env = io.load_env(args.env)
    else:
        env = entry.env if entry is not None and entry.env is not None else EnvironmentParams()
    overrides = {k: getattr(args, k, None) for k in ("T_mK", "eps", "Delta_GHz", "C_J_fF")}
    overrides = {k: v for k, v in overrides.items() if v is not None}
    if overrides:
        kwargs = {f: getattr(env, f) for f in env.__dataclass_fields__}
        kwargs.update(overrides)
        env = EnvironmentParams(**kwargs)
    return env


def _cavity(args, entry) -> CavityParams:
    if getattr(args, "cavity", None):
        return io.load_cavity(args.cavity)
    if entry is not None and entry.cavity is not None:
        return entry.cavity
    return CavityParams()


def _device_block(name, params) -> dict:
    return {"device": name, "params": io.params_to_dict(params)}


# --- subcommands ----------------------------------------------------------------


def cmd_spectrum(args):
    name, params, _ = _select(args)
    if args.steps < 1:
        raise InputError(f"--steps must be >= 1, got {args.steps}")
    grid = np.linspace(args.flux_from, args.flux_to, args.steps)
    sweep = flux_sweep(params, grid, args.levels, _basis(args))
    io.write_text(io.sweep_csv(sweep), args.out)
    if args.figure:
        from .plotting import plot_sweep

        plot_sweep(sweep, args.figure)


def cmd_budget(args):
    name, params, entry = _select(args)
    env = io.load_env(args.env) if args.env else EnvironmentParams()
    cavity = io.load_cavity(args.cavity) if args.cavity else None
    if (cavity is None) != (args.n_th is None):
        raise InputError("the thermal-photon channel needs both --cavity and --n-th")
    result = budget(params, args.flux, env, cavity, args.n_th, basis=_basis(args))
    out = _device_block(name, params)
    out.update(result.to_dict())
    if cavity is not None:
        out["cavity"] = {"f_r_GHz": cavity.f_r, "kappa_MHz": cavity.kappa, "g_MHz": cavity.g,
                         "coupling_kind": cavity.coupling_kind}
        out["n_th"] = args.n_th
    io.write_text(io.dumps_json(out), args.out)


def cmd_invert(args):
    name, params, entry = _select(args)
    ref = entry.reference if entry is not None else {}
    T1 = args.T1_us if args.T1_us is not None else ref.get("T1_us")
    if T1 is None:
        raise InputError("--T1 is required for devices without a registry T1")
    env = _env(args, entry)
    spec = spectrum(params, args.flux, 6, _basis(args))
    trans = transitions(spec)
    results = {
        "tan_delta_C_6GHz": invert_loss("dielectric", T1, spec, trans, env, params),
        "tan_delta_L": invert_loss("inductive", T1, spec, trans, env, params),
        "tan_delta_AlOx": invert_loss("junction_oxide", T1, spec, trans, env, params),
        "x_qp": invert_loss("quasiparticle", T1, spec, trans, env, params),
    }
    tan_c = args.tan_delta_C if args.tan_delta_C is not None else ref.get("tan_delta_C")
    out = _device_block(name, params)
    out.update({
        "flux_phi0": args.flux,
        "T1_us": T1,
        "f01_GHz": spec.f01,
        "phi01": float(trans.phi[0, 1]),
        "single_channel_bounds": results,
        "tan_delta_L_formula": None if tan_c is None else derived_tan_delta_L(params, spec.f01, tan_c),
        "tan_delta_C_for_formula": tan_c,
        "settings": {"T_mK": env.T_mK, "eps": env.eps, "Delta_GHz": env.Delta_GHz, "C_J_fF": env.C_J_fF},
        "constants": io.constants_provenance(),
    })
    io.write_text(io.dumps_json(out), args.out)


def cmd_table1(args):
    settings = Table1Settings(
        T_mK=args.T_mK, eps=args.eps, Delta_GHz=args.Delta_GHz, C_J_fF=args.C_J_fF,
        A=args.A, chi_levels=args.chi_levels, dim=args.dim,
    )
    rows = table1_rows(io.load_registry(), settings)
    io.write_text(table1_csv(rows), args.out)
    if args.figure:
        from .plotting import plot_table1

        plot_table1(rows, args.figure)


def cmd_fit(args):
    name, params, _ = _select(args)
    data = io.read_dataset(args.data)
    result = fit(
        data, params, FluxCalibration(args.offset, args.scale), f_readout=args.f_readout,
        max_iter=args.max_iter, method=args.method, basis=_basis(args),
    )
    table = [
        {"bias": p.bias, "freq_GHz": p.freq, "label": p.label, "sigma_GHz": p.sigma,
         "residual_GHz": float(r)}
        for p, r in zip(data.points, result.residuals)
    ]
    out = {
        "initial": {"device": name, **io.params_to_dict(params), "offset_phi0": args.offset,
                    "scale_phi0_per_bias": args.scale},
        "params": io.params_to_dict(result.params),
        "calibration": {"offset_phi0": result.calib.offset, "scale_phi0_per_bias": result.calib.scale},
        "parameter_order": list(PARAM_NAMES),
        "stderr": result.stderr.tolist(),
        "covariance_row_major": result.covariance.ravel().tolist(),
        "residual_rms_GHz": result.residual_rms,
        "iterations": result.iterations,
        "converged": result.converged,
        "gradient_norm": result.gradient_norm,
        "method": result.method,
        "f_readout_GHz": args.f_readout,
        "residuals": table,
    }
    io.write_text(io.dumps_json(out), args.out)
    if args.figure:
        from .plotting import plot_fit

        plot_fit(data, result, args.figure, args.f_readout)


def cmd_synth(args):
    _, params, _ = _select(args)
    if args.points < 1:
        raise InputError("--points must be >= 1")
    labels = [s.strip() for s in args.labels.split(",") if s.strip()]
    data = synth_dataset(
        params, FluxCalibration(args.offset, args.scale),
        np.linspace(args.bias_from, args.bias_to, args.points), labels,
        args.sigma, args.seed, args.f_readout,
    )
    io.write_text(io.dataset_csv(data), args.out)


def _coupling(args) -> TwoQubitCoupling:
    if args.coupling:
        if args.kind or args.m is not None or args.C_M_over_C is not None:
            raise InputError("give --coupling or --kind/--m/--cm-over-c, not both")
        return io.load_coupling(args.coupling)
    if not args.kind:
        raise InputError("one of --coupling or --kind is required")
    return TwoQubitCoupling(args.kind, args.C_M_over_C, args.m)


def cmd_couple(args):
    name_a, params_a, _ = _select(args)
    name_b, params_b, _ = _select(args, "-b")
    if params_b is None:
        name_b, params_b = name_a, params_a
    coupling = _coupling(args)
    basis = _basis(args)
    n_keep = args.n_keep
    spec_a = spectrum(params_a, args.flux_a, n_keep, basis)
    spec_b = spectrum(params_b, args.flux_b, n_keep, basis)
    trans_a, trans_b = transitions(spec_a), transitions(spec_b)
    joint = coupled_spectrum(spec_a, spec_b, coupling, n_keep)
    spin = spin_projection(spec_a, spec_b, trans_a, trans_b, coupling, args.flux_a, args.flux_b, basis)
    e0 = joint.energies[0]
    levels = [
        {"label": f"{a}{b}", "E_GHz": float(e - e0), "ambiguous": amb}
        for e, (a, b), amb in list(zip(joint.energies, joint.labels, joint.ambiguous))[:8]
    ]
    out = {
        "qubit_a": {**_device_block(name_a, params_a), "flux_phi0": args.flux_a, "f01_GHz": spec_a.f01},
        "qubit_b": {**_device_block(name_b, params_b), "flux_phi0": args.flux_b, "f01_GHz": spec_b.f01},
        "coupling": {"kind": coupling.kind, "C_M_over_C": coupling.C_M_over_C, "m": coupling.m},
        "J_GHz": joint.J,
        "zz_GHz": joint.zz,
        "zz_perturbative_GHz": zz_perturbative(spec_a, spec_b, coupling, n_keep),
        "spin_model": spin.to_dict(),
        "levels": levels,
        "n_keep": n_keep,
    }
    io.write_text(io.dumps_json(out), args.out)


def cmd_chi(args):
    name, params, entry = _select(args)
    cavity = _cavity(args, entry)
    spec = spectrum(params, args.flux, args.levels, _basis(args))
    chi0, chi1, chi01 = dispersive_shift(transitions(spec), cavity)
    out = _device_block(name, params)
    out.update({
        "flux_phi0": args.flux,
        "cavity": {"f_r_GHz": cavity.f_r, "kappa_MHz": cavity.kappa, "g_MHz": cavity.g,
                   "coupling_kind": cavity.coupling_kind},
        "levels": args.levels,
        "chi_0_MHz": chi0,
        "chi_1_MHz": chi1,
        "chi_01_MHz": chi01,
        "convention": "chi_01 = chi_1 - chi_0; cavity frequency shift per qubit state",
    })
    if args.exact:
        ex = dispersive_shift_exact(spec, cavity)
        out["exact"] = {"chi_0_MHz": ex[0], "chi_1_MHz": ex[1], "chi_01_MHz": ex[2]}
    io.write_text(io.dumps_json(out), args.out)


COMMANDS = {
    "spectrum": cmd_spectrum,
    "budget": cmd_budget,
    "invert": cmd_invert,
    "table1": cmd_table1,
    "fit": cmd_fit,
    "synth": cmd_synth,
    "couple": cmd_couple,
    "chi": cmd_chi,
}


def _one_line(msg) -> str:
    return " ".join(str(msg).split())


def run(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        args = _apply_config(parser, argv)
        with warnings.catch_warnings():
            warnings.simplefilter("default")
            COMMANDS[args.command](args)
    except SystemExit as exc:  # --help
        return int(exc.code or 0)
    except (_UsageError, InputError) as exc:
        print(f"{PROG}: error: {_one_line(exc)}", file=sys.stderr)
        return EXIT_INPUT
    except NumericalError as exc:
        print(f"{PROG}: numerical failure: {_one_line(exc)}", file=sys.stderr)
        return EXIT_NUMERICAL
    except OSError as exc:
        print(f"{PROG}: error: {_one_line(exc)}", file=sys.stderr)
        return EXIT_INPUT
    return EXIT_OK


def main() -> None:
    sys.exit(run())
