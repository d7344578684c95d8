"""Two-tone spectroscopy forward model and circuit-parameter fits.

A fit adjusts ``(E_J, E_C, E_L, offset, scale)`` so that the transition
frequencies at flux ``offset + scale * bias`` match labelled measured lines,
minimizing the sigma-weighted sum of squares with a damped Gauss-Newton
(Levenberg-Marquardt) iteration and a central-difference Jacobian.
"""

from __future__ import annotations

import logging
import math
import re
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import minimize

from .errors import ConvergenceError, InputError, SingularJacobianError
from .spectrum import (
    DEFAULT_BASIS,
    BasisConfig,
    CircuitParams,
    FluxoniumRegimeWarning,
    _solve,
    spectrum,
)

__all__ = [
    "SpectroscopyPoint",
    "SpectroscopyDataset",
    "FluxCalibration",
    "FitResult",
    "parse_label",
    "forward_model",
    "model_frequencies",
    "fit",
    "synth_dataset",
    "DEFAULT_SIGMA_GHZ",
]

log = logging.getLogger(__name__)

DEFAULT_SIGMA_GHZ = 0.002
PARAM_NAMES = ("E_J", "E_C", "E_L", "offset", "scale")

_DIRECT = re.compile(r"^(\d)(\d)$")
_SIDEBAND = re.compile(r"^sideband_(\d)(\d)_red$")


def parse_label(label: str) -> tuple[int, int, bool]:
    """``"01"`` -> (0, 1, False); ``"sideband_04_red"`` -> (0, 4, True)."""
    for pattern, sideband in ((_DIRECT, False), (_SIDEBAND, True)):
        match = pattern.match(label)
        if match:
            i, j = int(match[1]), int(match[2])
            if j <= i:
                raise InputError(f"label {label!r} must name an upward transition i < j")
            return i, j, sideband
    raise InputError(f"unrecognized transition label {label!r}")


@dataclass(frozen=True)
class FluxCalibration:
    """Coil bias to flux: ``f = offset + scale * bias`` (flux quanta)."""

    offset: float
    scale: float

    def flux(self, bias):
        return self.offset + self.scale * np.asarray(bias, dtype=float)


@dataclass(frozen=True)
class SpectroscopyPoint:
    bias: float
    freq: float
    label: str
    sigma: float = DEFAULT_SIGMA_GHZ

    def __post_init__(self):
        parse_label(self.label)
        if not self.sigma > 0:
            raise InputError(f"sigma must be positive, got {self.sigma}")
        if not (math.isfinite(self.bias) and math.isfinite(self.freq)):
            raise InputError("bias and frequency must be finite")


@dataclass(frozen=True)
class SpectroscopyDataset:
    points: tuple[SpectroscopyPoint, ...]

    def __post_init__(self):
        object.__setattr__(self, "points", tuple(self.points))

    def __len__(self):
        return len(self.points)

    @property
    def bias(self) -> np.ndarray:
        return np.array([p.bias for p in self.points])

    @property
    def freq(self) -> np.ndarray:
        return np.array([p.freq for p in self.points])

    @property
    def sigma(self) -> np.ndarray:
        return np.array([p.sigma for p in self.points])

    @property
    def labels(self) -> list[str]:
        return [p.label for p in self.points]

    @property
    def is_well_posed(self) -> bool:
        return len(self.points) >= 6 and len(set(self.labels)) >= 2


@dataclass
class FitResult:
    params: CircuitParams
    calib: FluxCalibration
    residual_rms: float
    residuals: np.ndarray
    covariance: np.ndarray
    iterations: int
    converged: bool
    gradient_norm: float
    method: str = "lm"
    history: list[float] = field(default_factory=list, repr=False)

    @property
    def values(self) -> np.ndarray:
        p = self.params
        return np.array([p.E_J, p.E_C, p.E_L, self.calib.offset, self.calib.scale])

    @property
    def stderr(self) -> np.ndarray:
        return np.sqrt(np.clip(np.diag(self.covariance), 0, None))


def model_frequencies(
    params: CircuitParams,
    calib: FluxCalibration,
    bias,
    labels,
    f_readout: float = 7.5,
    basis: BasisConfig = DEFAULT_BASIS,
) -> np.ndarray:
    """Vectorized forward model; diagonalizes once per distinct flux value."""
    bias = np.atleast_1d(np.asarray(bias, dtype=float))
    parsed = [parse_label(lab) for lab in labels]
    n_levels = max(j for _, j, _ in parsed) + 1
    flux = calib.flux(bias)
    cache: dict[float, np.ndarray] = {}
    out = np.empty(len(bias))
    for k, (f, (i, j, sideband)) in enumerate(zip(flux, parsed)):
        key = float(f)
        if key not in cache:
            cache[key] = _solve(params, key, basis.dim, max(n_levels, 2), vectors=False)[0]
        e = cache[key]
        value = e[j] - e[i]
        if sideband:
            value -= f_readout
            if value <= 0:
                raise InputError(
                    f"red sideband {i}{j} is negative ({value:.4f} GHz) at flux {key:.6g}"
                )
        out[k] = value
    return out


def forward_model(
    params: CircuitParams,
    calib: FluxCalibration,
    bias: float,
    label: str,
    f_readout: float = 7.5,
    basis: BasisConfig = DEFAULT_BASIS,
) -> float:
    """Predicted line frequency (GHz) for one bias value and transition label."""
    return float(model_frequencies(params, calib, [bias], [label], f_readout, basis)[0])


def synth_dataset(
    params: CircuitParams,
    calib: FluxCalibration,
    bias_grid,
    labels,
    noise_sigma: float,
    seed: int = 0,
    f_readout: float = 7.5,
) -> SpectroscopyDataset:
    """Forward-model lines at every (bias, label) pair plus seeded Gaussian noise."""
    bias = np.repeat(np.asarray(bias_grid, dtype=float), len(labels))
    labs = list(labels) * len(bias_grid)
    clean = model_frequencies(params, calib, bias, labs, f_readout)
    rng = np.random.default_rng(seed)
    noisy = clean + rng.normal(0.0, noise_sigma, size=clean.shape) if noise_sigma > 0 else clean
    sigma = noise_sigma if noise_sigma > 0 else DEFAULT_SIGMA_GHZ
    return SpectroscopyDataset(
        tuple(SpectroscopyPoint(float(b), float(f), lab, sigma) for b, f, lab in zip(bias, noisy, labs))
    )


class _Objective:
    def __init__(self, data, f_readout, basis, n_junctions):
        self.data = data
        self.f_readout = f_readout
        self.basis = basis
        self.n_junctions = n_junctions
        self.bias = data.bias
        self.freq = data.freq
        self.sigma = data.sigma
        self.labels = data.labels

    def valid(self, p) -> bool:
        return bool(np.all(np.isfinite(p)) and p[0] >= 0 and p[1] > 0 and p[2] > 0)

    def residuals(self, p) -> np.ndarray:
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", FluxoniumRegimeWarning)
            params = CircuitParams(float(p[0]), float(p[1]), float(p[2]), self.n_junctions)
        calib = FluxCalibration(p[3], p[4])
        model = model_frequencies(params, calib, self.bias, self.labels, self.f_readout, self.basis)
        return (model - self.freq) / self.sigma

    def jacobian(self, p) -> np.ndarray:
        jac = np.empty((len(self.freq), len(p)))
        for k in range(len(p)):
            h = 1e-6 * max(abs(p[k]), 1e-2)
            up, down = p.copy(), p.copy()
            up[k] += h
            down[k] -= h
            jac[:, k] = (self.residuals(up) - self.residuals(down)) / (2 * h)
        return jac


def _check_rank(jac: np.ndarray, rcond: float) -> None:
    norms = np.linalg.norm(jac, axis=0)
    if np.any(norms == 0):
        names = [PARAM_NAMES[k] for k in np.flatnonzero(norms == 0)]
        raise SingularJacobianError(f"data do not constrain {', '.join(names)}")
    s = np.linalg.svd(jac / norms, compute_uv=False)
    if s[-1] / s[0] < rcond:
        raise SingularJacobianError(
            f"Jacobian is numerically singular (reciprocal condition {s[-1] / s[0]:.2e});"
            " the data under-constrain the five fit parameters"
        )


def _gradient_norm(jac, r) -> float:
    """Largest cosine between the residual vector and a Jacobian column."""
    rn = np.linalg.norm(r)
    if rn == 0:
        return 0.0
    return float(np.max(np.abs(jac.T @ r) / (np.linalg.norm(jac, axis=0) * rn)))


def fit(
    data: SpectroscopyDataset,
    init_params: CircuitParams,
    init_calib: FluxCalibration,
    f_readout: float = 7.5,
    max_iter: int = 200,
    method: str = "lm",
    gtol: float = 1e-6,
    xtol: float = 1e-12,
    rcond: float = 1e-6,
    basis: BasisConfig = DEFAULT_BASIS,
) -> FitResult:
    """Fit circuit energies and the flux calibration to labelled spectroscopy lines.

    ``method="lm"`` runs the damped least-squares iteration (lambda starts at
    1e-3, x10 on a rejected step, /10 on an accepted one); ``"simplex"`` uses
    Nelder-Mead on the same objective.  The covariance is ``(J^T J)^-1`` of
    the sigma-weighted residuals at the optimum.
    """
    if len(data) < len(PARAM_NAMES) + 1:
        raise InputError(f"need at least {len(PARAM_NAMES) + 1} points, got {len(data)}")
    if init_calib.scale == 0:
        raise InputError("initial flux calibration scale must be non-zero")
    if method not in ("lm", "simplex"):
        raise InputError(f"unknown fit method {method!r}")
    obj = _Objective(data, f_readout, basis, init_params.N)
    p = np.array([init_params.E_J, init_params.E_C, init_params.E_L, init_calib.offset, init_calib.scale])
    if method == "lm":
        p, iterations, history = _levenberg_marquardt(obj, p, max_iter, gtol, xtol, rcond)
        limit = max_iter
    else:
        p, iterations, history, simplex_ok = _simplex(obj, p, max_iter)
        limit = 10 * max_iter

    r = obj.residuals(p)
    jac = obj.jacobian(p)
    _check_rank(jac, rcond)
    gnorm = _gradient_norm(jac, r)
    residuals = r * obj.sigma
    rms = float(np.sqrt(np.mean(residuals**2)))
    converged = gnorm < gtol or rms < 1e-9 or (method == "simplex" and simplex_ok)
    if not converged and iterations >= limit:
        raise ConvergenceError(f"fit did not converge in {max_iter} iterations (gradient {gnorm:.2e})")
    covariance = np.linalg.inv(jac.T @ jac)
    final_params = CircuitParams(float(p[0]), float(p[1]), float(p[2]), init_params.N)
    # the fast path skips the basis-doubling check; run it once at the optimum
    spectrum(final_params, float(p[3] + p[4] * obj.bias[0]), 3, basis)
    return FitResult(
        params=final_params,
        calib=FluxCalibration(float(p[3]), float(p[4])),
        residual_rms=rms,
        residuals=residuals,
        covariance=covariance,
        iterations=iterations,
        converged=bool(converged),
        gradient_norm=gnorm,
        method=method,
        history=history,
    )


def _levenberg_marquardt(obj, p, max_iter, gtol, xtol, rcond):
    r = obj.residuals(p)
    cost = float(r @ r)
    lam = 1e-3
    history = [cost]
    iterations = 0
    while iterations < max_iter:
        iterations += 1
        jac = obj.jacobian(p)
        _check_rank(jac, rcond)
        if _gradient_norm(jac, r) < gtol or cost < 1e-24:
            break
        jtj = jac.T @ jac
        grad = jac.T @ r
        damping = np.diag(np.diag(jtj))
        accepted = False
        while lam < 1e16:
            step = np.linalg.solve(jtj + lam * damping, -grad)
            trial = p + step
            if obj.valid(trial):
                r_trial = obj.residuals(trial)
                cost_trial = float(r_trial @ r_trial)
                if cost_trial < cost:
                    accepted = True
                    break
            lam *= 10
        if not accepted:
            log.debug("no downhill step at iteration %d; stopping", iterations)
            break
        lam = max(lam / 10, 1e-12)
        small = np.all(np.abs(step) <= xtol * (np.abs(p) + xtol))
        p, r, cost = trial, r_trial, cost_trial
        history.append(cost)
        log.debug("iteration %d: chi2=%.6g lambda=%.1e", iterations, cost, lam)
        if small:
            break
    return p, iterations, history


def _simplex(obj, p, max_iter):
    """Nelder-Mead on the same chi^2; ``max_iter`` counts tens of simplex moves."""
    history = []

    def cost(x):
        if not obj.valid(x):
            return np.inf
        r = obj.residuals(x)
        value = float(r @ r)
        history.append(value)
        return value

    # start from a simplex spanning a few percent in every direction
    scale = np.where(p != 0, 0.05 * np.abs(p), 0.01)
    simplex = np.vstack([p, p + np.diag(scale)])
    res = minimize(
        cost, p, method="Nelder-Mead",
        options={"maxiter": 10 * max_iter, "xatol": 1e-9, "fatol": 1e-9, "initial_simplex": simplex},
    )
    return res.x, int(res.nit), history, bool(res.success)
