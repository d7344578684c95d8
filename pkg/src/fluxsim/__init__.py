"""Fluxonium qubit spectra, coherence budgets, couplings and spectroscopy fits."""

from .constants import CONST, PhysicalConstants
from .coupling import (
    CavityParams,
    CoupledSpectrum,
    SpinModel,
    TwoQubitCoupling,
    coupled_spectrum,
    coupling_strength,
    dispersive_shift,
    dispersive_shift_exact,
    spin_projection,
    zz_perturbative,
)
from .errors import (
    ConvergenceError,
    DegenerateLevelError,
    FluxsimError,
    InputError,
    NearResonanceError,
    NumericalError,
    SingularJacobianError,
)
from .fitting import (
    FitResult,
    FluxCalibration,
    SpectroscopyDataset,
    SpectroscopyPoint,
    fit,
    forward_model,
    model_frequencies,
    synth_dataset,
)
from .io import DeviceEntry, DeviceRegistry, load_registry
from .noise import (
    CoherenceBudget,
    EnvironmentParams,
    budget,
    derived_tan_delta_L,
    flux_dephasing,
    invert_loss,
    relaxation_rates,
    thermal_factor,
    thermal_photon_dephasing,
)
from .oracle import grid_oracle, grid_transitions
from .spectrum import (
    BasisConfig,
    CircuitParams,
    FluxBias,
    FluxoniumRegimeWarning,
    Spectrum,
    TransitionTable,
    flux_derivative,
    flux_sweep,
    make_hamiltonian,
    spectrum,
    transitions,
)

__version__ = "0.1.0"
