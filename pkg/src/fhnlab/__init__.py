"""Numerical laboratory for lattice FitzHugh-Nagumo systems driven by
fractional Brownian motion.

Modules:
    fbm        exact-covariance fBm synthesis, Wiener shift, noise fields
    lattice    truncated ell^2 operators and the weighted product space
    dynamics   drift, pathwise transformation, explicit integration
    fou        fractional Ornstein-Uhlenbeck solutions and growth bounds
    attractor  contraction, pullback, absorption and singleton harnesses
    cli        command-line experiments with reproducible artifacts
"""

__version__ = "0.1.0"

from .fbm import (
    FbmPath,
    NoiseField,
    TimeGrid,
    fbm_covariance,
    fgn_autocovariance,
    sample_fbm,
    sample_noise_field,
    shift_path,
    two_sided_fbm,
)
from .lattice import (
    EState,
    LatticeConfig,
    LatticeVector,
    apply_A,
    apply_B,
    apply_Bstar,
    build_coefficients,
    e_inner,
    e_norm,
    e_norm_sq,
)
from .dynamics import (
    Nonlinearity,
    SystemParams,
    Trajectory,
    cocycle_phi,
    cubic_nonlinearity,
    drift_G,
    integrate,
    transformed_drift,
)
from .fou import FouPath, fou_forward, fou_stationary, growth_bound_fit, stationary_pair
from .attractor import (
    compute_absorbing_radius,
    run_contraction,
    run_pullback,
    singleton_check,
    verify_absorption,
    verify_equilibrium,
)
from .config import RunConfig, load_config

__all__ = [
    "__version__",
    "FbmPath", "NoiseField", "TimeGrid", "fbm_covariance", "fgn_autocovariance",
    "sample_fbm", "sample_noise_field", "shift_path", "two_sided_fbm",
    "EState", "LatticeConfig", "LatticeVector", "apply_A", "apply_B",
    "apply_Bstar", "build_coefficients", "e_inner", "e_norm", "e_norm_sq",
    "Nonlinearity", "SystemParams", "Trajectory", "cocycle_phi",
    "cubic_nonlinearity", "drift_G", "integrate", "transformed_drift",
    "FouPath", "fou_forward", "fou_stationary", "growth_bound_fit",
    "stationary_pair",
    "compute_absorbing_radius", "run_contraction", "run_pullback",
    "singleton_check", "verify_absorption", "verify_equilibrium",
    "RunConfig", "load_config",
]
