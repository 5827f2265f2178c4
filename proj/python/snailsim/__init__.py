"""Python access to the snailsim core library."""

from ._core import (
    CircuitParams,
    TaylorCoefficients,
    device_params,
    drift_angle,
    effective_static,
    find_kerr_free_flux,
    hamiltonian_coefficients,
    numeric_kerr_oracle,
    resonator_frequency,
    run,
    squeezing_to_db,
    state_wigner,
)

__all__ = [
    "CircuitParams",
    "TaylorCoefficients",
    "device_params",
    "drift_angle",
    "effective_static",
    "find_kerr_free_flux",
    "hamiltonian_coefficients",
    "numeric_kerr_oracle",
    "resonator_frequency",
    "run",
    "squeezing_to_db",
    "state_wigner",
]
