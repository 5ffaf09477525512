"""Simulation of the four macroscopic polarization Bell states of two-color squeezed vacuum."""

from .gaussian import (
    ComplexCorrelations,
    GaussianState,
    apply_displacement,
    apply_loss,
    apply_passive_polarization_unitary,
    apply_two_mode_squeeze,
    correlations,
    quadratic_mean,
    quadratic_variance,
    vacuum_state,
)
from .optics import BellKind, DichroicPlate, SourceConfig, make_bell_state, mzi_source, preparation_chain
from .stokes import StokesForm, StokesReport, nrf_bounds, rotated_form, stokes_form, stokes_report, uncertainty_check

__version__ = "0.1.0"
