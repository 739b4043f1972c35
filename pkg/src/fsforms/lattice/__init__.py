"""Sampled Yang-Mills fields on an interval and a concrete functional connection."""
from .core import (
    ConvergenceError, CoulombConnection, DegeneracyError, GaugeParameter, GroupField,
    LatticeConfig, LatticeError, TangentVector, corner_charge, coulomb_connection,
    cov_deriv, curvature_exact, curvature_probe, equivariance_check, field_dependent_check,
    fp_operator, fundamental_vector, gauge_transform, gauss_electric_field, gribov_scan,
    theta, theta_H,
)
from .groups import SU2, U1, GaugeGroupSpec, get_group

__all__ = [
    "ConvergenceError", "CoulombConnection", "DegeneracyError", "GaugeParameter", "GroupField",
    "LatticeConfig", "LatticeError", "TangentVector", "corner_charge", "coulomb_connection",
    "cov_deriv", "curvature_exact", "curvature_probe", "equivariance_check",
    "field_dependent_check", "fp_operator", "fundamental_vector", "gauge_transform",
    "gauss_electric_field", "gribov_scan", "theta", "theta_H", "SU2", "U1",
    "GaugeGroupSpec", "get_group",
]
