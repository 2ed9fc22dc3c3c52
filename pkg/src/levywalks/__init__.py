"""Scaling-limit densities and Monte Carlo simulation of Levy walks in d dimensions.

Three walk kinds share one renewal process of Pareto waiting times: the
standard walk interpolates the jump in progress, the undershooting walk
ignores it and the overshooting walk completes it.  The package evaluates
the one-coordinate density Phi1 and the radius density Phi_R of the
ballistic scaling limit by several independent routes and checks them
against simulated ensembles.
"""

from .densities import (
    Route,
    cartesian_density,
    density_table,
    phi1,
    phi_r,
    phi_r_d3_closed,
    project_radius_to_axis,
    radial_cdf,
    radius_normalization,
)
from .errors import (
    BinError,
    DomainError,
    EndpointUnstable,
    InsufficientTail,
    LevyWalkError,
    NumericError,
    RouteParityError,
)
from .model import ModelParams, Parity, WalkKind, make_params
from .simulate import RngStream, coupled_ensemble, sample_direction, sample_waiting_time, scaled_ensemble, walk_position
from .stats import histogram_density, ks_distance, loglog_slope, tail_exponent_estimate

__all__ = [
    "BinError", "DomainError", "EndpointUnstable", "InsufficientTail", "LevyWalkError", "ModelParams",
    "NumericError", "Parity", "RngStream", "Route", "RouteParityError", "WalkKind", "cartesian_density",
    "coupled_ensemble", "density_table", "histogram_density", "ks_distance", "loglog_slope", "make_params",
    "phi1", "phi_r", "phi_r_d3_closed", "project_radius_to_axis", "radial_cdf", "radius_normalization",
    "sample_direction", "sample_waiting_time", "scaled_ensemble", "tail_exponent_estimate", "walk_position",
]
