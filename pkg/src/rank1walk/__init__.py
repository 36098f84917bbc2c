"""Spectral and Monte Carlo random walks on rank-one symmetric spaces."""

from .geometry import CATALOG, SpaceParams, parse_space, space_params
from .heat import Psi, psi
from .laws import RadialLaw, asymptotic_t, char_fn, default_bump, make_bump, scale_law, variance
from .spherical import phi
from .transform import calibrate_constants, forward_transform, inverse_transform
from .walk import llt_error, walk_density, walk_report

__all__ = [
    "CATALOG", "SpaceParams", "parse_space", "space_params", "Psi", "psi", "RadialLaw",
    "asymptotic_t", "char_fn", "default_bump", "make_bump", "scale_law", "variance", "phi",
    "calibrate_constants", "forward_transform", "inverse_transform", "llt_error",
    "walk_density", "walk_report",
]
