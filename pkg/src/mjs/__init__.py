"""Numerical toolkit for minimal multiple-junction surfaces in R^3.

Sheets are parametric patches glued along a junction curve. The package
builds catalog configurations, evaluates the stability quadratic form under
the compatible condition, produces instability certificates and checks the
L^p curvature estimates with explicit test functions.
"""
from .catalog import (
    CatalogSpec,
    FourierCurve,
    bjorling_extend,
    make_catenoid_band,
    make_catenoid_half,
    make_flat_y,
    make_plane,
    make_y_bent_helicoid,
    make_y_catenoid,
)
from .errors import MJSError
from .fields import JunctionScalarField, compatibility_solve, cutoff_rho, field_from_vector
from .geometry import ParametricPatch, evaluate_frame, integrate_patch, shape_quantities
from .junction import JunctionCurve, MultiJunctionSurface, conormal, minimality_residual
from .lp import LpParams, build_ssy_test_function, lp_sides, white_inequality_check
from .stability import BasisSpec, VariationField, minimize_rayleigh, stability_form

__version__ = "0.1.0"
