"""Cubical chains and cochains on regular grids: boundary operators, flat norm
and filling volume as certified linear programs, p-modulus and capacity of
chain families, discrete forms and cochain Sobolev checks, and numerical
experiments on Hölder continuity of cochains."""

from .cochains import (
    DiscreteForm,
    FormCochain,
    ScalarField,
    TupleCochain,
    ZeroCochain,
    add_cochains,
    average_translate,
    check_upper_gradient,
    check_upper_norm,
    eval_form,
    exterior_derivative,
    lip_field,
    sobolev_norm,
    translate_field,
    tuple_cochain,
    zero_cochain,
)
from .flat import fill_volume, flat_norm, fillvol_equals_flat_check, weighted_flat_norm
from .grid import Chain, GridDomain, boundary, dyadic_scale, mass, prism_fill, restrict, translate
from .modulus import Density, annuli_density, capacity_lower, capacity_upper_certificate, growth_profile, line_integral, modulus

__all__ = [
    "Chain",
    "Density",
    "DiscreteForm",
    "FormCochain",
    "GridDomain",
    "ScalarField",
    "TupleCochain",
    "ZeroCochain",
    "add_cochains",
    "annuli_density",
    "average_translate",
    "boundary",
    "capacity_lower",
    "capacity_upper_certificate",
    "check_upper_gradient",
    "check_upper_norm",
    "dyadic_scale",
    "eval_form",
    "exterior_derivative",
    "fill_volume",
    "fillvol_equals_flat_check",
    "flat_norm",
    "growth_profile",
    "line_integral",
    "lip_field",
    "mass",
    "modulus",
    "prism_fill",
    "restrict",
    "sobolev_norm",
    "translate",
    "translate_field",
    "tuple_cochain",
    "weighted_flat_norm",
    "zero_cochain",
]

__version__ = "0.1.0"
