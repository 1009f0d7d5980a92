"""Numerical workbench for Orlicz spaces.

Modulars, Luxemburg and Orlicz norms, conjugate N-functions, modular lower
bounds from growth minorants, and discretized Hammerstein equations.
"""
from ._core import backend_name
from .measure import MeasureSpace, coupling, indicator, l2_norm, refine, truncate_below
from .modular import (
    char_norms,
    check_relations,
    embedding_constant,
    luxemburg_norm,
    modular,
    orlicz_norm,
)
from .nfunction import (
    NFunction,
    NFunctionSpec,
    entropy_like,
    exp_minus_linear,
    exp_square,
    nsum,
    power,
    power_log,
)

__version__ = "0.1.0"
