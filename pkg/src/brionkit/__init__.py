"""Exact and high-precision exponential integrals and lattice sums over
rational polytopes, including functionals constant on faces."""

from .brion_engine import (
    DilationSeries,
    brion_continuous,
    brion_discrete,
    dbi,
    decomposition_check,
    degenerate_brion_continuous,
    degenerate_brion_discrete,
    degenerate_brion_discrete_v1,
    dilation_series,
)
from .euler_maclaurin import (
    MuQuery,
    degenerate_brion_discrete_v2,
    degenerate_brion_discrete_v3,
    em_reconstruct,
    levi_cone_S_holomorphy,
    mu_eval,
    pommersheim_thomas_count,
)
from .exact_linalg import InnerProduct, Lattice
from .polytope_core import Cone, Polytope
from .virtual_cone import VirtualCone, levi_cone
from .xi_structure import Xi, xi_decomposition, xi_prime

__version__ = "0.1.0"

__all__ = [
    "Cone", "DilationSeries", "InnerProduct", "Lattice", "MuQuery", "Polytope", "VirtualCone", "Xi",
    "brion_continuous", "brion_discrete", "dbi", "decomposition_check", "degenerate_brion_continuous",
    "degenerate_brion_discrete", "degenerate_brion_discrete_v1", "degenerate_brion_discrete_v2",
    "degenerate_brion_discrete_v3", "dilation_series", "em_reconstruct", "levi_cone",
    "levi_cone_S_holomorphy", "mu_eval", "pommersheim_thomas_count", "xi_decomposition", "xi_prime",
]
