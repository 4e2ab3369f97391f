"""Complex eikonal solutions generated by twistor functions.

Class I solutions come from one function ``S(G, B0, B1)`` and the condition
``dS/dG = 0``; Class II solutions are built on shear-free congruences given
by a constraint ``Pi(G, B0, B1) = 0``.  Here ``G`` is the spinor ratio and
``B0 = wG + u``, ``B1 = vG + wb`` in null coordinates.
"""

__version__ = "0.1.0"

from .cauchy import InitialData, classify, evolve_class2, extract_G, trace_ray
from .class1 import (Class1Eikonal, Class1Solution, caustic_locus, caustic_residual,
                     gradient_spinors, pole_locus, solve_class1)
from .class2 import (CongruenceJet, KerrCongruence, Class2Solution, build_eikonal,
                     congruence_potentials, sfc_residual, singular_locus, solve_class2)
from .core import (DualTwistor, Event, NullCoords, NullTwistor, PrimedSpinor, RayDirection,
                   UnprimedSpinor, ambitwistor_pairing, dual_incidence, incidence,
                   ray_direction, to_null_coords)
from .dsl import GenFun, parse
from .fields import EMSpinor, FluxResult, charge, em_spinor, maxwell_residual, to_vector
from .grid import Grid
from .roots import all_roots, polynomialize
from .tracking import BranchedField
from .verify import eikonal_residual, factorization_check, gauge_invariance_check

__all__ = [
    "Class1Eikonal", "Class1Solution", "Class2Solution", "CongruenceJet", "DualTwistor",
    "EMSpinor", "Event", "FluxResult", "GenFun", "Grid", "InitialData", "KerrCongruence",
    "NullCoords", "NullTwistor", "PrimedSpinor", "RayDirection", "UnprimedSpinor",
    "BranchedField", "all_roots", "ambitwistor_pairing", "build_eikonal", "caustic_locus",
    "caustic_residual", "charge", "classify", "congruence_potentials", "dual_incidence",
    "eikonal_residual", "em_spinor", "evolve_class2", "extract_G", "factorization_check",
    "gauge_invariance_check", "gradient_spinors", "incidence", "maxwell_residual", "parse",
    "pole_locus", "polynomialize", "ray_direction", "sfc_residual", "singular_locus",
    "solve_class1", "solve_class2", "to_null_coords", "to_vector", "trace_ray",
]
