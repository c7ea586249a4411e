"""Mahler measures of Laurent polynomials, Boyd heights of torus homomorphisms
and numerical Boyd-Lawton limits."""
from .laurent import (GaussQ, LaurentPoly, PolySyntaxError, evaluate, format_poly, is_zero,
                      multiply, parse, strip_monomial, substitute)
from .torushom import (BoydHeight, MatrixFormatError, SignSplit, TorusHom, apply, base_b_family,
                       boyd_height, compose, integer_rank, is_surjective, parse_matrix, sign_split)
from .measures import (CLASSIC, MeasureError, MeasureEstimate, MeasureKind, QmcConfig,
                       ZeroSubstitutionError, boyd_lawton_estimate, circle_measure, mahler1_exact,
                       measure, torus_qmc)
from .roots import RootFindingError, find_roots
from .experiments import (ConvergenceError, ConvergenceRecord, ExperimentSpec, MatrixFamily,
                          VectorFamily, identity_suite, matrix_convergence, property_suite,
                          run_convergence, zeta)
from . import kernels

__version__ = "0.1.0"
