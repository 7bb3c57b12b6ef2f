"""Ramified holomorphic coverings of the closed upper half-plane and the
closed unit disc by a disc and by an annulus: generalized Blaschke products
built from theta-function quotients, with numerical verification of the
divisor constraints, lattice conditions, reciprocity laws and covering
properties."""

from .covering import (CoveringMap, EtaDifferential, POINT_AT_INFINITY,
                       blaschke_cover, disc_cover, eta_h, eval_classical,
                       eval_disc_cover, eval_eta, eval_halfplane_cover,
                       evaluate, evaluate_many, halfplane_cover, is_infinity,
                       mobius_l, mobius_l_inv, normalize_eta, rational_cover,
                       rational_to_blaschke, ring_to_strip, strip_to_ring)
from .divisor import (BlaschkeDivisor, ClassicalDivisor, DiscDivisor,
                      HalfPlaneDivisor, LatticeReport, SurfaceSpec, annulus,
                      annulus_from_radius, complete_divisor, disc,
                      random_divisor, validate_blaschke, validate_classical,
                      validate_disc, validate_halfplane)
from .errors import (CompletionError, ConstructionError, ContourError,
                     CoverError, GenerationError, InvalidArgumentError,
                     PoleProximityError, QuadratureError, RootFindingError)
from .theta import (ReducedArgument, ThetaParams, reduce_argument, theta1,
                    theta1_logderiv)
from .verify import (CheckResult, Contour, VerificationReport, boundary_check,
                     check_reciprocity_case_i, check_reciprocity_case_ii,
                     circle_contour, fundamental_periods, oval_contour,
                     period_integral, preimage_count, single_valuedness_check,
                     winding_number)

__version__ = "0.1.0"
