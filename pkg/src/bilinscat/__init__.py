"""Conjugation-free (bilinear) non-Hermitian scattering in one dimension."""
from .dynamics import (Contour, FieldPair, StationaryField, current, current_constancy,
                       density_profile, evolve, solve_stationary)
from .errors import (DimensionMismatch, ExpressionSyntaxError, LinearSolveFailure,
                     NonAnalyticAtComplexPoint, NonFiniteState, SingularMatrix,
                     SpectralSingularity, UnknownIdentifier)
from .expression import parse_expression
from .linalg import Block2Matrix, block_mul, invert
from .potential import (AnalyticSegment, ConstantSegment, DeltaSpike, PhysicalParams,
                        PotentialSpec, evaluate, transpose_potential)
from .scattering import (coefficients, find_singularities, s_from_reduced, scan, scatter)
from .transfer import (EnergyPoint, assemble_transfer, constant_segment_transfer,
                       delta_transfer, energy_point, ode_transfer, reduce)

__version__ = "0.1.0"
