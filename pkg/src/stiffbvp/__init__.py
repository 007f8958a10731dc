"""Stiff two-point BVP solver with swap/flip variable transformations.

The trapezoidal scheme on an evolving mesh, where each interval may be
rewritten in transformed variables: a "swap" exchanges one dependent
variable with the independent one, a "flip" replaces a dependent variable
by its reciprocal.  Suitable transformation assignments suppress the
stiffness of boundary-layer problems such as Troesch's equation.
"""

from .backend import DEFAULT_BACKEND, FLOAT64, LONGDOUBLE, ScalarBackend
from .bench import (ContinuationOracle, SrnConfig, SrnResult, StopCriterion,
                    endpoint_derivatives, error_curve, export_solution,
                    import_solution, run_continuation, solve_spec,
                    uniform_mesh, write_error_curve, write_srn_result)
from .errors import (ColdStartFailure, ConfigError, DomainError,
                     EvaluationError, MeshError, NonConvergence,
                     NonStationaryBoundary, RefinementError,
                     SingularLinearSystem, SingularStepError, StiffBvpError,
                     StrategyError)
from .mesh import (EvolvingMesh, Knot, RefinementConfig, init_linear,
                   normalize, refine)
from .ode_system import (BoundaryConditions, OdeSystem, eval_jacobian,
                         eval_rhs, eval_rhs_batch, fd_jacobian,
                         from_second_order)
from .problems import (ProblemSpec, ReferenceTable, export_reference,
                       linear_verification, problem_by_name, reference_lookup,
                       troesch)
from .strategy import (AutoStrategy, GrowthZoneStrategy, IdentityStrategy,
                       SteepGrowthZoneStrategy, StiffnessConfig,
                       TransformStrategy, select_flips, select_swap_index,
                       stiffness_measure, strategy_by_name)
from .transform import (IDENTITY, NaturalState, Transform, apply, flip_system,
                        map_state, swap_system, unmap_state)
from .trapezoid import (BlockJacobian, NewtonConfig, SegmentedProblem,
                        Solution, assemble_jacobian, assemble_residual,
                        newton_solve, solve_linear_block)

__version__ = "0.1.0"
