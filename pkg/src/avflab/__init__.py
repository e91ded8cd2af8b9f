"""Energy-preserving and energy-dissipating time integration of semi-discrete PDEs
with the average vector field (AVF) method."""
from .avf import AveragedFieldPlan, averaged_field, avf_step, make_plan, trig_difference_quotient
from .diagnostics import (
    EnergyDrift,
    UnreliableEstimate,
    energy_drift,
    global_error,
    monotonicity_verdict,
    observed_order,
)
from .integrators import backward_euler_step, integrate, midpoint_step, reference_solution
from .operators import FdKind, curl_matrix_3d, fd_operator, gll_basis, spectral_derivative_operator
from .solve import ImplicitSolveConfig, NonConvergence, SingularJacobian, implicit_solve
from .system import (
    ContractViolation,
    EnergyMonitor,
    SemiDiscreteSystem,
    StateLayout,
    StructureClass,
    StructureOperator,
    check_structure,
    energy_and_gradient,
    eval_vector_field,
)
from .trajectory import Trajectory
from .zoo import PROBLEMS, ProblemSpec, build_problem, default_spec, initial_condition

__version__ = "0.1.0"
