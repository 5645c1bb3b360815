"""IK solvers sharing one request/result contract.

Every ``*_solve`` function takes a :class:`SolveRequest` and returns a
:class:`SolveResult`; every ``*Solver`` class wraps one of them behind the
scikit-learn estimator interface.
"""
from .analytical import OutOfReachError, analytical_ik, analytical_solve, ik_fixed_ankle
from .base import GAParams, IKSolver, SolveRequest, SolveResult, SolverOptions, start_posture
from .ccd import CCDSolver, ccd_solve
from .genetic import GeneticIKSolver, mooga_solve
from .lmdls import LMDLSSolver, damping_factors, lmdls_solve, lmdls_step
from .mppi import MPPISolver, SingularJacobianError, mppi_solve, mppi_step, pseudo_inverse
from .optimization import BarrierIKSolver, barrier_gradient, barrier_objective, optimize_ik_solve

SOLVERS = {
    "ccd": ccd_solve,
    "mppi": mppi_solve,
    "lmdls": lmdls_solve,
    "opt": optimize_ik_solve,
    "mooga": mooga_solve,
}

ESTIMATORS = {
    "ccd": CCDSolver,
    "mppi": MPPISolver,
    "lmdls": LMDLSSolver,
    "opt": BarrierIKSolver,
    "mooga": GeneticIKSolver,
}

__all__ = [
    "OutOfReachError", "analytical_ik", "analytical_solve", "ik_fixed_ankle",
    "GAParams", "IKSolver", "SolveRequest", "SolveResult", "SolverOptions", "start_posture",
    "CCDSolver", "ccd_solve", "GeneticIKSolver", "mooga_solve",
    "LMDLSSolver", "damping_factors", "lmdls_solve", "lmdls_step",
    "MPPISolver", "SingularJacobianError", "mppi_solve", "mppi_step", "pseudo_inverse",
    "BarrierIKSolver", "barrier_gradient", "barrier_objective", "optimize_ik_solve",
    "SOLVERS", "ESTIMATORS",
]
