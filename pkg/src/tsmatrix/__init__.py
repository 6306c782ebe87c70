"""Matrix dynamic equations on time scales: calculus, solvers and sampled uniqueness certificates."""
from .certifier import CertificateReport, CheckRecord, DomainSet, Problem, certify
from .curves import MatrixCurve, MatrixField
from .errors import (CommutationError, ConfigError, ConvergenceError, DimensionError, DomainError,
                     ExpressionDomainError, ExpressionError, RegressivityError, SolverError, TsMatrixError)
from .matrixops import DEFAULT_TOL, Tolerances, Verdict
from .solver import Trajectory, multiplicity_probe, residual_check, solve_explicit, solve_linear_sigma, solve_sigma
from .timescale import GridSpec, TimeGrid, TimeScale, delta_derivative, delta_integral
from .tsexp import exp_commuting, exp_identity_suite, exp_ode

__version__ = "0.1.0"
