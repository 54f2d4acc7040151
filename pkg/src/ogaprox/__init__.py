"""Saddle-point optimization with optimistic gradient ascent and proximal steps."""

from .problem import (
    MissingSaddlePointError,
    ProblemConstants,
    PsiUndefinedError,
    SaddleProblem,
    ValidationReport,
    validate_problem,
)
from .qp import KktResidual, QpProblem, QpResult, QpStatus, solve_qp
from .report import MetricRecord, RunReport
from .schedule import (
    AdaptiveSchedule,
    ConstantSchedule,
    LinearSchedule,
    ScheduleKind,
    ScheduleState,
    StepSizeViolationError,
    advance_schedule,
    balanced_alpha,
    default_adaptive,
    default_constant,
    default_linear,
    make_schedule,
    theta_threshold,
)
from .solver import (
    GapCertificate,
    NonFiniteIterateError,
    RateCertificate,
    RunResult,
    SolverState,
    gap_certificate,
    rate_certificates,
    run,
    step,
)

__all__ = [
    "AdaptiveSchedule",
    "ConstantSchedule",
    "GapCertificate",
    "KktResidual",
    "LinearSchedule",
    "MetricRecord",
    "MissingSaddlePointError",
    "NonFiniteIterateError",
    "ProblemConstants",
    "PsiUndefinedError",
    "QpProblem",
    "QpResult",
    "QpStatus",
    "RateCertificate",
    "RunReport",
    "RunResult",
    "SaddleProblem",
    "ScheduleKind",
    "ScheduleState",
    "SolverState",
    "StepSizeViolationError",
    "ValidationReport",
    "advance_schedule",
    "balanced_alpha",
    "default_adaptive",
    "default_constant",
    "default_linear",
    "gap_certificate",
    "make_schedule",
    "rate_certificates",
    "run",
    "solve_qp",
    "step",
    "theta_threshold",
    "validate_problem",
]
