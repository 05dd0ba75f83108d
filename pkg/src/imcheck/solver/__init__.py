from .client import (
    DEFAULT_CMD,
    ContractViolation,
    InterpolationUnsupported,
    NotUnsat,
    SatResult,
    SolverClient,
    SolverConfig,
    SolverCrash,
    SolverError,
    SolverTimeout,
    Status,
)
