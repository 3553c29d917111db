"""
Solvers and benchmarks for stationary dynamic discrete choice models
with extreme-value shocks: VFI and Newton-Kantorovich on both the
integrated value function (W) and the expected value stack (EV), with
timing evidence that Newton on W is the cheaper path.
"""

from .core import (
    ModelSpec,
    ValidationReport,
    load_model,
    logsumexp,
    save_model,
    validate_model,
)
from .operators import (
    bellman_ev,
    bellman_w,
    ccp_from_ev,
    ccp_from_w,
    dbellman_ev,
    dbellman_w,
    ev_from_w,
    w_from_ev,
)
from .models import (
    BusEvDiagnostics,
    BusModelConfig,
    StorableGoodsConfig,
    build_bus_model,
    build_storable_goods_model,
    bus_ev2_diagnostics,
    is_bus_like,
)
from .solvers import (
    ContractionRatio,
    FixedCount,
    NumericError,
    SolveOptions,
    SolveResult,
    SolveTrace,
    TraceRow,
    newton_step_ev,
    newton_step_reduced,
    newton_step_w,
    newton_system_ev,
    newton_system_w,
    poly_solve,
    solve_reduced_bus,
    vfi,
)
from .mpec import ConstraintSystem, SystemComparison, build_constraints, compare_systems
from .bench import BenchReport, BenchRow, bench_newton, trace_convergence

__version__ = "0.1.0"

__all__ = [
    "BenchReport",
    "BenchRow",
    "BusEvDiagnostics",
    "BusModelConfig",
    "ConstraintSystem",
    "ContractionRatio",
    "FixedCount",
    "ModelSpec",
    "NumericError",
    "SolveOptions",
    "SolveResult",
    "SolveTrace",
    "StorableGoodsConfig",
    "SystemComparison",
    "TraceRow",
    "ValidationReport",
    "bellman_ev",
    "bellman_w",
    "bench_newton",
    "build_bus_model",
    "build_constraints",
    "build_storable_goods_model",
    "bus_ev2_diagnostics",
    "ccp_from_ev",
    "ccp_from_w",
    "compare_systems",
    "dbellman_ev",
    "dbellman_w",
    "ev_from_w",
    "is_bus_like",
    "load_model",
    "logsumexp",
    "newton_step_ev",
    "newton_step_reduced",
    "newton_step_w",
    "newton_system_ev",
    "newton_system_w",
    "poly_solve",
    "save_model",
    "solve_reduced_bus",
    "trace_convergence",
    "validate_model",
    "vfi",
    "w_from_ev",
]
