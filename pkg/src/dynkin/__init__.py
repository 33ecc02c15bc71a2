"""Solver and certification suite for N-player nonzero-sum stopping
games on finite discrete-time scenario trees."""

from .tree import (
    AdaptedProcess,
    EnumerationCapError,
    ScenarioTree,
    StoppingTime,
    TreeError,
    canonicalize,
    count_stopping_times,
    depth_stop,
    enumerate_stopping_times,
    expect_at,
    horizon_stop,
    leq,
    min_stop,
)
from .snell import (
    SnellResult,
    is_martingale_before,
    is_supermartingale_before,
    snell_envelope,
)
from .game import (
    AssumptionError,
    AssumptionReport,
    GameError,
    GameSpec,
    best_response_process,
    cutoff_obstacle,
    end_payoff,
    payoff,
    validate_assumptions,
)
from .solver import (
    AuditViolation,
    EquilibriumCandidate,
    SolverState,
    TraceRecord,
    audit_deviation_bound,
    audit_iteration,
    default_round_bound,
    init_state,
    make_candidate,
    run,
    step,
)
from .verify import (
    NashCertificate,
    StreamlineCertificate,
    best_response,
    brute_force_best_response,
    residual_yq,
    verify_nash,
    verify_streamline,
)
from .gamefile import (
    GameFileError,
    GameParseError,
    GameStructureError,
    demo_constant,
    gen_game,
    load_game,
    load_profile,
    save_game,
    save_profile,
)
from .report import CertifiedRun, build_report, solve_and_certify

__version__ = "0.1.0"

__all__ = [
    "AdaptedProcess",
    "AssumptionError",
    "AssumptionReport",
    "AuditViolation",
    "CertifiedRun",
    "EnumerationCapError",
    "EquilibriumCandidate",
    "GameError",
    "GameFileError",
    "GameParseError",
    "GameSpec",
    "GameStructureError",
    "NashCertificate",
    "ScenarioTree",
    "SnellResult",
    "SolverState",
    "StoppingTime",
    "StreamlineCertificate",
    "TraceRecord",
    "TreeError",
    "audit_deviation_bound",
    "audit_iteration",
    "best_response",
    "best_response_process",
    "brute_force_best_response",
    "build_report",
    "canonicalize",
    "count_stopping_times",
    "cutoff_obstacle",
    "default_round_bound",
    "demo_constant",
    "depth_stop",
    "end_payoff",
    "enumerate_stopping_times",
    "expect_at",
    "gen_game",
    "horizon_stop",
    "init_state",
    "is_martingale_before",
    "is_supermartingale_before",
    "leq",
    "load_game",
    "load_profile",
    "make_candidate",
    "min_stop",
    "payoff",
    "residual_yq",
    "run",
    "save_game",
    "save_profile",
    "snell_envelope",
    "solve_and_certify",
    "step",
    "validate_assumptions",
    "verify_nash",
    "verify_streamline",
]
