"""Orthogonal greedy approximation over coherent dictionaries, with an audit harness
that checks each run against exact best m-term approximation."""

from .analysis import (
    CheckResult,
    LebesgueReport,
    check_final_state,
    check_lemma_suite,
    classify,
    diagnostics,
    in_regime,
    lebesgue_report,
    regime_ceiling,
)
from .dictionary import (
    Dictionary,
    DictionaryError,
    build_dictionary,
    coherence,
    gen_identity_hadamard,
    gen_orthonormal,
    gen_random_spherical,
    load_dictionary,
    save_dictionary,
    subdictionary,
)
from .estimators import BestMTermRegressor, OrthogonalGreedyRegressor
from .experiment import InstanceSpec, audit, run_sweep
from .linalg import ProjectionError, project_onto_span
from .oga import OgaTrace, run_oga, write_trace_csv
from .oracle import OracleBudgetError, ReferenceDecomposition, best_m_term, plant_instance

__version__ = "0.1.0"

__all__ = [
    "BestMTermRegressor",
    "CheckResult",
    "Dictionary",
    "DictionaryError",
    "InstanceSpec",
    "LebesgueReport",
    "OgaTrace",
    "OracleBudgetError",
    "OrthogonalGreedyRegressor",
    "ProjectionError",
    "ReferenceDecomposition",
    "audit",
    "best_m_term",
    "build_dictionary",
    "check_final_state",
    "check_lemma_suite",
    "classify",
    "coherence",
    "diagnostics",
    "gen_identity_hadamard",
    "gen_orthonormal",
    "gen_random_spherical",
    "in_regime",
    "lebesgue_report",
    "load_dictionary",
    "plant_instance",
    "project_onto_span",
    "regime_ceiling",
    "run_oga",
    "run_sweep",
    "save_dictionary",
    "subdictionary",
    "write_trace_csv",
]
