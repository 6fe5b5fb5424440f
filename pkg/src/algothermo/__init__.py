"""Similarity as thermodynamic work on a toy regular universal machine."""
from .automaton import (
    DegeneracySpectrum,
    GrowthRate,
    Marker,
    WrapperAutomaton,
    build_automaton,
    count_avoiding,
    effective_degeneracy,
    growth_rate,
    sample_wrapper,
    wrapper_count,
)
from .ensemble import (
    HARD,
    LN2,
    CutoffPartition,
    EnsembleParams,
    WorkDecomposition,
    coupled_partition,
    free_energy,
    generalized_force,
    high_temp_decomposition,
    information_distance,
    kraft_sum,
    partition_function,
    reversible_work_direct,
    reversible_work_TI,
    soft_constraint_gap,
    solomonoff_weight,
    udt_pair_count,
)
from .exceptions import ConfigError, DomainError, ParseError, TableBoundError, UnsatisfiableError
from .jarzynski import Protocol, WorkEstimate, build_state_space, estimate
from .machine import (
    ObjectSet,
    ParsedProgram,
    ProgramTable,
    Universe,
    decode_core,
    encode_core,
    enumerate_cores,
    execute,
    ground_length,
    multiplicity_spectrum,
    parse_program,
)

__version__ = "0.1.0"

__all__ = [
    "build_automaton",
    "build_state_space",
    "ConfigError",
    "count_avoiding",
    "coupled_partition",
    "CutoffPartition",
    "decode_core",
    "DegeneracySpectrum",
    "DomainError",
    "effective_degeneracy",
    "encode_core",
    "EnsembleParams",
    "enumerate_cores",
    "estimate",
    "execute",
    "free_energy",
    "generalized_force",
    "ground_length",
    "growth_rate",
    "GrowthRate",
    "HARD",
    "high_temp_decomposition",
    "information_distance",
    "kraft_sum",
    "LN2",
    "Marker",
    "multiplicity_spectrum",
    "ObjectSet",
    "parse_program",
    "ParsedProgram",
    "ParseError",
    "partition_function",
    "ProgramTable",
    "Protocol",
    "reversible_work_direct",
    "reversible_work_TI",
    "sample_wrapper",
    "soft_constraint_gap",
    "solomonoff_weight",
    "TableBoundError",
    "ThermodynamicSimilarity",
    "udt_pair_count",
    "Universe",
    "UnsatisfiableError",
    "WorkDecomposition",
    "WorkEstimate",
    "wrapper_count",
    "WrapperAutomaton",
]


def __getattr__(name):
    # scikit-learn is only imported when the estimator front end is used
    if name == "ThermodynamicSimilarity":
        from .estimators import ThermodynamicSimilarity

        return ThermodynamicSimilarity
    raise AttributeError(f"module {__name__!r} has no attribute {name!r}")
