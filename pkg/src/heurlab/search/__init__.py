"""Instance-search baselines: annealed local search and program evolution."""

from .adapters import (
    binpack_problem,
    clustering_problem,
    gasoline_problem,
    knapsack_problem,
)
from .database import DbEntry, ProgramDatabase
from .dsl import (
    DSL_VERSION,
    DslEvalError,
    DslParseError,
    DslProgram,
    dsl_eval,
)
from .evolve import EvolveLogRecord, EvolveResult, build_prompt, evolve
from .local import (
    LocalSearchConfig,
    LocalSearchResult,
    SearchProblem,
    local_search,
)
from .providers import HttpProvider, MockProvider, Provider, ProviderConfig

__all__ = [
    "DSL_VERSION",
    "DbEntry",
    "DslEvalError",
    "DslParseError",
    "DslProgram",
    "EvolveLogRecord",
    "EvolveResult",
    "HttpProvider",
    "LocalSearchConfig",
    "LocalSearchResult",
    "MockProvider",
    "ProgramDatabase",
    "Provider",
    "ProviderConfig",
    "SearchProblem",
    "binpack_problem",
    "build_prompt",
    "clustering_problem",
    "dsl_eval",
    "evolve",
    "gasoline_problem",
    "knapsack_problem",
    "local_search",
]
