"""Games with counters: arenas, finite-memory strategies, exact solvers and
the game families and transformations used to study memory trade-offs."""
from .arena import (
    ADAM,
    B_AND_PARITY,
    B_UNTIL_F,
    EPS,
    EVE,
    EXCEEDED,
    INC,
    PARITY_ONLY,
    RESET,
    Arena,
    ConditionSpec,
    CounterValuation,
    Edge,
    Play,
    apply_action,
    play_value,
    summarize,
    validate_arena,
    word_value,
)
from .machines import (
    ConfigGraph,
    MemoryStructure,
    StrategyMachine,
    evaluate_strategy_parity,
    evaluate_strategy_reachability,
    product_with_memory,
    restrict_by_strategy,
)
from .solvers import (
    NoStrategyError,
    SearchBudgetExceeded,
    SolveResult,
    SynthesisQuery,
    attractor,
    decide_bparity,
    lemma1_strategy,
    search_memory_strategy,
    solve_dag_bgame,
    solve_parity_game,
    value_search,
)

__version__ = "0.1.0"
