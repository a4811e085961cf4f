"""Secure equilibria in multi-player games on graphs."""
from .arena import GameArena, Lasso, restrict, successors, trim_dead_ends, validate_arena
from .objectives import (
    ALL_PLAYS,
    NO_PLAY,
    And,
    Buchi,
    CoBuchi,
    Muller,
    Not,
    Or,
    Parity,
    Rabin,
    Streett,
    negate,
    satisfies,
    streett_encoding,
    rabin_encoding,
    to_muller,
)
from .secure_eq import (
    Constraint,
    MooreStrategy,
    StrategyProfile,
    build_witness,
    compute_a_v,
    compute_se_v,
    decide_constrained_se,
    deviation_guard,
    outcome,
    payoff,
    prefers,
)
from .zero_sum import (
    CoalitionGame,
    Region,
    attractor,
    coalition_region,
    coalition_strategy,
    cooperative_lasso,
    solve_cooperative,
    solve_muller,
    solve_parity,
)

__version__ = "0.1.0"
