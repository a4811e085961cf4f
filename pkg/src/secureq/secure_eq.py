"""Secure equilibria with a prescribed payoff profile.

For a constraint v with winners W and losers L, the states where a secure
equilibrium with payoff v starts are computed in two steps:

1. ``A_v``: for every player i, the other players jointly force the
   deviation guard of i (:func:`deviation_guard`), so that no deviation of
   i can produce a profile i prefers to v.
2. Inside the sub-arena on ``A_v``, the states from which some play keeps
   every winner winning and every loser losing.

:func:`build_witness` turns a positive answer into an executable strategy
profile: all players follow a cooperation lasso and, once some player
leaves it, the others switch for good to a strategy that retaliates
against that player.
"""
from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field

from .arena import GameArena, Lasso, restrict, trim_dead_ends
from .errors import NoWitness, PlayerOutOfRange, SolverError, UnknownState
from .objectives import And, Not, Or
from .zero_sum import (
    DEFAULT_BUDGET,
    Region,
    coalition_region,
    coalition_strategy,
    cooperative_lasso,
    solve_cooperative,
)

__all__ = [
    "Constraint",
    "MooreStrategy",
    "StrategyProfile",
    "prefers",
    "outcome",
    "payoff",
    "deviation_guard",
    "conforming_objective",
    "guard_regions",
    "compute_a_v",
    "compute_se_v",
    "decide_constrained_se",
    "build_witness",
]


@dataclass(frozen=True)
class Constraint:
    """Required payoff profile; ``bits[i-1]`` is 1 when player i must win."""

    bits: tuple

    def __post_init__(self):
        bits = tuple(int(b) for b in self.bits)
        if not bits or any(b not in (0, 1) for b in bits):
            raise ValueError(f"constraint must be a nonempty 0/1 vector, got {self.bits!r}")
        object.__setattr__(self, "bits", bits)

    @classmethod
    def parse(cls, text: str) -> Constraint:
        text = text.strip()
        if not text or set(text) - {"0", "1"}:
            raise ValueError(f"constraint must be a bitstring like 101, got {text!r}")
        return cls(tuple(int(c) for c in text))

    @property
    def n(self) -> int:
        return len(self.bits)

    @property
    def winners(self) -> frozenset:
        return frozenset(i + 1 for i, b in enumerate(self.bits) if b)

    @property
    def losers(self) -> frozenset:
        return frozenset(i + 1 for i, b in enumerate(self.bits) if not b)

    def __str__(self):
        return "".join(map(str, self.bits))


def _as_constraint(v) -> Constraint:
    if isinstance(v, Constraint):
        return v
    if isinstance(v, str):
        return Constraint.parse(v)
    return Constraint(tuple(v))


@dataclass(frozen=True)
class MooreStrategy:
    """Finite-memory strategy given by explicit tables.

    The memory is updated on every state of the play, whoever owns it:
    after reading the first state ``s`` it is ``update(initial, s)``.  The
    move at a state of ``player`` is ``move(memory, state)``, where
    ``memory`` already accounts for ``state``.
    """

    player: int
    memory: tuple
    initial: object
    transitions: dict
    moves: dict

    def update(self, memory, state):
        return self.transitions[(memory, state)]

    def move(self, memory, state):
        return self.moves[(memory, state)]

    @classmethod
    def tabulate(cls, arena: GameArena, player: int, initial, update, move) -> MooreStrategy:
        """Explicit tables for the memory reachable from ``initial``."""
        order = [initial]
        seen = {initial}
        transitions = {}
        moves = {}
        queue = deque(order)
        while queue:
            m = queue.popleft()
            for s, o in zip(arena.states, arena.owner):
                m2 = update(m, s)
                transitions[(m, s)] = m2
                if m2 not in seen:
                    seen.add(m2)
                    order.append(m2)
                    queue.append(m2)
                if o == player and m != initial:
                    moves[(m, s)] = move(m, s)
        return cls(player, tuple(order), initial, transitions, moves)

    def minimize(self, states) -> MooreStrategy:
        """Merge memory elements that no sequence of states can tell apart."""
        states = list(states)
        block = {m: 0 for m in self.memory}
        while True:
            signature = {
                m: (
                    block[m],
                    tuple(self.moves.get((m, t)) for t in states),
                    tuple(block[self.transitions[(m, t)]] for t in states),
                )
                for m in self.memory
            }
            ids = {}
            for m in self.memory:
                ids.setdefault(signature[m], len(ids))
            refined = {m: ids[signature[m]] for m in self.memory}
            if len(ids) == len(set(block.values())):
                break
            block = refined
        rep = {}
        for m in self.memory:
            rep.setdefault(block[m], m)
        keep = tuple(rep[block[m]] for m in self.memory if rep[block[m]] == m)
        transitions = {(m, t): rep[block[self.transitions[(m, t)]]] for m in keep for t in states}
        moves = {(m, t): u for (m, t), u in self.moves.items() if m in keep}
        return MooreStrategy(self.player, keep, rep[block[self.initial]], transitions, moves)


@dataclass(frozen=True)
class StrategyProfile:
    """One Moore strategy per player, ``strategies[i-1]`` for player i."""

    strategies: tuple
    metadata: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "strategies", tuple(self.strategies))
        for k, st in enumerate(self.strategies, start=1):
            if st.player != k:
                raise PlayerOutOfRange(st.player, len(self.strategies))

    def __len__(self):
        return len(self.strategies)

    def __getitem__(self, player: int) -> MooreStrategy:
        if not 1 <= player <= len(self.strategies):
            raise PlayerOutOfRange(player, len(self.strategies))
        return self.strategies[player - 1]

    def replace(self, strategy: MooreStrategy) -> StrategyProfile:
        """The profile with ``strategy`` substituted for its player's."""
        out = list(self.strategies)
        out[strategy.player - 1] = strategy
        return StrategyProfile(tuple(out), self.metadata)


def prefers(i: int, v, w) -> bool:
    """Whether player ``i`` strictly prefers payoff profile ``w`` over ``v``."""
    if len(v) != len(w):
        raise ValueError("payoff profiles differ in length")
    k = i - 1
    if v[k] < w[k]:
        return True
    return (
        v[k] == w[k]
        and all(a >= b for a, b in zip(v, w))
        and any(a > b for a, b in zip(v, w))
    )


def outcome(a: GameArena, profile: StrategyProfile, s) -> Lasso:
    """The unique play from ``s`` when every player follows ``profile``."""
    a.idx(s)
    strategies = profile.strategies
    mems = tuple(st.update(st.initial, s) for st in strategies)
    seen = {}
    seq = []
    cur = s
    while (cur, mems) not in seen:
        seen[(cur, mems)] = len(seq)
        seq.append(cur)
        owner = a.owner_of(cur)
        nxt = strategies[owner - 1].move(mems[owner - 1], cur)
        if a.idx(nxt) not in a.succ[a.idx(cur)]:
            raise SolverError(f"player {owner} moves along missing edge ({cur!r}, {nxt!r})")
        mems = tuple(st.update(m, nxt) for st, m in zip(strategies, mems))
        cur = nxt
    k = seen[(cur, mems)]
    return Lasso(seq[:k], seq[k:])


def payoff(lasso: Lasso, objectives) -> tuple:
    """Payoff profile of a play: bit i is 1 iff the play is in objective i."""
    if not objectives:
        raise PlayerOutOfRange(0)
    inf = lasso.inf
    return tuple(int(o.holds(inf)) for o in objectives)


def _winner_side(objectives, v: Constraint):
    phi_w = And(tuple(objectives[i - 1] for i in sorted(v.winners)))
    phi_l = Or(tuple(objectives[i - 1] for i in sorted(v.losers)))
    return phi_w, phi_l


def deviation_guard(objectives, v, i: int):
    """Objective the other players must force so that i cannot profit.

    For a winner i: phi_W | phi_L | !phi_i.  For a loser i:
    (phi_W | phi_L) & !phi_i.  phi_W intersects the winners' objectives
    (all plays when there are none); phi_L unites the losers' (no play when
    there are none).
    """
    v = _as_constraint(v)
    if len(objectives) != v.n:
        raise ValueError("constraint length differs from the number of objectives")
    if not 1 <= i <= v.n:
        raise PlayerOutOfRange(i, v.n)
    phi_w, phi_l = _winner_side(objectives, v)
    mine = objectives[i - 1]
    if i in v.winners:
        parts = (phi_w, phi_l, Not(mine)) if v.losers else (phi_w, Not(mine))
        return Or(parts)
    if not v.winners:
        return Not(mine)
    return And((Or((phi_w, phi_l)), Not(mine)))


def conforming_objective(objectives, v):
    """Plays with payoff exactly v: phi_W & !phi_L."""
    v = _as_constraint(v)
    phi_w, phi_l = _winner_side(objectives, v)
    return And((phi_w, Not(phi_l)))


def _check(a: GameArena, objectives, v: Constraint):
    if len(objectives) != a.n or v.n != a.n:
        raise ValueError(
            f"arena has {a.n} players, got {len(objectives)} objectives and a constraint of length {v.n}"
        )


def guard_regions(a: GameArena, objectives, v, budget: int = DEFAULT_BUDGET) -> dict:
    """player i -> <<I minus i>>(deviation_guard(i))."""
    v = _as_constraint(v)
    _check(a, objectives, v)
    everyone = frozenset(range(1, a.n + 1))
    return {
        i: coalition_region(a, everyone - {i}, deviation_guard(objectives, v, i), budget=budget)
        for i in range(1, a.n + 1)
    }


def compute_a_v(a: GameArena, objectives, v, budget: int = DEFAULT_BUDGET) -> Region:
    """States from which every player can be kept from a preferred profile."""
    regions = guard_regions(a, objectives, v, budget)
    members = frozenset(a.states).intersection(*regions.values())
    return Region(members, "A_v")


def compute_se_v(a: GameArena, objectives, v, budget: int = DEFAULT_BUDGET,
                 a_v: Region | None = None) -> Region:
    """States at which some secure equilibrium yields payoff profile v."""
    v = _as_constraint(v)
    if a_v is None:
        a_v = compute_a_v(a, objectives, v, budget)
    core = trim_dead_ends(a, a_v)
    if not core:
        return Region((), "SE_v")
    sub = restrict(a, core)
    win = solve_cooperative(sub, conforming_objective(objectives, v), budget)
    return Region(win, "SE_v")


def decide_constrained_se(a: GameArena, objectives, s, v, budget: int = DEFAULT_BUDGET) -> bool:
    """Is there a secure equilibrium at ``s`` with payoff profile v?"""
    if s not in a:
        raise UnknownState(s)
    return s in compute_se_v(a, objectives, v, budget)


# ---------------------------------------------------------------------------
# Witness synthesis


def _memory_label(m) -> str:
    kind = m[0]
    if kind == "coop":
        return f"coop:{m[1]}"
    if kind == "pun":
        record = ".".join(map(str, m[3]))
        return f"pun:{m[1]}:{m[2]}:{record}:{m[4]}"
    return kind


def build_witness(a: GameArena, objectives, s, v, budget: int = DEFAULT_BUDGET) -> StrategyProfile:
    """A secure equilibrium at ``s`` with payoff v, as Moore strategies.

    Memory elements (shared by all players, each keeps its own copy):

    * ``start`` -- nothing read yet;
    * ``coop:k`` -- the play is at position k of the cooperation lasso;
    * ``pun:i:mode:...`` -- player i left the lasso; the others play their
      retaliation strategy against i, whose memory follows.  Mode
      ``strict`` makes a winning deviator lose outright, used where the
      others can force that; mode ``guard`` only enforces the deviation
      guard;
    * ``free`` -- the play did not start at ``s`` (outside the contract).
    """
    v = _as_constraint(v)
    _check(a, objectives, v)
    if s not in a:
        raise UnknownState(s)
    a_v = compute_a_v(a, objectives, v, budget)
    core = trim_dead_ends(a, a_v)
    if s not in core:
        raise NoWitness(f"no secure equilibrium with payoff {v} at {s!r}")
    sub = restrict(a, core)
    lasso = cooperative_lasso(sub, conforming_objective(objectives, v), s, budget)
    if lasso is None:
        raise NoWitness(f"no secure equilibrium with payoff {v} at {s!r}")

    everyone = frozenset(range(1, a.n + 1))
    retaliation = {}
    strict = {}
    for i in range(1, a.n + 1):
        region, strat = coalition_strategy(a, everyone - {i}, deviation_guard(objectives, v, i), budget)
        if not a_v <= region:
            raise SolverError(f"retaliation against player {i} does not cover A_v")
        retaliation[i, "guard"] = strat
        if i in v.winners:
            # losing is never preferred by a winner, so this also enforces the guard
            region, strat = coalition_strategy(a, everyone - {i}, Not(objectives[i - 1]), budget)
            strict[i] = region
            retaliation[i, "strict"] = strat

    seq = list(lasso.stem) + list(lasso.cycle)
    loop_at = len(lasso.stem)

    def nxt(k):
        return k + 1 if k + 1 < len(seq) else loop_at

    def update(m, t):
        kind = m[0]
        if kind == "start":
            return ("coop", 0) if t == s else ("free",)
        if kind == "coop":
            k = m[1]
            if t == seq[nxt(k)]:
                return ("coop", nxt(k))
            i = a.owner_of(seq[k])
            mode = "strict" if t in strict.get(i, ()) else "guard"
            r = retaliation[i, mode]
            return ("pun", i, mode) + r.update(r.initial, t)
        if kind == "pun":
            r = retaliation[m[1], m[2]]
            return m[:3] + r.update(m[3:], t)
        return m

    def move(m, t):
        kind = m[0]
        if kind == "coop" and seq[m[1]] == t:
            return seq[nxt(m[1])]
        if kind == "pun" and a.owner_of(t) != m[1]:
            return retaliation[m[1], m[2]].move(m[3:], t)
        return a.states[a.succ[a.idx(t)][0]]

    first = MooreStrategy.tabulate(a, 1, ("start",), update, move)
    labels = {m: _memory_label(m) for m in first.memory}
    strategies = []
    for j in range(1, a.n + 1):
        moves = {
            (labels[m], t): move(m, t)
            for m in first.memory
            if m != ("start",)
            for t, o in zip(a.states, a.owner)
            if o == j
        }
        transitions = {(labels[m], t): labels[m2] for (m, t), m2 in first.transitions.items()}
        machine = MooreStrategy(j, tuple(labels[m] for m in first.memory), "start", transitions, moves)
        strategies.append(machine.minimize(a.states))
    metadata = {
        "state": s,
        "constraint": str(v),
        "cooperation_lasso": {"stem": list(lasso.stem), "cycle": list(lasso.cycle)},
        "retaliation_memory": {f"{i}:{mode}": r.memory_size() for (i, mode), r in retaliation.items()},
        "A_v": a.sort(a_v),
    }
    return StrategyProfile(tuple(strategies), metadata)
