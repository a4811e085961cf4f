"""Game arenas: finite directed graphs whose states are owned by players 1..n.

States are referenced by their identifiers (usually strings) at the API
surface and by dense integer indices inside the solvers.  Every state
reported back to a caller comes out in the arena's declaration order.
"""
from __future__ import annotations

from collections.abc import Hashable, Iterable, Mapping
from dataclasses import dataclass
from functools import cached_property

from .errors import (
    DanglingEdge,
    DeadEndState,
    DuplicateState,
    InvalidLasso,
    PlayerOutOfRange,
    UnknownOwner,
    UnknownState,
)

__all__ = [
    "GameArena",
    "Lasso",
    "validate_arena",
    "restrict",
    "successors",
    "trim_dead_ends",
]


@dataclass(frozen=True, eq=False)
class GameArena:
    """Validated n-player arena.

    ``owner[k]`` and ``succ[k]`` refer to the state ``states[k]``;
    successor lists hold indices, sorted ascending.
    """

    n: int
    states: tuple
    owner: tuple
    succ: tuple

    @classmethod
    def build(cls, n, states, owner, edges) -> GameArena:
        return validate_arena({"players": n, "states": states, "owner": owner, "edges": edges})

    @cached_property
    def index(self) -> dict:
        return {s: k for k, s in enumerate(self.states)}

    @cached_property
    def pred(self) -> tuple:
        pred = [[] for _ in self.states]
        for u, targets in enumerate(self.succ):
            for v in targets:
                pred[v].append(u)
        return tuple(tuple(p) for p in pred)

    @cached_property
    def edges(self) -> frozenset:
        st = self.states
        return frozenset((st[u], st[v]) for u, targets in enumerate(self.succ) for v in targets)

    def __len__(self):
        return len(self.states)

    def __contains__(self, state):
        return state in self.index

    def __eq__(self, other):
        if not isinstance(other, GameArena):
            return NotImplemented
        return (
            self.n == other.n
            and self.states == other.states
            and self.owner == other.owner
            and self.succ == other.succ
        )

    def __hash__(self):
        return hash((self.n, self.states, self.owner, self.succ))

    def __repr__(self):
        return f"GameArena(n={self.n}, states={len(self.states)}, edges={len(self.edges)})"

    def idx(self, state) -> int:
        try:
            return self.index[state]
        except KeyError:
            raise UnknownState(state) from None

    def owner_of(self, state) -> int:
        return self.owner[self.idx(state)]

    def player_states(self, player: int) -> frozenset:
        """The set S_i of states controlled by ``player``."""
        return frozenset(s for s, o in zip(self.states, self.owner) if o == player)

    def sort(self, states: Iterable) -> list:
        """Return ``states`` in declaration order."""
        return sorted(states, key=self.idx)

    def to_dict(self) -> dict:
        return {
            "players": self.n,
            "states": list(self.states),
            "owner": {s: o for s, o in zip(self.states, self.owner)},
            "edges": [[self.states[u], self.states[v]] for u, ts in enumerate(self.succ) for v in ts],
        }


def validate_arena(raw: Mapping) -> GameArena:
    """Check a candidate arena description and return a :class:`GameArena`.

    ``raw`` carries ``players`` (or ``n``), ``states``, ``owner`` (mapping
    state -> player) and ``edges`` (iterable of pairs).  Duplicate edges
    collapse; self-loops are allowed; dead ends are rejected.
    """
    n = raw.get("players", raw.get("n"))
    if not isinstance(n, int) or isinstance(n, bool) or n < 1:
        raise PlayerOutOfRange(n)
    states = tuple(raw["states"])
    index = {}
    for k, s in enumerate(states):
        if not isinstance(s, Hashable):
            raise TypeError(f"state identifier {s!r} is not hashable")
        if s in index:
            raise DuplicateState(s)
        index[s] = k
    owner_map = raw["owner"]
    for s in owner_map:
        if s not in index:
            raise UnknownState(s)
    owner = []
    for s in states:
        if s not in owner_map:
            raise UnknownOwner(s)
        o = owner_map[s]
        if not isinstance(o, int) or isinstance(o, bool) or not 1 <= o <= n:
            raise PlayerOutOfRange(o, n)
        owner.append(o)
    succ = [set() for _ in states]
    for edge in raw["edges"]:
        u, v = edge
        if u not in index or v not in index:
            raise DanglingEdge(u, v)
        succ[index[u]].add(index[v])
    for k, targets in enumerate(succ):
        if not targets:
            raise DeadEndState(states[k])
    return GameArena(n, states, tuple(owner), tuple(tuple(sorted(t)) for t in succ))


def successors(a: GameArena, state) -> frozenset:
    k = a.idx(state)
    return frozenset(a.states[v] for v in a.succ[k])


def restrict(a: GameArena, subset: Iterable) -> GameArena:
    """The sub-arena on ``subset``; raises DeadEndState if a state is stranded."""
    keep = set()
    for s in subset:
        keep.add(a.idx(s))
    order = sorted(keep)
    if not order:
        raise ValueError("cannot restrict an arena to the empty set")
    new_index = {old: new for new, old in enumerate(order)}
    succ = []
    for old in order:
        targets = tuple(new_index[v] for v in a.succ[old] if v in new_index)
        if not targets:
            raise DeadEndState(a.states[old])
        succ.append(targets)
    return GameArena(
        a.n,
        tuple(a.states[k] for k in order),
        tuple(a.owner[k] for k in order),
        tuple(succ),
    )


def trim_dead_ends(a: GameArena, subset: Iterable) -> frozenset:
    """Largest part of ``subset`` in which every state keeps a successor.

    Restricting ``a`` to the result never raises DeadEndState.
    """
    alive = {a.idx(s) for s in subset}
    count = {u: sum(1 for v in a.succ[u] if v in alive) for u in alive}
    queue = [u for u, c in count.items() if c == 0]
    while queue:
        u = queue.pop()
        if u not in alive:
            continue
        alive.discard(u)
        for p in a.pred[u]:
            if p in alive:
                count[p] -= 1
                if count[p] == 0:
                    queue.append(p)
    return frozenset(a.states[k] for k in alive)


@dataclass(frozen=True)
class Lasso:
    """The ultimately periodic play ``stem . cycle^omega``."""

    stem: tuple
    cycle: tuple

    def __post_init__(self):
        object.__setattr__(self, "stem", tuple(self.stem))
        object.__setattr__(self, "cycle", tuple(self.cycle))
        if not self.cycle:
            raise InvalidLasso("lasso cycle must be nonempty")

    @property
    def inf(self) -> frozenset:
        return frozenset(self.cycle)

    @property
    def start(self):
        return self.stem[0] if self.stem else self.cycle[0]

    def prefix(self, length: int) -> list:
        """First ``length`` states of the play."""
        out = list(self.stem[:length])
        k = 0
        while len(out) < length:
            out.append(self.cycle[k % len(self.cycle)])
            k += 1
        return out

    def rotate(self, k: int = 1) -> Lasso:
        """Same infinite-state set, cycle started ``k`` positions later."""
        k %= len(self.cycle)
        return Lasso(self.stem + self.cycle[:k], self.cycle[k:] + self.cycle[:k])

    def check(self, a: GameArena) -> Lasso:
        seq = list(self.stem) + list(self.cycle) + [self.cycle[0]]
        for u, v in zip(seq, seq[1:]):
            if a.idx(v) not in a.succ[a.idx(u)]:
                raise InvalidLasso(f"({u!r}, {v!r}) is not an edge")
        return self
