"""Reference procedures used to cross-check the solvers.

Everything here favours directness over speed: explicit products,
exhaustive enumeration of bounded-memory strategies and of strongly
connected state sets.  The brute-force searches refuse arenas with more
than :data:`MAX_STATES` states or memory bounds above :data:`MAX_MEMORY`.
"""
from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from itertools import combinations, product

from .arena import GameArena, Lasso, restrict, trim_dead_ends
from .errors import BudgetExceeded, UnknownState
from .objectives import And, Not, Or, map_states
from .secure_eq import (
    MooreStrategy,
    StrategyProfile,
    _as_constraint,
    outcome,
    payoff,
    prefers,
)
from .zero_sum import DEFAULT_BUDGET, Region, _cooperative_lasso, _Graph

__all__ = [
    "MAX_STATES",
    "MAX_MEMORY",
    "DeviationReport",
    "verify_se",
    "brute_region",
    "lasso_region",
    "enumerate_bounded_se",
]

MAX_STATES = 8
MAX_MEMORY = 2

# Memory bounds count the elements in use once the first state has been
# read; that element is always 0.  START is the extra marker a Moore
# strategy holds before anything is read.
START = -1


@dataclass(frozen=True)
class DeviationReport:
    """A profitable deviation: ``player`` can reach payoff ``achievable``.

    ``witness`` is a lasso in the deviation product, whose nodes are
    ``(state, memories of the other players)``.
    """

    player: int
    achievable: tuple
    witness: Lasso

    @property
    def play(self) -> Lasso:
        """The witness projected onto arena states."""
        return Lasso([n[0] for n in self.witness.stem], [n[0] for n in self.witness.cycle])


def _exact_profile(objectives, w):
    return And(tuple(o if bit else Not(o) for o, bit in zip(objectives, w)))


def _deviation_product(a: GameArena, profile: StrategyProfile, i: int, s):
    """Plays from ``s`` where everyone but ``i`` follows ``profile``."""
    others = [j for j in range(1, a.n + 1) if j != i]
    strategies = {j: profile[j] for j in others}

    def advance(mems, t):
        return tuple(strategies[j].update(m, t) for j, m in zip(others, mems))

    start = (s, advance(tuple(strategies[j].initial for j in others), s))
    nodes = [start]
    index = {start: 0}
    succ = []
    k = 0
    while k < len(nodes):
        t, mems = nodes[k]
        owner = a.owner_of(t)
        if owner == i:
            targets = [a.states[v] for v in a.succ[a.idx(t)]]
        else:
            targets = [strategies[owner].move(mems[others.index(owner)], t)]
        out = []
        for t2 in targets:
            node = (t2, advance(mems, t2))
            if node not in index:
                index[node] = len(nodes)
                nodes.append(node)
            out.append(index[node])
        succ.append(tuple(out))
        k += 1
    return nodes, succ


def verify_se(a: GameArena, objectives, profile: StrategyProfile, s,
              budget: int = DEFAULT_BUDGET) -> DeviationReport | None:
    """Check that ``profile`` is a secure equilibrium from ``s``.

    Returns None when no player has a deviation leading to a payoff
    profile it prefers, otherwise a report for the first such player.
    """
    if s not in a:
        raise UnknownState(s)
    u = payoff(outcome(a, profile, s), objectives)
    for i in range(1, a.n + 1):
        better = [w for w in product((0, 1), repeat=a.n) if prefers(i, u, w)]
        if not better:
            continue
        nodes, succ = _deviation_product(a, profile, i, s)
        fibers = {}
        for k, (t, _) in enumerate(nodes):
            fibers.setdefault(t, []).append(k)
        g = _Graph(succ)
        domain = set(range(len(nodes)))
        for w in better:
            e = map_states(_exact_profile(objectives, w), lambda t: fibers.get(t, ()))
            found = _cooperative_lasso(g, domain, e, 0, budget)
            if found is not None:
                stem, cycle = found
                return DeviationReport(i, w, Lasso([nodes[k] for k in stem], [nodes[k] for k in cycle]))
    return None


# ---------------------------------------------------------------------------
# Plays consistent with a partially specified strategy


def _check_size(a: GameArena, memory_bound: int):
    if len(a.states) > MAX_STATES:
        raise BudgetExceeded(f"brute force refuses arenas above {MAX_STATES} states")
    if memory_bound > MAX_MEMORY:
        raise BudgetExceeded(f"brute force refuses memory bounds above {MAX_MEMORY}")


def _components(nodes, succ):
    """Strongly connected components (Kosaraju) of the graph on ``nodes``."""
    order = []
    seen = set()
    for root in nodes:
        if root in seen:
            continue
        seen.add(root)
        stack = [(root, iter(succ.get(root, ())))]
        while stack:
            u, it = stack[-1]
            for w in it:
                if w in nodes and w not in seen:
                    seen.add(w)
                    stack.append((w, iter(succ.get(w, ()))))
                    break
            else:
                stack.pop()
                order.append(u)
    pred = {}
    for u in nodes:
        for w in succ.get(u, ()):
            if w in nodes:
                pred.setdefault(w, []).append(u)
    comps = []
    assigned = set()
    for root in reversed(order):
        if root in assigned:
            continue
        comp = {root}
        assigned.add(root)
        stack = [root]
        while stack:
            u = stack.pop()
            for w in pred.get(u, ()):
                if w not in assigned:
                    assigned.add(w)
                    comp.add(w)
                    stack.append(w)
        comps.append(comp)
    return comps


def _subsets_where(states, pred) -> list:
    """Nonempty subsets of ``states`` satisfying ``pred``, as frozensets."""
    states = list(states)
    out = []
    for r in range(1, len(states) + 1):
        for chosen in combinations(states, r):
            X = frozenset(chosen)
            if pred(X):
                out.append(X)
    return out


def _nontrivial(comp, succ) -> bool:
    if len(comp) > 1:
        return True
    (x,) = comp
    return x in succ.get(x, ())


def _bad_cycle(nodes, edges, bad_sets) -> bool:
    """Is there a strongly connected node set visiting exactly a bad set?

    Nodes are pairs whose first entry is an arena state.  A set X of states
    is visited by some strongly connected set iff a nontrivial component of
    the graph restricted to X covers all of X.
    """
    succ = {}
    for u, w in edges:
        succ.setdefault(u, set()).add(w)
    for comp in _components(set(nodes), succ):
        if not _nontrivial(comp, succ):
            continue
        covered = {n[0] for n in comp}
        for X in bad_sets:
            if not X <= covered:
                continue
            sub = {n for n in comp if n[0] in X}
            for inner in _components(sub, succ):
                if _nontrivial(inner, succ) and len({n[0] for n in inner}) == len(X):
                    return True
    return False


class _Need:
    """A table entry the search has to fix before it can go on."""

    __slots__ = ("key", "options")

    def __init__(self, key, options):
        self.key = key
        self.options = options


class _Search:
    """Lazy depth-first search over table entries of Moore machines.

    Subclasses implement ``explore``, which returns a :class:`_Need` to
    branch on, True when the current assignment is complete and
    acceptable, or the failure's conflict set: table keys such that every
    completion agreeing on them fails too (False stands for the whole
    table).  Conflict sets drive backjumping.
    """

    def __init__(self, budget):
        self.budget = budget
        self.steps = 0
        self.table = {}
        self.reads = None

    def get(self, key):
        value = self.table.get(key)
        if value is not None and self.reads is not None:
            self.reads.add(key)
        return value

    def run(self):
        """True, or the conflict set explaining why no completion works."""
        self.steps += 1
        if self.steps > self.budget:
            raise BudgetExceeded(f"brute force exceeded {self.budget} search nodes")
        found = self.explore()
        if found is True:
            return True
        if found is False:
            return frozenset(self.table)
        if not isinstance(found, _Need):
            return found
        key = found.key
        conflict = set()
        for o in found.options:
            self.table[key] = o
            result = self.run()
            if result is True:
                return True
            if key not in result:
                del self.table[key]
                return result
            conflict |= result
        del self.table[key]
        conflict.discard(key)
        return frozenset(conflict)


class _CoalitionSearch(_Search):
    """Joint Moore strategy of a coalition winning ``e`` from ``s``."""

    def __init__(self, a, coalition, e, s, k, budget):
        super().__init__(budget)
        self.a, self.coalition, self.s, self.k = a, coalition, s, k
        self.bad_sets = _subsets_where(a.states, lambda X: not e.holds(X))

    def _update(self, m, t):
        if self.k == 1:
            return 0
        return self.get(("u", m, t))

    def explore(self):
        a, k = self.a, self.k
        self.reads = set()
        start = (self.s, 0)
        seen = {start}
        queue = deque([start])
        edges = []
        missing = None
        while queue:
            t, m = queue.popleft()
            targets = [a.states[v] for v in a.succ[a.idx(t)]]
            if a.owner_of(t) in self.coalition:
                choice = self.get(("m", m, t))
                if choice is None:
                    missing = missing or _Need(("m", m, t), targets)
                    continue
                targets = [choice]
            for t2 in targets:
                m2 = self._update(m, t2)
                if m2 is None:
                    missing = missing or _Need(("u", m, t2), range(k))
                    continue
                node = (t2, m2)
                edges.append(((t, m), node))
                if node not in seen:
                    seen.add(node)
                    queue.append(node)
        # edges found so far survive every completion of the table
        if _bad_cycle(seen, edges, self.bad_sets):
            return frozenset(self.reads)
        return missing or True


def brute_region(a: GameArena, coalition, e, memory_bound: int = 1,
                 budget: int = DEFAULT_BUDGET) -> Region:
    """Coalition region by trying every joint strategy with bounded memory.

    The coalition shares one Moore machine with ``max(1, memory_bound)``
    memory elements; a bound of 0 or 1 means positional strategies.
    """
    _check_size(a, memory_bound)
    coalition = frozenset(coalition)
    k = max(1, memory_bound)
    win = []
    for s in a.states:
        search = _CoalitionSearch(a, coalition, e, s, k, budget)
        if search.run() is True:
            win.append(s)
    return Region(win, f"brute force, memory {k}")


def lasso_region(a: GameArena, e, max_states: int = 12) -> Region:
    """Cooperative region by listing every strongly connected state set."""
    if len(a.states) > max_states:
        raise BudgetExceeded(f"lasso enumeration refuses arenas above {max_states} states")
    n = len(a.states)
    succ = a.succ

    def reach(mask, start, adj):
        seen = 1 << start
        stack = [start]
        while stack:
            u = stack.pop()
            for v in adj[u]:
                if mask >> v & 1 and not seen >> v & 1:
                    seen |= 1 << v
                    stack.append(v)
        return seen

    good = 0
    for mask in range(1, 1 << n):
        members = [u for u in range(n) if mask >> u & 1]
        u = members[0]
        if len(members) == 1:
            if u not in succ[u]:
                continue
        elif reach(mask, u, succ) != mask or reach(mask, u, a.pred) != mask:
            continue
        if e.holds(frozenset(a.states[v] for v in members)):
            good |= mask
    win = 0
    for u in range(n):
        if good >> u & 1:
            win |= reach((1 << n) - 1, u, a.pred)
    return Region((a.states[u] for u in range(n) if win >> u & 1), "lasso enumeration")


# ---------------------------------------------------------------------------
# Bounded-memory secure equilibria


class _ProfileSearch(_Search):
    """Strategy profile with bounded memory that is secure with payoff v."""

    def __init__(self, a, objectives, s, v, k, budget, escape_memory=1):
        super().__init__(budget)
        self.a, self.objectives, self.s, self.v, self.k = a, objectives, s, v, k
        self.n = a.n
        profiles = {}
        for X in _subsets_where(a.states, lambda X: True):
            profiles.setdefault(tuple(int(o.holds(X)) for o in objectives), []).append(X)
        self.bad_sets = {
            i: [X for w, sets in profiles.items() if prefers(i, v, w) for X in sets]
            for i in range(1, a.n + 1)
        }
        # states from which i alone surely reaches a profile it prefers;
        # reaching one of them in i's deviation graph settles the branch
        self.escape = {}
        for i in range(1, a.n + 1):
            better = [w for w in product((0, 1), repeat=a.n) if prefers(i, v, w)]
            goal = Or(tuple(_exact_profile(objectives, w) for w in better))
            self.escape[i] = brute_region(a, {i}, goal, escape_memory, budget) if better else frozenset()
        # the outcome never enters an escape state and ends with payoff v
        safe = trim_dead_ends(a, set(a.states).difference(*self.escape.values()))
        self.feasible = (
            lasso_region(restrict(a, safe), _exact_profile(objectives, v)) if safe else frozenset()
        )

    def _update(self, j, m, t):
        if self.k == 1:
            return 0
        return self.get(("u", j, m, t))

    def _advance(self, players, mems, t):
        out = []
        for j, m in zip(players, mems):
            m2 = self._update(j, m, t)
            if m2 is None:
                return _Need(("u", j, m, t), range(self.k))
            out.append(m2)
        return tuple(out)

    def _succ_states(self, t):
        a = self.a
        return [a.states[v] for v in a.succ[a.idx(t)]]

    def _options(self, t):
        # feasible successors first; the order only affects which witness
        # is found first, never whether one is
        return sorted(self._succ_states(t), key=lambda u: u not in self.feasible)

    def _outcome(self):
        everyone = list(range(1, self.n + 1))
        mems = (0,) * self.n
        cur = self.s
        seen = {}
        seq = []
        while (cur, mems) not in seen:
            if cur not in self.feasible:
                return frozenset(self.reads)
            seen[(cur, mems)] = len(seq)
            seq.append(cur)
            j = self.a.owner_of(cur)
            key = ("m", j, mems[j - 1], cur)
            nxt = self.get(key)
            if nxt is None:
                return _Need(key, self._options(cur))
            mems = self._advance(everyone, mems, nxt)
            if isinstance(mems, _Need):
                return mems
            cur = nxt
        return Lasso(seq[: seen[(cur, mems)]], seq[seen[(cur, mems)]:])

    def _deviations(self, i):
        """Known part of the deviation graph of ``i`` and a missing entry."""
        others = [j for j in range(1, self.n + 1) if j != i]
        start = (self.s, (0,) * len(others))
        seen = {start}
        queue = deque([start])
        edges = []
        missing = None
        while queue:
            t, mems = queue.popleft()
            owner = self.a.owner_of(t)
            if owner == i:
                targets = self._succ_states(t)
            else:
                key = ("m", owner, mems[others.index(owner)], t)
                choice = self.get(key)
                if choice is None:
                    missing = missing or _Need(key, self._options(t))
                    continue
                targets = [choice]
            for t2 in targets:
                mems2 = self._advance(others, mems, t2)
                if isinstance(mems2, _Need):
                    missing = missing or mems2
                    continue
                node = (t2, mems2)
                edges.append(((t, mems), node))
                if node not in seen:
                    seen.add(node)
                    queue.append(node)
        return seen, edges, missing

    def explore(self):
        if self.s not in self.feasible:
            return frozenset()
        pending = None
        for i in range(1, self.n + 1):
            if not self.bad_sets[i]:
                continue
            self.reads = set()
            nodes, edges, missing = self._deviations(i)
            if any(t in self.escape[i] for t, _ in nodes):
                return frozenset(self.reads)
            if _bad_cycle(nodes, edges, self.bad_sets[i]):
                return frozenset(self.reads)
            pending = pending or missing
        self.reads = set()
        play = self._outcome()
        if isinstance(play, (_Need, frozenset)):
            return play
        if payoff(play, self.objectives) != self.v:
            return frozenset(self.reads)
        self.reads = None
        if pending is not None:
            return pending
        return verify_se(self.a, self.objectives, self.profile(), self.s) is None

    def profile(self) -> StrategyProfile:
        a, k = self.a, self.k
        memory = (START,) + tuple(range(k))
        strategies = []
        for j in range(1, self.n + 1):
            transitions = {(START, t): 0 for t in a.states}
            moves = {}
            for m in memory[1:]:
                for t in a.states:
                    m2 = self._update(j, m, t)
                    transitions[(m, t)] = 0 if m2 is None else m2
                    if a.owner_of(t) == j:
                        moves[(m, t)] = self.table.get(("m", j, m, t), self._succ_states(t)[0])
            strategies.append(MooreStrategy(j, memory, START, transitions, moves))
        return StrategyProfile(tuple(strategies), {"memory_bound": k})


def enumerate_bounded_se(a: GameArena, objectives, s, v, memory_bound: int = 1,
                         budget: int = DEFAULT_BUDGET) -> StrategyProfile | None:
    """Search every profile whose players use at most ``memory_bound`` memory.

    Returns a secure equilibrium from ``s`` with payoff v, or None when no
    profile within the bound is one.
    """
    if s not in a:
        raise UnknownState(s)
    _check_size(a, memory_bound)
    v = _as_constraint(v)
    search = _ProfileSearch(a, objectives, s, v.bits, max(1, memory_bound), budget)
    if search.run() is True:
        return search.profile()
    return None


