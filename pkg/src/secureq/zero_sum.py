"""Winning regions of coalitions.

A coalition P plays against the remaining players; by determinacy the
multi-player question ``<<P>>(phi)`` is a two-player zero-sum game on the
same graph.  The solvers here work on integer node indices:

* :func:`solve_parity` -- Zielonka's recursive algorithm (Buchi and
  co-Buchi are two-color parity games).
* Streett and Rabin games -- the same recursion driven by the pair
  structure of the condition instead of colors.
* :func:`solve_muller` -- product with a latest-appearance record, solved
  as a parity game; the product also yields finite-memory strategies.
* :func:`solve_cooperative` -- one-player games, by strongly connected
  component refinement.
"""
from __future__ import annotations

import logging
from collections import deque
from dataclasses import dataclass
from itertools import combinations

from .arena import GameArena, Lasso
from .errors import MemoryBudgetExceeded, ObjectiveError, PlayerOutOfRange, ShapeMismatch
from .objectives import (
    Buchi,
    CoBuchi,
    Muller,
    Parity,
    Rabin,
    Streett,
    _clauses,
    _pair_list,
    atomize,
    flatten_same_class,
    map_states,
    rabin_encoding,
    streett_encoding,
    to_muller,
)

log = logging.getLogger(__name__)

DEFAULT_BUDGET = 10**6

__all__ = [
    "DEFAULT_BUDGET",
    "Region",
    "CoalitionGame",
    "attractor",
    "solve_parity",
    "solve_muller",
    "coalition_region",
    "coalition_strategy",
    "solve_cooperative",
    "cooperative_lasso",
    "LarStrategy",
]


class Region(frozenset):
    """A set of states together with a note on how it was computed."""

    def __new__(cls, members=(), provenance: str = ""):
        obj = super().__new__(cls, members)
        obj.provenance = provenance
        return obj

    def __repr__(self):
        return f"Region({set(self) or '{}'}, provenance={self.provenance!r})"


@dataclass(frozen=True)
class CoalitionGame:
    """Two-player view of an arena: ``coalition`` against everyone else."""

    arena: GameArena
    coalition: frozenset
    objective: object

    def __post_init__(self):
        object.__setattr__(self, "coalition", frozenset(self.coalition))
        for p in self.coalition:
            if not 1 <= p <= self.arena.n:
                raise PlayerOutOfRange(p, self.arena.n)

    @property
    def protagonist_states(self) -> frozenset:
        a = self.arena
        return frozenset(s for s, o in zip(a.states, a.owner) if o in self.coalition)

    def prot_mask(self) -> list:
        return [o in self.coalition for o in self.arena.owner]


class _Graph:
    """Plain adjacency lists over 0..n-1, used for product constructions."""

    __slots__ = ("succ", "pred")

    def __init__(self, succ):
        self.succ = succ
        pred = [[] for _ in succ]
        for u, ts in enumerate(succ):
            for v in ts:
                pred[v].append(u)
        self.pred = pred


# ---------------------------------------------------------------------------
# Core fixpoints


def _attract(g, domain, target, prot, side):
    """Attractor of ``side`` (0 = protagonist) to ``target`` inside ``domain``.

    Returns the attractor and an attractor strategy for ``side``'s nodes
    outside the target.
    """
    attr = set(target)
    strat = {}
    count = {}
    queue = deque(attr)
    mine = side == 0
    succ, pred = g.succ, g.pred
    while queue:
        v = queue.popleft()
        for u in pred[v]:
            if u in attr or u not in domain:
                continue
            if prot[u] == mine:
                attr.add(u)
                strat[u] = v
                queue.append(u)
            else:
                c = count.get(u)
                if c is None:
                    c = sum(1 for w in succ[u] if w in domain)
                c -= 1
                count[u] = c
                if c == 0:
                    attr.add(u)
                    queue.append(u)
    return attr, strat


def _zielonka(g, nodes, color, prot):
    """Min-even parity game restricted to ``nodes`` (a trap-free subgame).

    Returns ``(W, S)``: winning regions and positional strategies indexed by
    side (0 = protagonist, who wins when the least recurring color is even).
    """
    W = (set(), set())
    S = ({}, {})
    V = set(nodes)
    while V:
        c = min(color[v] for v in V)
        sigma = c % 2
        target = {v for v in V if color[v] == c}
        A, sA = _attract(g, V, target, prot, sigma)
        Wsub, Ssub = _zielonka(g, V - A, color, prot)
        if not Wsub[1 - sigma]:
            W[sigma].update(V)
            S[sigma].update(Ssub[sigma])
            S[sigma].update(sA)
            for v in target:
                if prot[v] == (sigma == 0):
                    S[sigma][v] = next(w for w in g.succ[v] if w in V)
            return W, S
        B, sB = _attract(g, V, Wsub[1 - sigma], prot, 1 - sigma)
        W[1 - sigma].update(B)
        S[1 - sigma].update(Ssub[1 - sigma])
        S[1 - sigma].update(sB)
        V -= B
    return W, S


def _rabin_holds(pairs, C):
    return any(f & C and not g & C for f, g in pairs)


def _max_rabin_sat(pairs, C):
    cands = []
    for f, g in pairs:
        D = C - g
        if D & f and D not in cands:
            cands.append(D)
    return [D for D in cands if not any(D < E for E in cands)]


def _max_rabin_fail(pairs, C, limit=1 << 16):
    if 1 << len(pairs) > limit:
        raise MemoryBudgetExceeded(f"{len(pairs)} pairs exceed the Rabin enumeration limit")
    cands = []
    idx = range(len(pairs))
    for r in range(len(pairs) + 1):
        for J in combinations(idx, r):
            D = C.difference(*(pairs[j][0] for j in J))
            if D and D not in cands and not _rabin_holds(pairs, D):
                cands.append(D)
    return [D for D in cands if not any(D < E for E in cands)]


def _zielonka_pairs(g, nodes, prot, pairs, streett):
    """Zielonka's recursion for a Rabin (or Streett) condition of the protagonist.

    The recursion follows the Zielonka tree of the condition with states as
    colors: at a subgame with state set C, the player winning "inf = C" must
    be beaten by the other on every maximal subset of C that flips the
    condition.  For pair conditions those subsets are read off the pairs.
    """
    pairs = [(frozenset(f), frozenset(g_)) for f, g_ in pairs]

    def cond(C):
        r = _rabin_holds(pairs, C)
        return not r if streett else r

    def children(C):
        if _rabin_holds(pairs, C):
            return _max_rabin_fail(pairs, C)
        return _max_rabin_sat(pairs, C)

    def solve(V):
        W = (set(), set())
        V = set(V)
        while V:
            C = frozenset(V)
            sigma = 0 if cond(C) else 1
            for D in children(C):
                A, _ = _attract(g, V, V - D, prot, sigma)
                sub = V - A
                if not sub:
                    continue
                Wsub = solve(sub)
                if Wsub[1 - sigma]:
                    B, _ = _attract(g, V, Wsub[1 - sigma], prot, 1 - sigma)
                    W[1 - sigma].update(B)
                    V -= B
                    break
            else:
                W[sigma].update(V)
                break
        return W

    return solve(nodes)[0]


# ---------------------------------------------------------------------------
# Latest appearance record


class _LarProduct:
    """Arena x latest-appearance-record over the atoms of an objective.

    A node is ``(state, record, hit)``: ``record`` orders the atoms by most
    recent visit after reading ``state`` and ``hit`` is the deepest record
    position refreshed by that visit (-1 when ``state`` lies in no atom).
    With k atoms, hit h gets color ``2(k-1-h)`` plus one if the objective
    fails on the first h+1 atoms of the record; misses get ``2k`` (+1).
    The least color seen infinitely often then encodes the objective.
    """

    def __init__(self, g, domain, prot, atoms, evaluate, budget):
        self.atoms = atoms
        k = len(atoms)
        n_states = len(g.succ)
        labels = [frozenset(i for i, at in enumerate(atoms) if s in at) for s in range(n_states)]
        self.labels = labels
        miss_color = 2 * k + (0 if evaluate(0) else 1)
        color_cache = {}
        step_cache = {}

        def step(record, s):
            key = (record, s)
            hit = step_cache.get(key)
            if hit is None:
                lab = labels[s]
                if not lab:
                    hit = (record, -1)
                else:
                    moved = tuple(x for x in record if x in lab)
                    h = max(i for i, x in enumerate(record) if x in lab)
                    hit = (moved + tuple(x for x in record if x not in lab), h)
                step_cache[key] = hit
            return hit

        def node_color(record, h):
            if h < 0:
                return miss_color
            key = (record, h)
            c = color_cache.get(key)
            if c is None:
                mask = 0
                for x in record[: h + 1]:
                    mask |= 1 << x
                c = 2 * (k - 1 - h) + (0 if evaluate(mask) else 1)
                color_cache[key] = c
            return c

        self.step = step
        self.initial_record = tuple(range(k))
        index = {}
        nodes = []
        succ = []
        colors = []

        def node(s, record, h):
            key = (s, record, h)
            i = index.get(key)
            if i is None:
                i = len(nodes)
                if i >= budget:
                    raise MemoryBudgetExceeded(
                        f"latest-appearance-record product exceeds {budget} nodes"
                    )
                index[key] = i
                nodes.append(key)
                succ.append(None)
                colors.append(node_color(record, h))
                queue.append(i)
            return i

        queue = deque()
        self.initial = {}
        for s in sorted(domain):
            self.initial[s] = node(s, *step(self.initial_record, s))
        while queue:
            i = queue.popleft()
            s, record, _ = nodes[i]
            succ[i] = [node(t, *step(record, t)) for t in g.succ[s] if t in domain]
        self.index = index
        self.nodes = nodes
        self.colors = colors
        self.graph = _Graph(succ)
        self.prot = [prot[s] for s, _, _ in nodes]

    def solve(self):
        W, S = _zielonka(self.graph, range(len(self.nodes)), self.colors, self.prot)
        self.win = W[0]
        self.strategy = S[0]
        return {s for s, i in self.initial.items() if i in W[0]}


class LarStrategy:
    """Finite-memory coalition strategy read off a solved record product.

    Memory is ``(record, hit)`` after reading the current state.  Moves are
    only meaningful from states the coalition wins; elsewhere the lowest
    successor is returned.
    """

    def __init__(self, arena: GameArena, product: _LarProduct, coalition):
        self.arena = arena
        self.product = product
        self.coalition = frozenset(coalition)

    @property
    def initial(self):
        return (self.product.initial_record, -2)

    def update(self, memory, state):
        record, _ = memory
        return self.product.step(record, self.arena.idx(state))

    def move(self, memory, state):
        a = self.arena
        s = a.idx(state)
        i = self.product.index.get((s,) + tuple(memory))
        if i is not None and i in self.product.strategy:
            t = self.product.nodes[self.product.strategy[i]][0]
            return a.states[t]
        return a.states[a.succ[s][0]]

    def memory_size(self) -> int:
        return len({(r, h) for _, r, h in self.product.nodes})


# ---------------------------------------------------------------------------
# Public API


def _to_index(a: GameArena, e):
    index = a.index
    return map_states(e, lambda s: (index[s],) if s in index else ())


def _colors(a: GameArena, leaf) -> list:
    n = len(a.states)
    if isinstance(leaf, Buchi):
        return [0 if s in leaf.states else 1 for s in range(n)]
    if isinstance(leaf, CoBuchi):
        return [1 if s in leaf.states else 2 for s in range(n)]
    try:
        return [leaf.colors[s] for s in range(n)]
    except KeyError as exc:
        raise ObjectiveError(f"parity coloring misses state {a.states[exc.args[0]]!r}") from None


def _region(a, members, provenance):
    return Region((a.states[i] for i in members), provenance)


def attractor(g: CoalitionGame, target) -> Region:
    """States from which the coalition can force a visit to ``target``."""
    a = g.arena
    t = {a.idx(s) for s in target}
    attr, _ = _attract(a, set(range(len(a.states))), t, g.prot_mask(), 0)
    return _region(a, attr, "attractor")


def solve_parity(g: CoalitionGame) -> Region:
    """Coalition region of a parity (or Buchi / co-Buchi) objective."""
    a = g.arena
    leaf = _to_index(a, g.objective)
    if not isinstance(leaf, (Buchi, CoBuchi, Parity)):
        raise TypeError(f"solve_parity expects a parity-type objective, got {g.objective!r}")
    W, _ = _zielonka(a, range(len(a.states)), _colors(a, leaf), g.prot_mask())
    return _region(a, W[0], "parity")


def _lar(a, prot, e_index, budget):
    atoms, evaluate = atomize(e_index)
    product = _LarProduct(a, set(range(len(a.states))), prot, atoms, evaluate, budget)
    return product, product.solve()


def solve_muller(g: CoalitionGame, budget: int = DEFAULT_BUDGET) -> Region:
    """Coalition region of a Muller objective via the record product."""
    a = g.arena
    obj = g.objective if isinstance(g.objective, Muller) else to_muller(g.objective)
    _, win = _lar(a, g.prot_mask(), _to_index(a, obj), budget)
    return _region(a, win, "muller/lar")


def _solve_pairs(a, prot, pairs, streett):
    return _zielonka_pairs(a, range(len(a.states)), prot, pairs, streett)


def coalition_region(a: GameArena, coalition, e, *, route: str = "auto",
                     budget: int = DEFAULT_BUDGET) -> Region:
    """``<<coalition>>(e)``: states from which the coalition can force ``e``.

    ``route`` picks the reduction: ``auto`` tries a single leaf, then a
    Streett encoding, then a Rabin encoding, and finally a record product
    over the objective's atoms; ``streett``, ``rabin``, ``muller`` (state
    level record product of the Muller translation) and ``lar`` force one.
    """
    g = CoalitionGame(a, coalition, e)
    prot = g.prot_mask()
    ie = _to_index(a, e)
    universe = range(len(a.states))
    if route == "muller":
        _, win = _lar(a, prot, to_muller(ie), budget)
        return _region(a, win, "muller/lar")
    if route == "lar":
        _, win = _lar(a, prot, ie, budget)
        return _region(a, win, "lar")
    if route == "streett":
        enc = streett_encoding(ie, universe)
        return _region(a, _solve_pairs(a, prot, enc.pairs, True), "streett")
    if route == "rabin":
        enc = rabin_encoding(ie, universe)
        return _region(a, _solve_pairs(a, prot, enc.pairs, False), "rabin")
    if route != "auto":
        raise ValueError(f"unknown route {route!r}")

    leaf = flatten_same_class(ie)
    if isinstance(leaf, (Buchi, CoBuchi, Parity)):
        W, _ = _zielonka(a, universe, _colors(a, leaf), prot)
        return _region(a, W[0], "parity")
    if isinstance(leaf, Streett):
        return _region(a, _solve_pairs(a, prot, leaf.pairs, True), "streett")
    if isinstance(leaf, Rabin):
        return _region(a, _solve_pairs(a, prot, leaf.pairs, False), "rabin")
    if isinstance(leaf, Muller):
        _, win = _lar(a, prot, leaf, budget)
        return _region(a, win, "muller/lar")
    try:
        enc = streett_encoding(ie, universe)
        return _region(a, _solve_pairs(a, prot, enc.pairs, True), "streett")
    except ShapeMismatch:
        pass
    try:
        enc = rabin_encoding(ie, universe)
        return _region(a, _solve_pairs(a, prot, enc.pairs, False), "rabin")
    except ShapeMismatch:
        pass
    _, win = _lar(a, prot, ie, budget)
    return _region(a, win, "lar")


def coalition_strategy(a: GameArena, coalition, e, budget: int = DEFAULT_BUDGET):
    """Region and a finite-memory winning strategy of the coalition.

    The strategy is positional on the record product over the atoms of
    ``e`` and wins from every state of the returned region.
    """
    g = CoalitionGame(a, coalition, e)
    product, win = _lar(a, g.prot_mask(), _to_index(a, e), budget)
    return _region(a, win, "lar"), LarStrategy(a, product, g.coalition)


# ---------------------------------------------------------------------------
# One-player games


def _sccs(succ, nodes):
    """Strongly connected components of the subgraph induced by ``nodes``."""
    nodes = set(nodes)
    index = {}
    low = {}
    on_stack = set()
    stack = []
    out = []
    counter = 0
    for root in sorted(nodes):
        if root in index:
            continue
        work = [(root, iter(succ[root]))]
        index[root] = low[root] = counter
        counter += 1
        stack.append(root)
        on_stack.add(root)
        while work:
            v, it = work[-1]
            advanced = False
            for w in it:
                if w not in nodes:
                    continue
                if w not in index:
                    index[w] = low[w] = counter
                    counter += 1
                    stack.append(w)
                    on_stack.add(w)
                    work.append((w, iter(succ[w])))
                    advanced = True
                    break
                if w in on_stack:
                    low[v] = min(low[v], index[w])
            if advanced:
                continue
            work.pop()
            if work:
                u = work[-1][0]
                low[u] = min(low[u], low[v])
            if low[v] == index[v]:
                comp = set()
                while True:
                    w = stack.pop()
                    on_stack.discard(w)
                    comp.add(w)
                    if w == v:
                        break
                out.append(frozenset(comp))
    return out


def _nontrivial(succ, comp):
    if len(comp) > 1:
        return True
    (v,) = comp
    return v in succ[v]


def _good_components(succ, domain, e, budget=DEFAULT_BUDGET):
    """Strongly connected sets U inside ``domain`` with ``e.holds(U)``.

    Every accepting set is contained in (or equal to) one returned set, so
    the union of the result is what matters for reachability questions.
    """
    try:
        pairs = _pair_list(_clauses(e), domain)
    except ShapeMismatch:
        pairs = None
    good = []
    if pairs is not None:
        stack = [c for c in _sccs(succ, domain) if _nontrivial(succ, c)]
        while stack:
            C = stack.pop()
            bad = set()
            for f, g_ in pairs:
                if not f.isdisjoint(C) and g_.isdisjoint(C):
                    bad |= f & C
            if not bad:
                good.append(C)
            else:
                stack.extend(c for c in _sccs(succ, C - bad) if _nontrivial(succ, c))
        return good

    seen = set()
    stack = [c for c in _sccs(succ, domain) if _nontrivial(succ, c)]
    while stack:
        C = stack.pop()
        if C in seen:
            continue
        seen.add(C)
        if len(seen) > budget:
            raise MemoryBudgetExceeded(f"cooperative subset search exceeds {budget} sets")
        if e.holds(C):
            good.append(C)
            continue
        for x in sorted(C):
            stack.extend(c for c in _sccs(succ, C - {x}) if _nontrivial(succ, c))
    return good


def _backward(pred, domain, target):
    seen = set(target)
    queue = deque(seen)
    while queue:
        v = queue.popleft()
        for u in pred[v]:
            if u in domain and u not in seen:
                seen.add(u)
                queue.append(u)
    return seen


def _cooperative(g, domain, e, budget=DEFAULT_BUDGET):
    good = _good_components(g.succ, domain, e, budget)
    target = set().union(*good) if good else set()
    return _backward(g.pred, domain, target), good


def _path(succ, allowed, start, goal):
    """Shortest path start -> ... -> some node in goal (both inclusive)."""
    if start in goal:
        return [start]
    parent = {start: None}
    queue = deque([start])
    while queue:
        v = queue.popleft()
        for w in succ[v]:
            if w in allowed and w not in parent:
                parent[w] = v
                if w in goal:
                    path = [w]
                    while parent[path[-1]] is not None:
                        path.append(parent[path[-1]])
                    return path[::-1]
                queue.append(w)
    return None


def _closed_walk(succ, U, u):
    """A cycle through ``u`` inside ``U`` visiting every node of ``U``."""
    walk = [u]
    visited = {u}
    cur = u
    for w in sorted(U):
        if w in visited:
            continue
        p = _path(succ, U, cur, {w})
        walk.extend(p[1:])
        visited.update(p)
        cur = w
    if cur != u:
        back = _path(succ, U, cur, {u})
        walk.extend(back[1:-1])
    return walk


def _cooperative_lasso(g, domain, e, start, budget=DEFAULT_BUDGET):
    good = _good_components(g.succ, domain, e, budget)
    if not good:
        return None
    target = set().union(*good)
    p = _path(g.succ, domain, start, target)
    if p is None:
        return None
    u = p[-1]
    U = next(C for C in good if u in C)
    return p[:-1], _closed_walk(g.succ, U, u)


def solve_cooperative(a: GameArena, e, budget: int = DEFAULT_BUDGET) -> Region:
    """``<<all players>>(e)``: states from which some play satisfies ``e``."""
    domain = set(range(len(a.states)))
    win, _ = _cooperative(a, domain, _to_index(a, e), budget)
    return _region(a, win, "cooperative")


def cooperative_lasso(a: GameArena, e, start, budget: int = DEFAULT_BUDGET):
    """A lasso from ``start`` in ``e``, or None if no play from there satisfies it."""
    domain = set(range(len(a.states)))
    found = _cooperative_lasso(a, domain, _to_index(a, e), a.idx(start), budget)
    if found is None:
        return None
    stem, cycle = found
    return Lasso([a.states[i] for i in stem], [a.states[i] for i in cycle])
