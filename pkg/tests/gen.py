"""Random arenas and objectives for property tests."""
from __future__ import annotations

import random

from secureq.arena import validate_arena
from secureq.objectives import And, Buchi, CoBuchi, Not, Or, Parity


def random_arena(rng: random.Random, n_states: int, players: int, max_out: int = 3):
    states = [f"s{k}" for k in range(n_states)]
    owner = {s: rng.randint(1, players) for s in states}
    edges = []
    for s in states:
        for t in rng.sample(states, rng.randint(1, min(max_out, n_states))):
            edges.append((s, t))
    return validate_arena({"players": players, "states": states, "owner": owner, "edges": edges})


def random_states(rng: random.Random, states, p: float = 0.4) -> frozenset:
    return frozenset(s for s in states if rng.random() < p)


def random_leaf(rng: random.Random, states, kinds=("buchi", "cobuchi", "parity"), max_color: int = 4):
    kind = rng.choice(kinds)
    if kind == "buchi":
        return Buchi(random_states(rng, states))
    if kind == "cobuchi":
        return CoBuchi(random_states(rng, states))
    return Parity({s: rng.randint(0, max_color) for s in states})


def random_boolean(rng: random.Random, leaves, depth: int = 2):
    """A Boolean combination of the given objectives."""
    if depth == 0 or rng.random() < 0.3:
        leaf = rng.choice(leaves)
        return Not(leaf) if rng.random() < 0.3 else leaf
    op = rng.choice((And, Or, Not))
    if op is Not:
        return Not(random_boolean(rng, leaves, depth - 1))
    k = rng.randint(2, 3)
    return op(tuple(random_boolean(rng, leaves, depth - 1) for _ in range(k)))


def random_game(rng: random.Random, max_states: int = 6, players=(2, 3), kinds=("buchi", "cobuchi", "parity")):
    n_states = rng.randint(2, max_states)
    n = rng.choice(players) if isinstance(players, (tuple, list)) else players
    a = random_arena(rng, n_states, n)
    objectives = [random_leaf(rng, a.states, kinds) for _ in range(n)]
    return a, objectives


def random_coalition(rng: random.Random, n: int) -> frozenset:
    return frozenset(i for i in range(1, n + 1) if rng.random() < 0.5)


def random_lasso(rng: random.Random, states):
    """A lasso over ``states`` (edges are not checked)."""
    stem = [rng.choice(states) for _ in range(rng.randint(0, 3))]
    cycle = [rng.choice(states) for _ in range(rng.randint(1, 5))]
    from secureq.arena import Lasso

    return Lasso(stem, cycle)


def random_guard(rng: random.Random, objectives):
    """A deviation guard for a random constraint and player."""
    from secureq.secure_eq import deviation_guard

    n = len(objectives)
    v = tuple(rng.randint(0, 1) for _ in range(n))
    i = rng.randint(1, n)
    return deviation_guard(objectives, v, i), v, i
