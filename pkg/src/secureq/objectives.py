"""Omega-regular objectives and Boolean combinations of them.

Every objective here is prefix independent: whether a play belongs to it
depends only on ``inf``, the set of states the play visits infinitely
often.  ``holds(inf)`` is therefore the single evaluation primitive; a
lasso is judged through its cycle.

Leaves are :class:`Buchi`, :class:`CoBuchi`, :class:`Parity`,
:class:`Streett`, :class:`Rabin` and :class:`Muller`.  Composite objectives
are trees of :class:`Not`, :class:`And` and :class:`Or` over leaves.
"""
from __future__ import annotations

import re
from collections.abc import Callable, Iterable, Mapping
from dataclasses import dataclass
from itertools import product

from .errors import ForeignState, FormulaSyntaxError, ObjectiveError, ShapeMismatch

__all__ = [
    "Atom", "Const", "Neg", "Conj", "Disj", "TRUE", "FALSE",
    "parse_formula", "format_formula", "nnf", "formula_states",
    "Buchi", "CoBuchi", "Parity", "Streett", "Rabin", "Muller",
    "Not", "And", "Or", "ALL_PLAYS", "NO_PLAY",
    "satisfies", "negate", "flatten_same_class", "to_muller",
    "streett_encoding", "rabin_encoding", "map_states", "states_of",
    "check_states", "atomize",
]

_NAT = re.compile(r"(\d+)")


def _natural_key(s):
    return [int(t) if t.isdigit() else t for t in _NAT.split(str(s))]


def _ordered(states: Iterable) -> list:
    return sorted(states, key=lambda s: (_natural_key(s), repr(s)))


# ---------------------------------------------------------------------------
# Muller formulas over states


@dataclass(frozen=True)
class Atom:
    state: object

    def __str__(self):
        return str(self.state)


@dataclass(frozen=True)
class Const:
    value: bool

    def __str__(self):
        return "true" if self.value else "false"


@dataclass(frozen=True)
class Neg:
    arg: object

    def __str__(self):
        return format_formula(self)


@dataclass(frozen=True)
class Conj:
    args: tuple

    def __str__(self):
        return format_formula(self)


@dataclass(frozen=True)
class Disj:
    args: tuple

    def __str__(self):
        return format_formula(self)


TRUE = Const(True)
FALSE = Const(False)


def conj(*fs):
    out = []
    for f in fs:
        if f == FALSE:
            return FALSE
        if f == TRUE:
            continue
        out.extend(f.args if isinstance(f, Conj) else (f,))
    if not out:
        return TRUE
    return out[0] if len(out) == 1 else Conj(tuple(out))


def disj(*fs):
    out = []
    for f in fs:
        if f == TRUE:
            return TRUE
        if f == FALSE:
            continue
        out.extend(f.args if isinstance(f, Disj) else (f,))
    if not out:
        return FALSE
    return out[0] if len(out) == 1 else Disj(tuple(out))


def nnf(f, positive: bool = True):
    """Negation normal form; negations end up directly on atoms."""
    if isinstance(f, Atom):
        return f if positive else Neg(f)
    if isinstance(f, Const):
        return f if positive else Const(not f.value)
    if isinstance(f, Neg):
        return nnf(f.arg, not positive)
    if isinstance(f, Conj):
        parts = [nnf(g, positive) for g in f.args]
        return conj(*parts) if positive else disj(*parts)
    if isinstance(f, Disj):
        parts = [nnf(g, positive) for g in f.args]
        return disj(*parts) if positive else conj(*parts)
    raise TypeError(f"not a formula: {f!r}")


def evaluate(f, true_states) -> bool:
    if isinstance(f, Atom):
        return f.state in true_states
    if isinstance(f, Const):
        return f.value
    if isinstance(f, Neg):
        return not evaluate(f.arg, true_states)
    if isinstance(f, Conj):
        return all(evaluate(g, true_states) for g in f.args)
    if isinstance(f, Disj):
        return any(evaluate(g, true_states) for g in f.args)
    raise TypeError(f"not a formula: {f!r}")


def formula_states(f) -> frozenset:
    if isinstance(f, Atom):
        return frozenset((f.state,))
    if isinstance(f, Const):
        return frozenset()
    if isinstance(f, Neg):
        return formula_states(f.arg)
    return frozenset().union(*(formula_states(g) for g in f.args))


def format_formula(f) -> str:
    if isinstance(f, (Atom, Const)):
        return str(f)
    if isinstance(f, Neg):
        inner = format_formula(f.arg)
        return "!" + inner if isinstance(f.arg, (Atom, Const, Neg)) else f"!({inner})"
    if isinstance(f, Conj):
        return " & ".join(
            f"({format_formula(g)})" if isinstance(g, Disj) else format_formula(g) for g in f.args
        )
    if isinstance(f, Disj):
        return " | ".join(format_formula(g) for g in f.args)
    raise TypeError(f"not a formula: {f!r}")


_TOKEN = re.compile(r"\s*(?:([()!&|])|([^\s()!&|]+))")


def parse_formula(text: str):
    """Parse ``!``, ``&``, ``|`` and parentheses over atom identifiers.

    ``&`` binds tighter than ``|``; ``!`` binds tightest.  The words
    ``true`` and ``false`` denote constants.
    """
    tokens = []
    pos = 0
    text = text.rstrip()
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m:
            raise FormulaSyntaxError(f"unexpected character at offset {pos}: {text[pos:]!r}")
        tokens.append((m.group(1) or m.group(2), m.group(2) is not None, m.start(1) if m.group(1) else m.start(2)))
        pos = m.end()
    k = 0

    def peek():
        return tokens[k] if k < len(tokens) else (None, False, len(text))

    def expect(tok):
        nonlocal k
        got = peek()
        if got[0] != tok or got[1]:
            raise FormulaSyntaxError(f"expected {tok!r} at offset {got[2]}")
        k += 1

    def parse_or():
        nonlocal k
        parts = [parse_and()]
        while peek()[0] == "|" and not peek()[1]:
            k += 1
            parts.append(parse_and())
        return parts[0] if len(parts) == 1 else Disj(tuple(parts))

    def parse_and():
        nonlocal k
        parts = [parse_unary()]
        while peek()[0] == "&" and not peek()[1]:
            k += 1
            parts.append(parse_unary())
        return parts[0] if len(parts) == 1 else Conj(tuple(parts))

    def parse_unary():
        nonlocal k
        tok, is_word, at = peek()
        if tok is None:
            raise FormulaSyntaxError("unexpected end of formula")
        if is_word:
            k += 1
            if tok == "true":
                return TRUE
            if tok == "false":
                return FALSE
            return Atom(tok)
        if tok == "!":
            k += 1
            return Neg(parse_unary())
        if tok == "(":
            k += 1
            inner = parse_or()
            expect(")")
            return inner
        raise FormulaSyntaxError(f"unexpected {tok!r} at offset {at}")

    if not tokens:
        raise FormulaSyntaxError("empty formula")
    result = parse_or()
    if k != len(tokens):
        raise FormulaSyntaxError(f"trailing input at offset {tokens[k][2]}")
    return result


# ---------------------------------------------------------------------------
# Objectives


class _Ops:
    def __and__(self, other):
        return And((self, other))

    def __or__(self, other):
        return Or((self, other))

    def __invert__(self):
        return Not(self)


def _fs(states) -> frozenset:
    return frozenset(states)


@dataclass(frozen=True)
class Buchi(_Ops):
    """Plays visiting ``states`` infinitely often."""

    states: frozenset

    def __post_init__(self):
        object.__setattr__(self, "states", _fs(self.states))

    def holds(self, inf) -> bool:
        return not self.states.isdisjoint(inf)

    def __repr__(self):
        return f"Buchi({{{', '.join(map(str, _ordered(self.states)))}}})"


@dataclass(frozen=True)
class CoBuchi(_Ops):
    """Plays visiting ``states`` only finitely often."""

    states: frozenset

    def __post_init__(self):
        object.__setattr__(self, "states", _fs(self.states))

    def holds(self, inf) -> bool:
        return self.states.isdisjoint(inf)

    def __repr__(self):
        return f"CoBuchi({{{', '.join(map(str, _ordered(self.states)))}}})"


class Parity(_Ops):
    """Min-even parity: the least color seen infinitely often is even."""

    __slots__ = ("colors", "_hash")

    def __init__(self, colors: Mapping):
        colors = dict(colors)
        for s, c in colors.items():
            if not isinstance(c, int) or isinstance(c, bool) or c < 0:
                raise ObjectiveError(f"color of {s!r} must be a natural number, got {c!r}")
        object.__setattr__(self, "colors", colors)
        object.__setattr__(self, "_hash", hash(frozenset(colors.items())))

    def __setattr__(self, name, value):
        raise AttributeError("Parity is immutable")

    def __eq__(self, other):
        return isinstance(other, Parity) and self.colors == other.colors

    def __hash__(self):
        return self._hash

    def __repr__(self):
        body = ", ".join(f"{s}: {self.colors[s]}" for s in _ordered(self.colors))
        return f"Parity({{{body}}})"

    def holds(self, inf) -> bool:
        if not inf:
            return False
        try:
            return min(self.colors[s] for s in inf) % 2 == 0
        except KeyError as exc:
            raise ObjectiveError(f"state {exc.args[0]!r} has no color") from None

    def classes(self) -> dict:
        """color -> set of states carrying it"""
        out = {}
        for s, c in self.colors.items():
            out.setdefault(c, set()).add(s)
        return {c: frozenset(v) for c, v in sorted(out.items())}


def _pairs(pairs) -> tuple:
    return tuple((_fs(f), _fs(g)) for f, g in pairs)


@dataclass(frozen=True)
class Streett(_Ops):
    """Every pair (F, G): F finitely often or G infinitely often."""

    pairs: tuple

    def __post_init__(self):
        object.__setattr__(self, "pairs", _pairs(self.pairs))

    def holds(self, inf) -> bool:
        return all(f.isdisjoint(inf) or not g.isdisjoint(inf) for f, g in self.pairs)


@dataclass(frozen=True)
class Rabin(_Ops):
    """Some pair (F, G): F infinitely often and G finitely often."""

    pairs: tuple

    def __post_init__(self):
        object.__setattr__(self, "pairs", _pairs(self.pairs))

    def holds(self, inf) -> bool:
        return any(not f.isdisjoint(inf) and g.isdisjoint(inf) for f, g in self.pairs)


@dataclass(frozen=True)
class Muller(_Ops):
    """``inf`` satisfies a Boolean formula over states; kept in NNF."""

    formula: object

    def __post_init__(self):
        f = self.formula
        if isinstance(f, str):
            f = parse_formula(f)
        object.__setattr__(self, "formula", nnf(f))

    def holds(self, inf) -> bool:
        return evaluate(self.formula, inf)

    def __str__(self):
        return format_formula(self.formula)


LEAVES = (Buchi, CoBuchi, Parity, Streett, Rabin, Muller)


@dataclass(frozen=True)
class Not(_Ops):
    arg: object

    def holds(self, inf) -> bool:
        return not self.arg.holds(inf)


@dataclass(frozen=True)
class And(_Ops):
    """Intersection; the empty intersection is the set of all plays."""

    args: tuple

    def __post_init__(self):
        object.__setattr__(self, "args", tuple(self.args))

    def holds(self, inf) -> bool:
        return all(a.holds(inf) for a in self.args)


@dataclass(frozen=True)
class Or(_Ops):
    """Union; the empty union contains no play."""

    args: tuple

    def __post_init__(self):
        object.__setattr__(self, "args", tuple(self.args))

    def holds(self, inf) -> bool:
        return any(a.holds(inf) for a in self.args)


ALL_PLAYS = And(())
NO_PLAY = Or(())


def satisfies(lasso, e, arena=None) -> bool:
    """Whether the play ``lasso`` belongs to ``e``."""
    if arena is not None:
        check_states(e, arena)
        lasso.check(arena)
    return e.holds(lasso.inf)


# ---------------------------------------------------------------------------
# Structural helpers


def states_of(e) -> frozenset:
    """All states an objective expression mentions."""
    if isinstance(e, (Buchi, CoBuchi)):
        return e.states
    if isinstance(e, Parity):
        return frozenset(e.colors)
    if isinstance(e, (Streett, Rabin)):
        return frozenset().union(*(f | g for f, g in e.pairs))
    if isinstance(e, Muller):
        return formula_states(e.formula)
    if isinstance(e, Not):
        return states_of(e.arg)
    if isinstance(e, (And, Or)):
        return frozenset().union(*(states_of(a) for a in e.args))
    raise TypeError(f"not an objective: {e!r}")


def _leaves(e):
    if isinstance(e, Not):
        yield from _leaves(e.arg)
    elif isinstance(e, (And, Or)):
        for a in e.args:
            yield from _leaves(a)
    else:
        yield e


def check_states(e, arena) -> None:
    """Raise ForeignState for states outside ``arena``; parity must be total."""
    for s in states_of(e):
        if s not in arena:
            raise ForeignState(s)
    for leaf in _leaves(e):
        if isinstance(leaf, Parity):
            missing = [s for s in arena.states if s not in leaf.colors]
            if missing:
                raise ObjectiveError(f"parity coloring misses state {missing[0]!r}")


def map_states(e, fn: Callable[[object], Iterable]):
    """Relabel an expression: each state ``s`` becomes the states ``fn(s)``.

    Used to move objectives between an arena and its sub-arenas, index
    space, or product constructions.  Sets are mapped elementwise, so an
    objective keeps its meaning under any projection whose fibers are
    ``fn``.
    """
    cache = {}

    def m(states):
        out = set()
        for s in states:
            if s not in cache:
                cache[s] = tuple(fn(s))
            out.update(cache[s])
        return frozenset(out)

    def formula(f):
        if isinstance(f, Atom):
            return disj(*(Atom(t) for t in m((f.state,))))
        if isinstance(f, Const):
            return f
        if isinstance(f, Neg):
            return nnf(Neg(formula(f.arg)))
        if isinstance(f, Conj):
            return conj(*(formula(g) for g in f.args))
        return disj(*(formula(g) for g in f.args))

    def go(x):
        if isinstance(x, Buchi):
            return Buchi(m(x.states))
        if isinstance(x, CoBuchi):
            return CoBuchi(m(x.states))
        if isinstance(x, Parity):
            return Parity({t: c for s, c in x.colors.items() for t in m((s,))})
        if isinstance(x, Streett):
            return Streett([(m(f), m(g)) for f, g in x.pairs])
        if isinstance(x, Rabin):
            return Rabin([(m(f), m(g)) for f, g in x.pairs])
        if isinstance(x, Muller):
            return Muller(formula(x.formula))
        if isinstance(x, Not):
            return Not(go(x.arg))
        if isinstance(x, And):
            return And(tuple(go(a) for a in x.args))
        if isinstance(x, Or):
            return Or(tuple(go(a) for a in x.args))
        raise TypeError(f"not an objective: {x!r}")

    return go(e)


# ---------------------------------------------------------------------------
# Closure laws and translations


def negate(o):
    """Complement of a base objective, staying inside the class family."""
    if isinstance(o, Buchi):
        return CoBuchi(o.states)
    if isinstance(o, CoBuchi):
        return Buchi(o.states)
    if isinstance(o, Parity):
        return Parity({s: c + 1 for s, c in o.colors.items()})
    if isinstance(o, Streett):
        return Rabin(o.pairs)
    if isinstance(o, Rabin):
        return Streett(o.pairs)
    if isinstance(o, Muller):
        return Muller(nnf(Neg(o.formula)))
    raise TypeError(f"negate expects a base objective, got {o!r}")


def flatten_same_class(e):
    """Collapse unions of Buchi and intersections of co-Buchi into one leaf.

    Negated leaves are complemented first.  Returns None when no closure
    law applies.
    """
    if isinstance(e, LEAVES):
        return e
    if isinstance(e, Not):
        inner = flatten_same_class(e.arg)
        return negate(inner) if inner is not None else None
    if isinstance(e, (And, Or)):
        if not e.args:
            return None
        kind = Buchi if isinstance(e, Or) else CoBuchi
        parts = [flatten_same_class(a) for a in e.args]
        if len(parts) == 1:
            return parts[0]
        if all(isinstance(p, kind) for p in parts):
            return kind(frozenset().union(*(p.states for p in parts)))
        return None
    raise TypeError(f"not an objective: {e!r}")


def _buchi_formula(states):
    return disj(*(Atom(s) for s in _ordered(states)))


def _cobuchi_formula(states):
    return conj(*(Neg(Atom(s)) for s in _ordered(states)))


def _to_formula(e):
    if isinstance(e, Buchi):
        return _buchi_formula(e.states)
    if isinstance(e, CoBuchi):
        return _cobuchi_formula(e.states)
    if isinstance(e, Parity):
        classes = e.classes()
        terms = []
        below = set()
        for c, members in classes.items():
            if c % 2 == 0:
                terms.append(conj(_buchi_formula(members), _cobuchi_formula(below)))
            below |= members
        return disj(*terms)
    if isinstance(e, Streett):
        return conj(*(disj(_cobuchi_formula(f), _buchi_formula(g)) for f, g in e.pairs))
    if isinstance(e, Rabin):
        return disj(*(conj(_buchi_formula(f), _cobuchi_formula(g)) for f, g in e.pairs))
    if isinstance(e, Muller):
        return e.formula
    if isinstance(e, Not):
        return nnf(_to_formula(e.arg), False)
    if isinstance(e, And):
        return conj(*(_to_formula(a) for a in e.args))
    if isinstance(e, Or):
        return disj(*(_to_formula(a) for a in e.args))
    raise TypeError(f"not an objective: {e!r}")


def to_muller(e) -> Muller:
    """Equivalent Muller objective (formula linear in the size of ``e``)."""
    return Muller(_to_formula(e))


# Clauses ``(F, G)`` stand for coBuchi(F) | Buchi(G).  ``F is None`` means
# the clause has no co-Buchi literal (coBuchi of the whole state space,
# which is empty because every play visits some state infinitely often).
_CLAUSE_LIMIT = 4096


def _clause_union(c1, c2):
    f1, g1 = c1
    f2, g2 = c2
    g = g1 | g2
    if f1 is None:
        return (f2, g)
    if f2 is None or f1 == f2:
        return (f1, g)
    # coBuchi(F) | Buchi(G) is valid whenever F is empty or F is inside G
    for f in (f1, f2):
        if not f or f <= g:
            return (frozenset(), g)
    raise ShapeMismatch("a union of two distinct co-Buchi sets has no single Streett pair")


def _clauses(e, positive=True) -> list:
    if isinstance(e, Buchi):
        return [(None, e.states)] if positive else [(e.states, frozenset())]
    if isinstance(e, CoBuchi):
        return [(e.states, frozenset())] if positive else [(None, e.states)]
    if isinstance(e, Parity):
        if not positive:
            return _clauses(negate(e))
        out = []
        below_even = set()
        for c, members in e.classes().items():
            if c % 2:
                out.append((members, frozenset(below_even)))
            else:
                below_even |= members
        return out
    if isinstance(e, Streett):
        if positive:
            return list(e.pairs)
        return _clauses(Or(tuple(And((Buchi(f), CoBuchi(g))) for f, g in e.pairs)))
    if isinstance(e, Rabin):
        return _clauses(Streett(e.pairs), not positive)
    if isinstance(e, Muller):
        raise ShapeMismatch("Muller leaves have no Streett encoding here")
    if isinstance(e, Not):
        return _clauses(e.arg, not positive)
    if isinstance(e, (And, Or)):
        conjunctive = isinstance(e, And) == positive
        parts = [_clauses(a, positive) for a in e.args]
        if conjunctive:
            return [c for p in parts for c in p]
        out = [(None, frozenset())]
        for p in parts:
            if len(out) * len(p) > _CLAUSE_LIMIT:
                raise ShapeMismatch("clause expansion too large")
            out = [_clause_union(a, b) for a, b in product(out, p)]
        return out
    raise TypeError(f"not an objective: {e!r}")


def _pair_list(clauses, universe) -> list:
    pairs = []
    for f, g in clauses:
        if f is None:
            if universe is None:
                raise ShapeMismatch("encoding needs the state universe for padding")
            f = frozenset(universe)
        pair = (f, g)
        if pair not in pairs:
            pairs.append(pair)
    return pairs


def streett_encoding(e, universe=None) -> Streett:
    """A single Streett objective equivalent to ``e``.

    Works for any expression that normalizes to a conjunction of clauses
    ``coBuchi(F) | Buchi(G)``; in particular both deviation-guard shapes
    over Buchi leaves.  Clauses without a co-Buchi literal are padded with
    ``coBuchi(universe)``, so ``universe`` must be the arena's state set
    whenever such a clause occurs.
    """
    return Streett(_pair_list(_clauses(e), universe))


def rabin_encoding(e, universe=None) -> Rabin:
    """A single Rabin objective equivalent to ``e`` (dual of streett_encoding)."""
    return Rabin(_pair_list(_clauses(e, positive=False), universe))


def atomize(e):
    """Compile ``e`` over a finite family of state sets ("atoms").

    Returns ``(atoms, evaluate)`` where ``atoms`` is a list of frozensets and
    ``evaluate(mask)`` decides ``e`` knowing only which atoms meet ``inf``
    (bit ``k`` of ``mask`` set iff ``atoms[k]`` meets ``inf``).
    """
    atoms = []
    registry = {}

    def atom(states) -> int:
        states = frozenset(states)
        if states not in registry:
            registry[states] = len(atoms)
            atoms.append(states)
        return registry[states]

    def hit(states):
        if not states:
            return lambda mask: False
        bit = 1 << atom(states)
        return lambda mask: bool(mask & bit)

    def formula(f):
        if isinstance(f, Atom):
            return hit((f.state,))
        if isinstance(f, Const):
            v = f.value
            return lambda mask: v
        if isinstance(f, Neg):
            g = formula(f.arg)
            return lambda mask: not g(mask)
        gs = [formula(g) for g in f.args]
        if isinstance(f, Conj):
            return lambda mask: all(g(mask) for g in gs)
        return lambda mask: any(g(mask) for g in gs)

    def go(x):
        if isinstance(x, Buchi):
            return hit(x.states)
        if isinstance(x, CoBuchi):
            g = hit(x.states)
            return lambda mask: not g(mask)
        if isinstance(x, Parity):
            table = [(c % 2 == 0, 1 << atom(members)) for c, members in x.classes().items()]

            def parity(mask):
                for even, bit in table:
                    if mask & bit:
                        return even
                return False

            return parity
        if isinstance(x, (Streett, Rabin)):
            tests = [(hit(f), hit(g)) for f, g in x.pairs]
            if isinstance(x, Streett):
                return lambda mask: all(not tf(mask) or tg(mask) for tf, tg in tests)
            return lambda mask: any(tf(mask) and not tg(mask) for tf, tg in tests)
        if isinstance(x, Muller):
            return formula(x.formula)
        if isinstance(x, Not):
            g = go(x.arg)
            return lambda mask: not g(mask)
        gs = [go(a) for a in x.args]
        if isinstance(x, And):
            return lambda mask: all(g(mask) for g in gs)
        if isinstance(x, Or):
            return lambda mask: any(g(mask) for g in gs)
        raise TypeError(f"not an objective: {x!r}")

    evaluate_mask = go(e)
    return atoms, evaluate_mask
