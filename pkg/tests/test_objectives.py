import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from gen import random_boolean, random_guard, random_lasso, random_leaf
from secureq.arena import Lasso
from secureq.errors import FormulaSyntaxError, ForeignState, ObjectiveError, ShapeMismatch
from secureq.objectives import (
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
    atomize,
    flatten_same_class,
    format_formula,
    map_states,
    negate,
    parse_formula,
    rabin_encoding,
    satisfies,
    streett_encoding,
    to_muller,
)

STATES = ["a", "b", "c", "d", "e"]
subsets = st.frozensets(st.sampled_from(STATES))
lassos = st.builds(
    Lasso,
    st.lists(st.sampled_from(STATES), max_size=3),
    st.lists(st.sampled_from(STATES), min_size=1, max_size=5),
)
colorings = st.fixed_dictionaries({s: st.integers(0, 6) for s in STATES})


class TestClosureLaws:
    @given(lassos, subsets)
    def test_not_buchi_is_cobuchi(self, lasso, b):
        assert satisfies(lasso, Not(Buchi(b))) == satisfies(lasso, CoBuchi(b))

    @given(lassos, subsets, subsets)
    def test_buchi_union(self, lasso, b1, b2):
        assert satisfies(lasso, Or((Buchi(b1), Buchi(b2)))) == satisfies(lasso, Buchi(b1 | b2))

    @given(lassos, subsets, subsets)
    def test_cobuchi_intersection(self, lasso, b1, b2):
        assert satisfies(lasso, And((CoBuchi(b1), CoBuchi(b2)))) == satisfies(lasso, CoBuchi(b1 | b2))

    @given(lassos, colorings)
    def test_not_parity_shifts_colors(self, lasso, colors):
        shifted = Parity({s: c + 1 for s, c in colors.items()})
        assert satisfies(lasso, Not(Parity(colors))) == satisfies(lasso, shifted)


def test_fig1_cooperation_cycle_payoff(fig1):
    a, phi = fig1
    lasso = Lasso((), ("s0", "s1", "s2"))
    assert satisfies(lasso, Buchi({"s2", "s4"}), a)
    assert [satisfies(lasso, o, a) for o in phi] == [True, True, True]


def test_fig1_sink_payoff(fig1):
    a, phi = fig1
    lasso = Lasso(("s0", "s2"), ("s5",))
    assert satisfies(lasso, Buchi({"s0", "s5"}), a)
    assert not satisfies(lasso, Buchi({"s2", "s4"}), a)
    assert [int(satisfies(lasso, o, a)) for o in phi] == [0, 1, 0]


@given(lassos)
def test_empty_buchi_never_holds(lasso):
    assert not satisfies(lasso, Buchi(()))
    assert satisfies(lasso, CoBuchi(()))
    assert satisfies(lasso, ALL_PLAYS) and not satisfies(lasso, NO_PLAY)


def test_foreign_state_rejected(fig1):
    a, _ = fig1
    with pytest.raises(ForeignState):
        satisfies(Lasso((), ("s0", "s1", "s2")), Buchi({"s7"}), a)


def test_parity_colors_must_be_natural():
    with pytest.raises(ObjectiveError):
        Parity({"a": -1})


def test_pair_conditions():
    inf = {"a", "b"}
    assert Streett([({"a"}, {"b"})]).holds(inf)
    assert not Streett([({"a"}, {"c"})]).holds(inf)
    assert Rabin([({"a"}, {"c"})]).holds(inf)
    assert not Rabin([({"a"}, {"b"})]).holds(inf)


class TestNegate:
    def test_buchi(self):
        assert negate(Buchi({"s2", "s4"})) == CoBuchi({"s2", "s4"})

    def test_parity(self):
        assert negate(Parity({"a": 0, "b": 1})) == Parity({"a": 1, "b": 2})

    @settings(max_examples=200)
    @given(st.integers(0, 10**6), subsets)
    def test_double_negation(self, seed, inf):
        rng = random.Random(seed)
        o = random_leaf(rng, STATES, ("buchi", "cobuchi", "parity"))
        if inf:
            assert negate(negate(o)).holds(inf) == o.holds(inf)
            assert negate(o).holds(inf) != o.holds(inf)

    @given(subsets)
    def test_pairs_and_muller(self, inf):
        if not inf:
            return
        s = Streett([({"a"}, {"b"}), ({"c"}, set())])
        assert negate(s).holds(inf) != s.holds(inf)
        m = Muller("a & !b | c")
        assert negate(m).holds(inf) != m.holds(inf)


class TestFlatten:
    def test_buchi_union(self):
        e = Or((Buchi({"s0", "s5"}), Buchi({"s1", "s3"})))
        assert flatten_same_class(e) == Buchi({"s0", "s1", "s3", "s5"})

    def test_cobuchi_intersection(self):
        assert flatten_same_class(And((CoBuchi({"a"}), CoBuchi({"b"})))) == CoBuchi({"a", "b"})

    def test_leaf(self):
        assert flatten_same_class(Parity({"a": 1})) == Parity({"a": 1})

    def test_not_flattenable(self):
        assert flatten_same_class(And((Buchi({"a"}), Buchi({"b"})))) is None


class TestMuller:
    def test_buchi_formula(self):
        assert format_formula(to_muller(Buchi({"s2", "s4"})).formula) == "s2 | s4"

    def test_parity_formula(self):
        assert format_formula(to_muller(Parity({"a": 0, "b": 1})).formula) == "a"

    def test_cross_evaluation(self):
        rng = random.Random(11)
        for _ in range(200):
            leaves = [random_leaf(rng, STATES, ("buchi", "cobuchi", "parity")) for _ in range(2)]
            e = random_boolean(rng, leaves)
            lasso = random_lasso(rng, STATES)
            assert satisfies(lasso, e) == satisfies(lasso, to_muller(e))

    def test_pair_translation(self):
        rng = random.Random(12)
        for _ in range(100):
            pairs = [(rng.sample(STATES, 2), rng.sample(STATES, 1)) for _ in range(2)]
            for o in (Streett(pairs), Rabin(pairs)):
                lasso = random_lasso(rng, STATES)
                assert satisfies(lasso, o) == satisfies(lasso, to_muller(o))


class TestFormulaSyntax:
    @pytest.mark.parametrize(
        "text, inf, expected",
        [
            ("a & b | c", {"c"}, True),
            ("a & (b | c)", {"c"}, False),
            ("!a & !b", {"c"}, True),
            ("!(a | b)", {"a"}, False),
            ("true", set(), True),
            ("false | a", {"a"}, True),
        ],
    )
    def test_precedence(self, text, inf, expected):
        assert Muller(text).holds(inf) is expected

    @pytest.mark.parametrize("text", ["a &", "(a | b", "a b", "|", ""])
    def test_errors(self, text):
        with pytest.raises(FormulaSyntaxError):
            parse_formula(text)

    @given(subsets)
    def test_round_trip(self, inf):
        f = parse_formula("!(a & b) | c & !d | e")
        assert parse_formula(format_formula(f)) is not None
        assert Muller(format_formula(f)).holds(inf) == Muller(f).holds(inf)


class TestStreettEncoding:
    B1, B2, B3 = {"s2", "s4"}, {"s0", "s5"}, {"s1", "s3"}

    def test_fig1_guard(self):
        phi = [Buchi(self.B1), Buchi(self.B2), Buchi(self.B3)]
        guard = Or((And(tuple(phi)), Not(phi[2])))
        enc = streett_encoding(guard, frozenset().union(self.B1, self.B2, self.B3))
        pairs = {(frozenset(f), frozenset(g)) for f, g in enc.pairs}
        expected = {(frozenset(self.B3), frozenset(b)) for b in (self.B1, self.B2, self.B3)}
        assert pairs == expected

    def test_singleton_winner_is_tautology(self):
        w = Buchi({"a", "b"})
        enc = streett_encoding(Or((And((w,)), Not(w))), frozenset(STATES))
        assert enc.pairs == ((frozenset({"a", "b"}), frozenset({"a", "b"})),)
        for r in range(1, 4):
            assert enc.holds(set(STATES[:r]))

    def test_random_guards(self):
        rng = random.Random(21)
        for _ in range(200):
            phi = [Buchi(frozenset(rng.sample(STATES, rng.randint(0, 3)))) for _ in range(3)]
            guard, _, _ = random_guard(rng, phi)
            enc = streett_encoding(guard, frozenset(STATES))
            lasso = random_lasso(rng, STATES)
            assert satisfies(lasso, enc) == satisfies(lasso, guard)

    def test_shape_mismatch(self):
        with pytest.raises(ShapeMismatch):
            streett_encoding(Or((CoBuchi({"a"}), CoBuchi({"b"}))), frozenset(STATES))


class TestRabinEncoding:
    def test_cobuchi_guard_pairs(self):
        c1, c2 = CoBuchi({"a"}), CoBuchi({"b"})
        universe = frozenset({"a", "b", "c"})
        guard = Or((And((c1,)), Or((c2,)), Not(c1)))
        enc = rabin_encoding(guard, universe)
        pairs = {(frozenset(f), frozenset(g)) for f, g in enc.pairs}
        assert pairs == {(universe, frozenset({"a"})), (universe, frozenset({"b"})), (frozenset({"a"}), frozenset())}

    def test_tautology(self):
        c = CoBuchi({"a"})
        enc = rabin_encoding(Or((And((c,)), Not(c))), frozenset(STATES))
        for r in range(1, 6):
            assert enc.holds(set(STATES[:r]))

    def test_random_guards(self):
        rng = random.Random(22)
        for _ in range(200):
            phi = [CoBuchi(frozenset(rng.sample(STATES, rng.randint(0, 3)))) for _ in range(3)]
            guard, _, _ = random_guard(rng, phi)
            enc = rabin_encoding(guard, frozenset(STATES))
            lasso = random_lasso(rng, STATES)
            assert satisfies(lasso, enc) == satisfies(lasso, guard)


@settings(max_examples=100, deadline=None)
@given(st.integers(0, 10**6))
def test_only_inf_matters(seed):
    rng = random.Random(seed)
    leaves = [random_leaf(rng, STATES) for _ in range(2)]
    e = random_boolean(rng, leaves)
    lasso = random_lasso(rng, STATES)
    pumped = Lasso(lasso.stem + lasso.cycle * 2, lasso.cycle)
    assert satisfies(lasso, e) == satisfies(lasso.rotate(rng.randint(0, 4)), e) == satisfies(pumped, e)


@settings(max_examples=100, deadline=None)
@given(st.integers(0, 10**6), subsets)
def test_atoms_evaluate_like_expression(seed, inf):
    rng = random.Random(seed)
    e = random_boolean(rng, [random_leaf(rng, STATES) for _ in range(3)])
    atoms, evaluate = atomize(e)
    mask = sum(1 << k for k, atom in enumerate(atoms) if not atom.isdisjoint(inf))
    if inf:
        assert evaluate(mask) == e.holds(inf)


def test_map_states_relabels():
    e = Or((Buchi({"a"}), Not(Parity({"a": 0, "b": 1}))))
    lifted = map_states(e, lambda s: [(s, 0), (s, 1)])
    assert lifted.holds({("a", 1)}) == e.holds({"a"})
    assert lifted.holds({("b", 0)}) == e.holds({"b"})
