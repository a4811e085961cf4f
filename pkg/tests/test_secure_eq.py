import dataclasses
import itertools
import random

import pytest
from hypothesis import given
from hypothesis import strategies as st

from gen import random_arena, random_game, random_lasso
from secureq.arena import Lasso, validate_arena
from secureq.errors import NoWitness, PlayerOutOfRange, UnknownState
from secureq.objectives import And, Buchi, CoBuchi, Not, Or, Parity
from secureq.oracle import verify_se
from secureq.secure_eq import (
    Constraint,
    MooreStrategy,
    StrategyProfile,
    build_witness,
    compute_a_v,
    compute_se_v,
    decide_constrained_se,
    deviation_guard,
    guard_regions,
    outcome,
    payoff,
    prefers,
)
from secureq.zero_sum import coalition_region

profiles = st.integers(1, 4).flatmap(
    lambda n: st.tuples(st.integers(1, n), st.tuples(*[st.integers(0, 1)] * n), st.tuples(*[st.integers(0, 1)] * n))
)


def one_state(objective):
    a = validate_arena({"players": 1, "states": ["s"], "owner": {"s": 1}, "edges": [("s", "s")]})
    return a, [objective]


def all_inf_sets(states):
    for r in range(1, len(states) + 1):
        yield from (frozenset(c) for c in itertools.combinations(states, r))


class TestConstraint:
    def test_parse(self):
        v = Constraint.parse("101")
        assert v.bits == (1, 0, 1) and v.winners == {1, 3} and v.losers == {2}
        assert str(v) == "101"

    @pytest.mark.parametrize("text", ["", "12", "1a"])
    def test_bad(self, text):
        with pytest.raises(ValueError):
            Constraint.parse(text)


class TestPrefers:
    def test_not_better_for_deviator(self):
        assert not prefers(1, (1, 1, 1), (0, 1, 0))

    def test_others_dropping(self):
        assert prefers(1, (1, 1, 1), (1, 0, 1))

    @given(profiles)
    def test_irreflexive_antisymmetric(self, case):
        i, v, w = case
        assert not prefers(i, v, v)
        assert not (prefers(i, v, w) and prefers(i, w, v))

    def test_lengths(self):
        with pytest.raises(ValueError):
            prefers(1, (1,), (1, 0))


class TestPayoff:
    def test_fig1(self, fig1):
        _, phi = fig1
        assert payoff(Lasso((), ("s0", "s1", "s2")), phi) == (1, 1, 1)
        assert payoff(Lasso(("s0", "s2"), ("s5",)), phi) == (0, 1, 0)

    def test_empty_profile(self):
        with pytest.raises(PlayerOutOfRange):
            payoff(Lasso((), ("s",)), [])


def test_outcome_single_state():
    a, _ = one_state(Buchi({"s"}))
    st1 = MooreStrategy(1, (0,), 0, {(0, "s"): 0}, {(0, "s"): "s"})
    assert outcome(a, StrategyProfile((st1,)), "s") == Lasso((), ("s",))


class TestDeviationGuard:
    def test_fig1_winner(self, fig1):
        a, phi = fig1
        guard = deviation_guard(phi, "111", 3)
        expected = Or((And(tuple(phi)), Not(phi[2])))
        for inf in all_inf_sets(a.states):
            assert guard.holds(inf) == expected.holds(inf)

    def test_single_winner_tautology(self):
        g = deviation_guard([Buchi({"a"})], (1,), 1)
        assert g.holds({"a"}) and g.holds({"b"})

    def test_two_players_loser(self):
        phi = [Buchi({"a"}), Buchi({"b"})]
        g = deviation_guard(phi, (1, 0), 2)
        for inf in all_inf_sets(["a", "b", "c"]):
            assert g.holds(inf) == (phi[0].holds(inf) and not phi[1].holds(inf))

    @given(st.integers(0, 10**6))
    def test_guard_is_complement_of_preferred(self, seed):
        rng = random.Random(seed)
        n = rng.randint(1, 3)
        states = ["a", "b", "c", "d"]
        phi = [Buchi(frozenset(rng.sample(states, 2))) for _ in range(n)]
        v = tuple(rng.randint(0, 1) for _ in range(n))
        i = rng.randint(1, n)
        for inf in all_inf_sets(states):
            w = tuple(int(o.holds(inf)) for o in phi)
            assert deviation_guard(phi, v, i).holds(inf) == (not prefers(i, v, w))

    def test_player_range(self, fig1):
        _, phi = fig1
        with pytest.raises(PlayerOutOfRange):
            deviation_guard(phi, "111", 4)


class TestRegions:
    def test_fig1_a_v(self, fig1):
        a, phi = fig1
        assert compute_a_v(a, phi, "111") == {"s0", "s1", "s2"}
        regions = guard_regions(a, phi, "111")
        assert regions[3] == {"s0", "s1", "s2", "s4", "s5"}
        assert regions[1] == {"s0", "s1", "s2", "s3", "s5"}
        assert regions[2] == {"s0", "s1", "s2", "s3", "s4"}

    def test_fig1_se(self, fig1):
        a, phi = fig1
        assert compute_se_v(a, phi, "111") == {"s0", "s1", "s2"}

    def test_single_player_tautology(self):
        a, phi = one_state(Buchi({"s"}))
        assert compute_a_v(a, phi, (1,)) == {"s"}

    def test_unsatisfiable_conforming_objective(self):
        a = validate_arena({"players": 2, "states": ["s"], "owner": {"s": 1}, "edges": [("s", "s")]})
        shared = Buchi({"s"})
        assert compute_se_v(a, [shared, shared], (1, 0)) == set()

    def test_a_v_via_muller_route(self):
        rng = random.Random(31)
        for _ in range(100):
            a = random_arena(rng, 5, 2)
            phi = [Buchi(frozenset(s for s in a.states if rng.random() < 0.4)) for _ in range(2)]
            v = (rng.randint(0, 1), rng.randint(0, 1))
            direct = set(a.states)
            for i in (1, 2):
                direct &= coalition_region(a, {1, 2} - {i}, deviation_guard(phi, v, i), route="muller")
            assert compute_a_v(a, phi, v) == direct


class TestDecide:
    def test_fig1(self, fig1):
        a, phi = fig1
        assert decide_constrained_se(a, phi, "s0", "111")
        assert not decide_constrained_se(a, phi, "s3", "111")

    def test_forced_win(self):
        a, phi = one_state(Buchi({"s"}))
        assert not decide_constrained_se(a, phi, "s", (0,))
        assert decide_constrained_se(a, phi, "s", (1,))

    def test_unknown_state(self, fig1):
        a, phi = fig1
        with pytest.raises(UnknownState):
            decide_constrained_se(a, phi, "s9", "111")


class TestWitness:
    def test_fig1_cooperation_cycle(self, fig1):
        a, phi = fig1
        w = build_witness(a, phi, "s0", "111")
        play = outcome(a, w, "s0")
        assert payoff(play, phi) == (1, 1, 1)
        cycle = play.cycle
        k = cycle.index("s0")
        assert cycle[k:] + cycle[:k] in (("s0", "s1", "s2"), ("s0", "s2", "s1"))
        assert verify_se(a, phi, w, "s0") is None

    @pytest.mark.parametrize("target", ["s2", "s3"])
    def test_fig1_deviation_is_not_profitable(self, fig1, target):
        a, phi = fig1
        w = build_witness(a, phi, "s0", "111")
        deviator = w[1]
        moves = {key: (target if key[1] == "s0" else succ) for key, succ in deviator.moves.items()}
        play = outcome(a, w.replace(dataclasses.replace(deviator, moves=moves)), "s0")
        assert play.prefix(2) == ["s0", target]
        assert not prefers(1, (1, 1, 1), payoff(play, phi))

    def test_fig1_winning_deviator_is_punished(self, fig1):
        a, phi = fig1
        w = build_witness(a, phi, "s0", "111")
        deviator = w[1]
        moves = {key: ("s2" if key[1] == "s0" else succ) for key, succ in deviator.moves.items()}
        play = outcome(a, w.replace(dataclasses.replace(deviator, moves=moves)), "s0")
        assert play.inf == {"s5"}
        assert payoff(play, phi) == (0, 1, 0)

    def test_metadata_lists_retaliation_modes(self, fig1):
        a, phi = fig1
        w = build_witness(a, phi, "s3", "001")
        assert set(w.metadata["retaliation_memory"]) == {"1:guard", "2:guard", "3:guard", "3:strict"}

    def test_no_witness(self, fig1):
        a, phi = fig1
        with pytest.raises(NoWitness):
            build_witness(a, phi, "s3", "111")

    def test_single_player(self):
        a = validate_arena({"players": 1, "states": ["x", "y"], "owner": {"x": 1, "y": 1},
                            "edges": [("x", "y"), ("y", "y"), ("x", "x")]})
        phi = [Buchi({"y"})]
        w = build_witness(a, phi, "x", (1,))
        assert outcome(a, w, "x").inf == {"y"}
        assert verify_se(a, phi, w, "x") is None
        assert w.metadata["cooperation_lasso"] == {"stem": ["x"], "cycle": ["y"]}

    def test_random_positive_instances(self):
        rng = random.Random(41)
        built = 0
        while built < 50:
            a, phi = random_game(rng, 6)
            v = tuple(rng.randint(0, 1) for _ in range(a.n))
            se = compute_se_v(a, phi, v)
            for s in a.sort(se):
                w = build_witness(a, phi, s, v)
                assert payoff(outcome(a, w, s), phi) == v
                assert verify_se(a, phi, w, s) is None
                built += 1


@pytest.mark.parametrize("seed", range(5))
def test_two_player_parity_identity(seed):
    rng = random.Random(seed)
    for _ in range(20):
        a = random_arena(rng, rng.randint(2, 7), 2)
        p1 = Parity({s: rng.randint(0, 4) for s in a.states})
        p2 = Parity({s: rng.randint(0, 4) for s in a.states})
        se = compute_se_v(a, [p1, Not(p2)], (1, 0))
        assert se == coalition_region(a, {1}, And((p1, p2)))
