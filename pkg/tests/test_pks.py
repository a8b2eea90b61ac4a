import random

import pytest

from helpers import FIXTURES, random_pks
from tpcheck import ModelError, ParseError, PreconditionError, Tri
from tpcheck.pks import (
    OPTIMISTIC,
    PESSIMISTIC,
    Pks,
    approximate,
    complement_closure,
    completions,
    is_refinement,
    is_revision,
    load_pks,
    model_size,
    parse_pks,
    refinement_violations,
    relabel_states,
    require_valid,
    serialize_pks,
    validate,
)

T, F, U = Tri.TRUE, Tri.FALSE, Tri.UNKNOWN


@pytest.fixture
def vacuum():
    return load_pks(FIXTURES / "vacuum.pks")


def test_vacuum_is_valid(vacuum):
    assert validate(vacuum) == []
    assert vacuum.states == ("OFF", "IDLE", "MOVING", "CLEANING")
    assert vacuum.successors("IDLE") == ("OFF", "IDLE", "MOVING")


def test_missing_successor_is_reported():
    m = Pks.build("m", ["s", "t"], ["p"], ["s"], [("s", "t")], {"s": {"p": "T"}, "t": {"p": "F"}})
    assert validate(m) == ["not left-total at t"]
    with pytest.raises(ModelError) as err:
        require_valid(m)
    assert err.value.diagnostics == ["not left-total at t"]


def test_empty_init_and_dangling_references():
    m = Pks("m", ("s",), ("p",), (), (("s", "s"), ("s", "x")), {("s", "p"): T})
    diags = validate(m)
    assert "no initial state" in diags
    assert any("unknown state x" in d for d in diags)
    m2 = Pks("m", ("s",), ("p",), ("s",), (("s", "s"),), {})
    assert validate(m2) == ["missing label for p at s"]


def test_round_trip_is_bit_exact(vacuum):
    text = serialize_pks(vacuum)
    again = parse_pks(text)
    assert again == vacuum
    assert serialize_pks(again) == text


def test_round_trip_random():
    rng = random.Random(3)
    for _ in range(50):
        m = random_pks(rng)
        assert parse_pks(serialize_pks(m)) == m


@pytest.mark.parametrize(
    "text, line",
    [
        ("ap p\n", 1),
        ("pks m\nstate s p=T\n", 2),
        ("pks m\nap p\nstate s p=X\n", 3),
        ("pks m\nap p q\nstate s p=T\n", 3),
        ("pks m\nap p\nstate s p=T\ntrans s\n", 4),
        ("pks m\nap p\nstate s p=T\nstate s p=F\n", 4),
        ("pks m\nap p\nfoo\n", 3),
    ],
)
def test_parse_errors_have_line_numbers(text, line):
    with pytest.raises(ParseError) as err:
        parse_pks(text)
    assert err.value.line == line


def test_complement_closure_of_idle(vacuum):
    mc = complement_closure(vacuum)
    got = {p: mc.label("IDLE", p) for p in mc.ap}
    assert got == {
        "move": F, "~move": T, "suck": F, "~suck": T,
        "on": T, "~on": F, "reached": U, "~reached": U,
    }
    for s in mc.states:
        for p in vacuum.ap:
            assert mc.label(s, p) == mc.label(s, "~" + p).comp()


def test_closure_of_all_true_state_and_twice():
    m = Pks.build("m", ["s"], ["p", "q"], ["s"], [("s", "s")], {"s": {"p": "T", "q": "T"}})
    mc = complement_closure(m)
    assert mc.label("s", "~p") is F and mc.label("s", "~q") is F
    with pytest.raises(PreconditionError):
        complement_closure(mc)


def test_approximations(vacuum):
    mc = complement_closure(vacuum)
    pes, opt = approximate(mc, PESSIMISTIC), approximate(mc, OPTIMISTIC)
    assert (pes.label("MOVING", "suck"), pes.label("MOVING", "~suck")) == (F, F)
    assert (opt.label("MOVING", "suck"), opt.label("MOVING", "~suck")) == (T, T)
    assert pes.is_ks and opt.is_ks
    for key, v in mc.labels.items():
        if v.definite:
            assert pes.labels[key] is v and opt.labels[key] is v
    with pytest.raises(PreconditionError):
        approximate(vacuum, OPTIMISTIC)


def test_approximating_a_ks_changes_nothing():
    m = Pks.build("k", ["s"], ["p"], ["s"], [("s", "s")], {"s": {"p": "T"}})
    mc = complement_closure(m)
    assert approximate(mc, OPTIMISTIC) == mc == approximate(mc, PESSIMISTIC)


def test_refinement_examples(vacuum):
    assert is_refinement(vacuum, vacuum.with_labels({("MOVING", "suck"): F}))
    assert is_refinement(vacuum, vacuum)
    flipped = vacuum.with_labels({("OFF", "on"): T})
    assert not is_refinement(vacuum, flipped)
    assert refinement_violations(vacuum, flipped) == ["label of on at OFF changed from F to T"]


def test_revision_examples(vacuum):
    assert is_revision(vacuum, vacuum.with_labels({("MOVING", "suck"): T}))
    smaller = Pks("m", vacuum.states, ("move", "suck", "on"), vacuum.init, vacuum.transitions,
                  {k: v for k, v in vacuum.labels.items() if k[1] != "reached"})
    assert not is_revision(vacuum, smaller)
    bigger = Pks("m", vacuum.states + ("X",), vacuum.ap, vacuum.init,
                 vacuum.transitions + (("X", "X"),),
                 {**vacuum.labels, **{("X", p): F for p in vacuum.ap}})
    assert is_revision(vacuum, bigger)


def test_refinement_implies_revision_randomized():
    rng = random.Random(11)
    for _ in range(100):
        m = random_pks(rng)
        changes = {k: rng.choice((T, F)) for k in m.unknowns() if rng.random() < 0.5}
        m2 = m.with_labels(changes)
        assert is_refinement(m, m2) and is_revision(m, m2)


def test_completions(vacuum):
    comps = list(completions(vacuum))
    assert len(comps) == 16
    assert len({serialize_pks(k) for k in comps}) == 16
    for k in comps:
        assert k.is_ks and is_refinement(vacuum, k)
    # state-then-proposition order, F before T, last unknown fastest
    assert vacuum.unknowns() == [("IDLE", "reached"), ("MOVING", "suck"), ("MOVING", "reached"), ("CLEANING", "move")]
    assert comps[1].label("CLEANING", "move") is T and comps[1].label("IDLE", "reached") is F
    ks = comps[0]
    assert list(completions(ks)) == [ks]


def test_completion_bound():
    states = [f"s{i}" for i in range(13)]
    m = Pks.build("m", states, ["p"], ["s0"], [(s, s) for s in states], {s: {"p": "?"} for s in states})
    with pytest.raises(PreconditionError):
        completions(m)
    assert sum(1 for _ in completions(m, bound=13)) == 2 ** 13


def test_model_size(vacuum):
    assert model_size(vacuum) == 26
    one = Pks("one", ("s",), (), ("s",), (("s", "s"),), {})
    assert model_size(one) == 2
    rng = random.Random(5)
    for _ in range(20):
        m = random_pks(rng)
        order = list(m.states)
        rng.shuffle(order)
        assert model_size(relabel_states(m, order)) == model_size(m)


def test_callee_dimensions_formula():
    # |AP|=3, |S|=5, |R|=15, |S0|=1
    states = [f"s{i}" for i in range(5)]
    trans = [(s, t) for s in states for t in states][:15]
    m = Pks("callee", tuple(states), ("a", "b", "c"), ("s0",), tuple(trans),
            {(s, p): F for s in states for p in "abc"})
    assert model_size(m) == 31
