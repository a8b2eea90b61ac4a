import random

import pytest

from helpers import FIXTURES, brute_force_sat, is_path, random_formula, random_pks, state_lassos, trace
from tpcheck import PreconditionError, ResourceLimitExceeded
from tpcheck.automata import accepting_lasso, ltl_to_gba
from tpcheck.ltl import (
    And,
    Atom,
    Finally,
    Globally,
    Lasso,
    Not,
    eval_classical,
    parse_properties,
    tau_transform,
)
from tpcheck.pks import OPTIMISTIC, PESSIMISTIC, Pks, approximate, complement_closure, load_pks
from tpcheck.sat import SnfProblem, check_star, property_automaton, sat, sat_formula
from tpcheck.snf import EVENTUALITY, GLOBAL, INITIAL, Lit, SnfClause, conjunction_formula

p = Lit("p")
np_ = Lit("p", False)


def props():
    return dict(parse_properties((FIXTURES / "vacuum.ltl").read_text()))


def approximations():
    mc = complement_closure(load_pks(FIXTURES / "vacuum.pks"))
    return approximate(mc, PESSIMISTIC), approximate(mc, OPTIMISTIC)


# -- clause sets --------------------------------------------------------------


def test_immediate_contradiction():
    assert not sat([SnfClause(INITIAL, (p,)), SnfClause(INITIAL, (np_,))]).satisfiable


def test_constant_p_word():
    res = sat([SnfClause(INITIAL, (p,)), SnfClause(GLOBAL, (np_,), (p,))])
    assert res.satisfiable
    assert res.witness == Lasso((), ({"p": True},))


def test_always_not_p_contradicts_initial_p():
    clauses = [SnfClause(INITIAL, (p,)), SnfClause(GLOBAL, (np_,), (p,)), SnfClause(GLOBAL, (np_, np_))]
    assert not sat(clauses).satisfiable
    assert brute_force_sat(conjunction_formula(clauses), ["p"], 3) is None


def test_eventuality_must_be_met():
    # p forever, and whenever q is false eventually !p
    clauses = [
        SnfClause(INITIAL, (p,)),
        SnfClause(GLOBAL, (np_,), (p,)),
        SnfClause(EVENTUALITY, (Lit("q"),), ev=np_),
    ]
    res = sat(clauses)
    assert res.satisfiable and all(v["q"] for v in res.witness.items())
    clauses.append(SnfClause(GLOBAL, (Lit("q", False),)))
    assert not sat(clauses).satisfiable


def test_empty_clause_set_and_false_clause():
    assert sat([]).satisfiable
    assert not sat([SnfClause(GLOBAL, ())]).satisfiable
    assert not sat([SnfClause(INITIAL, ())]).satisfiable


def random_clause(rng, names):
    def lits(k):
        return tuple(Lit(rng.choice(names), rng.random() < 0.5) for _ in range(k))

    kind = rng.choice([INITIAL, GLOBAL, GLOBAL, EVENTUALITY])
    if kind == INITIAL:
        return SnfClause(INITIAL, lits(rng.randint(0, 2)))
    if kind == GLOBAL:
        return SnfClause(GLOBAL, lits(rng.randint(0, 2)), lits(rng.randint(0, 2)))
    return SnfClause(EVENTUALITY, lits(rng.randint(0, 2)), ev=lits(1)[0])


def test_against_bounded_lasso_oracle():
    rng = random.Random(17)
    names = ["p", "q", "r"]
    agree = {True: 0, False: 0}
    for _ in range(150):
        clauses = [random_clause(rng, names) for _ in range(rng.randint(1, 5))]
        res = sat(clauses)
        f = conjunction_formula(clauses)
        used = sorted({v for c in clauses for v in c.variables()})
        found = brute_force_sat(f, used, 3)
        if found is not None:
            assert res.satisfiable
        if res.satisfiable:
            assert eval_classical(f, res.witness)
        agree[res.satisfiable] += 1
    assert agree[True] and agree[False]


def test_variable_limit():
    clauses = [SnfClause(INITIAL, (Lit(f"v{i}"),)) for i in range(6)]
    with pytest.raises(ResourceLimitExceeded):
        sat(clauses, max_vars=5)


def test_problem_solves_subsets():
    clauses = [SnfClause(INITIAL, (p,)), SnfClause(INITIAL, (np_,)), SnfClause(GLOBAL, (Lit("q", False),), (Lit("q"),))]
    prob = SnfProblem(clauses)
    assert not prob.solve().satisfiable
    assert prob.solve([0, 2]).satisfiable
    assert prob.solve([1]).satisfiable


# -- formulas -----------------------------------------------------------------


def test_sat_formula_examples():
    a = Atom("p")
    assert not sat_formula(And(Globally(a), Finally(Not(a)))).satisfiable
    res = sat_formula(Finally(a))
    assert res.satisfiable and eval_classical(Finally(a), res.witness)
    phi2 = props()["phi2"]
    res = sat_formula(phi2)
    assert res.satisfiable and eval_classical(phi2, res.witness)


def test_sat_formula_against_brute_force():
    rng = random.Random(23)
    for _ in range(200):
        f = random_formula(rng, ["p", "q"], 3)
        res = sat_formula(f)
        if brute_force_sat(f, ["p", "q"], 3) is not None:
            assert res.satisfiable
        if res.satisfiable:
            assert eval_classical(f, res.witness)


def test_node_limit():
    f = And(Globally(Finally(Atom("a"))), Globally(Finally(Atom("b"))))
    with pytest.raises(ResourceLimitExceeded):
        sat_formula(f, node_limit=1)


def test_automaton_dump():
    text = ltl_to_gba(Finally(Atom("p"))).dump()
    assert text.startswith("# automaton for F p\nstates ")
    assert "acceptance {" in text


def test_degeneralized_search_needs_every_set():
    # a 2-cycle where each node is in exactly one of two acceptance sets
    succ = {0: [1], 1: [0]}
    sets = [{0}, {1}]
    found = accepting_lasso([0], succ.__getitem__, lambda v, i: v in sets[i], 2)
    assert found is not None and set(found[1]) == {0, 1}
    # with a self-loop on 0 only, set 1 cannot recur
    succ = {0: [0, 1], 1: [1]}
    sets = [{0}, {0}, set()]
    assert accepting_lasso([0], succ.__getitem__, lambda v, i: v in sets[i], 3) is None


# -- the per-approximation check ----------------------------------------------


def test_phi3_counterexample_on_vacuum():
    low, high = approximations()
    phi3 = props()["phi3"]
    for a in (low, high):
        res = check_star(a, phi3)
        assert not res.holds
        assert is_path(a, res.counterexample)
        assert eval_classical(tau_transform(phi3), trace(a, res.counterexample))
    reference_run = Lasso(("OFF",), ("IDLE",))
    assert eval_classical(tau_transform(phi3), trace(high, reference_run))


def test_phi2_holds_on_both_approximations():
    for a in approximations():
        assert check_star(a, props()["phi2"]).holds


def test_single_state_always_p():
    m = Pks.build("one", ["s"], ["p"], ["s"], [("s", "s")], {"s": {"p": "T"}})
    assert check_star(complement_closure(m), Globally(Atom("p"))).holds


def test_counterexamples_and_monotonicity_on_random_models():
    rng = random.Random(29)
    for _ in range(120):
        m = random_pks(rng)
        f = random_formula(rng, list(m.ap), 3)
        mc = complement_closure(m)
        low, high = approximate(mc, PESSIMISTIC), approximate(mc, OPTIMISTIC)
        gba = property_automaton(f)
        rl, rh = check_star(low, f, gba=gba), check_star(high, f, gba=gba)
        # reading ? as true only adds runs of the negation-free transform
        if rh.holds:
            assert rl.holds
        for a, res in ((low, rl), (high, rh)):
            if not res.holds:
                assert is_path(a, res.counterexample)
                assert eval_classical(tau_transform(f), trace(a, res.counterexample))


def test_check_star_matches_path_enumeration():
    # on Kripke structures, holds iff no short lasso path violates the formula
    rng = random.Random(31)
    for _ in range(80):
        m = random_pks(rng, max_states=3, max_unknown=0)
        f = random_formula(rng, list(m.ap), 2)
        res = check_star(complement_closure(m), f)
        bad = [w for w in state_lassos(m, 4) if not eval_classical(f, trace(m, w))]
        if bad:
            assert not res.holds
        if not res.holds:
            assert not eval_classical(f, trace(m, res.counterexample))


def test_check_star_needs_closed_ks():
    m = load_pks(FIXTURES / "vacuum.pks")
    with pytest.raises(PreconditionError):
        check_star(m, props()["phi1"])
    ks = approximate(complement_closure(m), PESSIMISTIC)
    stripped = Pks(ks.name, ks.states, m.ap, ks.init, ks.transitions,
                   {k: v for k, v in ks.labels.items() if k[1] in m.ap})
    with pytest.raises(PreconditionError):
        check_star(stripped, props()["phi1"])


def test_witness_length_bounded_by_search_space():
    clauses = [SnfClause(INITIAL, (p,)), SnfClause(GLOBAL, (np_,), (Lit("q"),)),
               SnfClause(GLOBAL, (Lit("q", False),), (np_,)), SnfClause(GLOBAL, (p, Lit("q")), (p,))]
    res = sat(clauses)
    assert res.satisfiable
    assert len(res.witness) <= 2 ** 2 * 4
    assert eval_classical(conjunction_formula(clauses), res.witness)
