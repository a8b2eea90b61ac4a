"""Random models and formulas, plus brute-force oracles, shared by the test modules."""

from __future__ import annotations

import itertools
import random
from pathlib import Path

from hypothesis import strategies as st

from tpcheck.ltl import (
    FALSE,
    TRUE,
    And,
    Atom,
    Finally,
    Globally,
    Implies,
    Lasso,
    Next,
    Not,
    Or,
    Release,
    Until,
    WeakUntil,
    eval_classical,
)
from tpcheck.pks import Pks
from tpcheck.tri import Tri

FIXTURES = Path(__file__).parent / "fixtures"

UNARY = (Not, Next, Globally, Finally)
BINARY = (And, Or, Implies, Until, WeakUntil, Release)


def random_formula(rng: random.Random, props, depth: int):
    if depth == 0 or rng.random() < 0.25:
        if rng.random() < 0.06:
            return rng.choice((TRUE, FALSE))
        return Atom(rng.choice(props))
    if rng.random() < 0.4:
        return rng.choice(UNARY)(random_formula(rng, props, depth - 1))
    op = rng.choice(BINARY)
    return op(random_formula(rng, props, depth - 1), random_formula(rng, props, depth - 1))


def formulas(props=("p", "q"), depth=3):
    """Hypothesis strategy for formulas of bounded depth."""
    leaf = st.one_of(st.sampled_from([Atom(p) for p in props]), st.sampled_from([TRUE, FALSE]))

    def extend(sub):
        return st.one_of(
            st.builds(lambda op, a: op(a), st.sampled_from(UNARY), sub),
            st.builds(lambda op, a, b: op(a, b), st.sampled_from(BINARY), sub, sub),
        )

    return st.recursive(leaf, extend, max_leaves=2 ** depth)


def random_pks(rng: random.Random, max_states=4, max_props=3, max_unknown=4, name="r") -> Pks:
    n = rng.randint(1, max_states)
    states = [f"s{i}" for i in range(n)]
    ap = ["a", "b", "c"][: rng.randint(1, max_props)]
    labels = {(s, p): rng.choice((Tri.FALSE, Tri.TRUE)) for s in states for p in ap}
    pairs = list(labels)
    for key in rng.sample(pairs, min(len(pairs), rng.randint(0, max_unknown))):
        labels[key] = Tri.UNKNOWN
    trans = []
    for s in states:
        trans.append((s, rng.choice(states)))
        for t in states:
            if rng.random() < 0.3:
                trans.append((s, t))
    init = rng.sample(states, rng.randint(1, min(2, n)))
    return Pks(name, tuple(states), tuple(ap), tuple(init), tuple(trans), labels)


def all_lassos(alphabet, max_len):
    """Every lasso over ``alphabet`` with prefix plus loop of total length at most ``max_len``."""
    for total in range(1, max_len + 1):
        for word in itertools.product(alphabet, repeat=total):
            for cut in range(total):
                yield Lasso(word[:cut], word[cut:])


def valuations(props):
    return [dict(zip(props, bits)) for bits in itertools.product((False, True), repeat=len(props))]


def brute_force_sat(formula, props, max_len=3):
    for w in all_lassos(valuations(props), max_len):
        if eval_classical(formula, w):
            return w
    return None


def state_lassos(m: Pks, max_len: int):
    """Lasso-shaped paths of ``m`` from an initial state, up to the given length."""
    def extend(path):
        yield path
        if len(path) < max_len:
            for t in m.successors(path[-1]):
                yield from extend(path + [t])

    for s0 in m.init:
        for path in extend([s0]):
            last = path[-1]
            for cut in range(len(path)):
                if path[cut] in m.successors(last):
                    yield Lasso(tuple(path[:cut]), tuple(path[cut:]))


def is_path(m: Pks, path: Lasso) -> bool:
    items = path.items()
    if items[0] not in m.init:
        return False
    edges = set(m.transitions)
    return all((items[i], items[path.successor(i)]) in edges for i in range(len(items)))


def trace(m: Pks, path: Lasso) -> Lasso:
    return path.map(m.valuation)
