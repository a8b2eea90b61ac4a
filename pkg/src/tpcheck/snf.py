"""Separated Normal Form clause sets for Kripke structures and properties.

Every clause carries a provenance tag naming the encoding rule (and the
state/proposition) it came from. Topological proofs are read back from
those tags, so they are part of clause identity.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple, Sequence

from tpcheck.errors import PreconditionError
from tpcheck.ltl import (
    And,
    Atom,
    Const,
    Finally,
    Formula,
    Globally,
    Next,
    Not,
    Or,
    Release,
    Until,
    WeakUntil,
    atoms,
    conjoin,
    disjoin,
)
from tpcheck.pks import Pks
from tpcheck.tri import Tri

STATE_PREFIX = "@st_"
FRESH_PREFIX = "@x"
RESERVED_PREFIX = "@"

INITIAL = "initial"
GLOBAL = "global"
EVENTUALITY = "eventuality"


class Lit(NamedTuple):
    name: str
    positive: bool = True

    def negate(self) -> "Lit":
        return Lit(self.name, not self.positive)

    def to_formula(self) -> Formula:
        return Atom(self.name) if self.positive else Not(Atom(self.name))

    def __str__(self):
        return self.name if self.positive else "!" + self.name


def state_prop(state: str) -> str:
    return STATE_PREFIX + state


# -- provenance --------------------------------------------------------------


@dataclass(frozen=True)
class Init:
    group = "init"

    def __str__(self):
        return "init"


@dataclass(frozen=True)
class Reach:
    state: str
    group = "reach"

    def __str__(self):
        return f"reach {self.state}"


@dataclass(frozen=True)
class LabelTrue:
    state: str
    prop: str
    group = "label"

    def __str__(self):
        return f"label+ {self.state} {self.prop}"


@dataclass(frozen=True)
class LabelFalse:
    state: str
    prop: str
    group = "label"

    def __str__(self):
        return f"label- {self.state} {self.prop}"


@dataclass(frozen=True)
class Regularity:
    state: str
    other: str
    group = "reg"

    def __str__(self):
        return f"reg {self.state} {self.other}"


@dataclass(frozen=True)
class PropertyClause:
    index: int
    group = "property"

    def __str__(self):
        return f"property {self.index}"


# -- clauses -----------------------------------------------------------------


@dataclass(frozen=True)
class SnfClause:
    """``initial``: ``\\/P``; ``global``: ``G(\\/P | X \\/Q)``; ``eventuality``: ``G(\\/P | F l)``."""

    kind: str
    p: tuple[Lit, ...]
    q: tuple[Lit, ...] = ()
    ev: Lit | None = None
    provenance: object = None

    def __post_init__(self):
        object.__setattr__(self, "p", tuple(Lit(*x) for x in self.p))
        object.__setattr__(self, "q", tuple(Lit(*x) for x in self.q))
        if self.kind == INITIAL:
            ok = not self.q and self.ev is None
        elif self.kind == GLOBAL:
            ok = self.ev is None
        elif self.kind == EVENTUALITY:
            ok = not self.q and self.ev is not None
        else:
            raise ValueError(f"unknown clause kind {self.kind!r}")
        if not ok:
            raise ValueError(f"malformed {self.kind} clause")
        if self.ev is not None:
            object.__setattr__(self, "ev", Lit(*self.ev))

    def variables(self) -> list[str]:
        lits = list(self.p) + list(self.q) + ([self.ev] if self.ev else [])
        return list(dict.fromkeys(l.name for l in lits))

    def to_formula(self) -> Formula:
        head = disjoin([l.to_formula() for l in self.p])
        if self.kind == INITIAL:
            return head
        if self.kind == GLOBAL:
            if not self.q:
                return Globally(head)
            tail = Next(disjoin([l.to_formula() for l in self.q]))
        else:
            tail = Finally(self.ev.to_formula())
        return Globally(tail if not self.p else Or(head, tail))

    def render(self) -> str:
        body = " ".join(str(l) for l in self.p)
        if self.kind == GLOBAL and self.q:
            body += " X: " + " ".join(str(l) for l in self.q)
        elif self.kind == EVENTUALITY:
            body += f" F: {self.ev}"
        return f"[{self.provenance}] {self.kind}: {body.strip()}"


def dump_clauses(clauses: Sequence[SnfClause]) -> str:
    return "".join(c.render() + "\n" for c in clauses)


def conjunction_formula(clauses: Sequence[SnfClause]) -> Formula:
    return conjoin([c.to_formula() for c in clauses])


# -- Kripke structure encoding ----------------------------------------------


def ks_to_snf(a: Pks) -> list[SnfClause]:
    """Clauses for init, reachability, labels and regularity, in that order."""
    if not a.is_ks:
        raise PreconditionError(f"{a.name} has unknown labels; encode an approximation")
    clash = [x for x in a.ap + a.states if x.startswith(RESERVED_PREFIX)]
    if clash:
        raise ValueError(f"names collide with the reserved '{RESERVED_PREFIX}' prefix: {', '.join(clash)}")
    sp = {s: state_prop(s) for s in a.states}
    out = [SnfClause(INITIAL, tuple(Lit(sp[s]) for s in a.init), provenance=Init())]
    for s in a.states:
        out.append(
            SnfClause(
                GLOBAL,
                (Lit(sp[s], False),),
                tuple(Lit(sp[t]) for t in a.successors(s)),
                provenance=Reach(s),
            )
        )
    for s in a.states:
        for p in a.ap:
            if a.label(s, p) is Tri.TRUE:
                out.append(SnfClause(GLOBAL, (Lit(sp[s], False), Lit(p)), provenance=LabelTrue(s, p)))
            else:
                out.append(SnfClause(GLOBAL, (Lit(sp[s], False), Lit(p, False)), provenance=LabelFalse(s, p)))
    for i, s in enumerate(a.states):
        for t in a.states[i + 1:]:
            out.append(
                SnfClause(GLOBAL, (Lit(sp[s], False), Lit(sp[t], False)), provenance=Regularity(s, t))
            )
    return out


# -- property encoding -------------------------------------------------------


class _PropertyEncoder:
    def __init__(self):
        self.clauses: list[SnfClause] = []
        self.counter = 0

    def fresh(self) -> Lit:
        lit = Lit(f"{FRESH_PREFIX}{self.counter}")
        self.counter += 1
        return lit

    def emit(self, kind, p=(), q=(), ev=None):
        self.clauses.append(SnfClause(kind, tuple(p), tuple(q), ev, PropertyClause(len(self.clauses))))

    def top(self, f: Formula):
        if _is_literal(f):
            self.emit(INITIAL, (_literal(f),))
        elif isinstance(f, And):
            self.top(f.left)
            self.top(f.right)
        elif isinstance(f, Const):
            if not f.value:
                self.emit(INITIAL, ())
        elif isinstance(f, Or):
            self.emit(INITIAL, [self.name(d) for d in _disjuncts(f)])
        else:
            x = self.fresh()
            self.emit(INITIAL, (x,))
            self.define(x, f)

    def name(self, f: Formula) -> Lit:
        if _is_literal(f):
            return _literal(f)
        x = self.fresh()
        self.define(x, f)
        return x

    def define(self, x: Lit, f: Formula):
        """Emit clauses forcing ``f`` wherever ``x`` holds."""
        nx = x.negate()
        if _is_literal(f):
            self.emit(GLOBAL, (nx, _literal(f)))
        elif isinstance(f, Const):
            if not f.value:
                self.emit(GLOBAL, (nx,))
        elif isinstance(f, And):
            self.define(x, f.left)
            self.define(x, f.right)
        elif isinstance(f, Or):
            self.emit(GLOBAL, [nx] + [self.name(d) for d in _disjuncts(f)])
        elif isinstance(f, Next):
            self.emit(GLOBAL, (nx,), [self.name(d) for d in _disjuncts(f.arg)])
        elif isinstance(f, Globally):
            self.define(x, f.arg)
            self.emit(GLOBAL, (nx,), (x,))
        elif isinstance(f, Finally):
            self.emit(EVENTUALITY, (nx,), ev=self.name(f.arg))
        elif isinstance(f, (Until, WeakUntil)):
            a = self.name(f.left)
            b = self.name(f.right)
            self.emit(GLOBAL, (nx, b, a))
            self.emit(GLOBAL, (nx, b), (x,))
            if isinstance(f, Until):
                self.emit(EVENTUALITY, (nx,), ev=b)
        elif isinstance(f, Release):
            a = self.name(f.left)
            self.define(x, f.right)
            self.emit(GLOBAL, (nx, a), (x,))
        else:
            raise PreconditionError(f"property must be in negation normal form, found {f}")


def _is_literal(f: Formula) -> bool:
    return isinstance(f, Atom) or (isinstance(f, Not) and isinstance(f.arg, Atom))


def _literal(f: Formula) -> Lit:
    return Lit(f.name) if isinstance(f, Atom) else Lit(f.arg.name, False)


def _disjuncts(f: Formula) -> list[Formula]:
    if isinstance(f, Or):
        return _disjuncts(f.left) + _disjuncts(f.right)
    return [f]


def property_to_snf(f: Formula) -> list[SnfClause]:
    """Structure-preserving clause form of a negation-free (or NNF) formula.

    Each non-literal subformula gets a fresh ``@x<n>`` proposition, numbered
    in preorder. The clause set is satisfiable iff ``f`` is, and its models
    restricted to the atoms of ``f`` satisfy ``f``.
    """
    bad = [a for a in atoms(f) if a.startswith(RESERVED_PREFIX)]
    if bad:
        raise ValueError(f"property uses reserved names: {', '.join(bad)}")
    enc = _PropertyEncoder()
    enc.top(f)
    return enc.clauses
