"""LTL syntax, parsing, negation normal form and trace evaluation.

Formulas are immutable trees of frozen dataclasses. ``W`` and ``R`` are kept
as first-class nodes so parsed properties print back the way they were
written.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Any, Callable, Iterator, Mapping, Sequence

from tpcheck.errors import ParseError, PreconditionError
from tpcheck.tri import Tri

COMPLEMENT_PREFIX = "~"
IDENT_RE = re.compile(r"[A-Za-z_][A-Za-z0-9_]*")
KEYWORDS = frozenset({"X", "G", "F", "U", "W", "R", "true", "false"})


def complement_name(name: str) -> str:
    if is_complement(name):
        raise ValueError(f"cannot complement {name!r}: complements are never nested")
    return COMPLEMENT_PREFIX + name


def is_complement(name: str) -> bool:
    return name.startswith(COMPLEMENT_PREFIX)


def base_name(name: str) -> str:
    return name[len(COMPLEMENT_PREFIX):] if is_complement(name) else name


class Formula:
    __slots__ = ()

    def children(self) -> tuple[Formula, ...]:
        return ()

    def __str__(self):
        return render(self)


@dataclass(frozen=True, eq=True)
class Atom(Formula):
    name: str

    def __post_init__(self):
        if not self.name:
            raise ValueError("proposition names must be nonempty")


@dataclass(frozen=True)
class Const(Formula):
    value: bool


@dataclass(frozen=True)
class Not(Formula):
    arg: Formula

    def children(self):
        return (self.arg,)


@dataclass(frozen=True)
class Next(Formula):
    arg: Formula

    def children(self):
        return (self.arg,)


@dataclass(frozen=True)
class Globally(Formula):
    arg: Formula

    def children(self):
        return (self.arg,)


@dataclass(frozen=True)
class Finally(Formula):
    arg: Formula

    def children(self):
        return (self.arg,)


@dataclass(frozen=True)
class _Binary(Formula):
    left: Formula
    right: Formula

    def children(self):
        return (self.left, self.right)


@dataclass(frozen=True)
class And(_Binary):
    pass


@dataclass(frozen=True)
class Or(_Binary):
    pass


@dataclass(frozen=True)
class Implies(_Binary):
    pass


@dataclass(frozen=True)
class Until(_Binary):
    pass


@dataclass(frozen=True)
class WeakUntil(_Binary):
    pass


@dataclass(frozen=True)
class Release(_Binary):
    pass


TRUE = Const(True)
FALSE = Const(False)

_UNARY_SYMBOL = {Not: "!", Next: "X", Globally: "G", Finally: "F"}
_BINARY_SYMBOL = {And: "&", Or: "|", Implies: "->", Until: "U", WeakUntil: "W", Release: "R"}
TEMPORAL = (Next, Globally, Finally, Until, WeakUntil, Release)


def render(f: Formula) -> str:
    if isinstance(f, Atom):
        return f.name
    if isinstance(f, Const):
        return "true" if f.value else "false"
    if isinstance(f, _Binary):
        return f"({render(f.left)} {_BINARY_SYMBOL[type(f)]} {render(f.right)})"
    op = _UNARY_SYMBOL[type(f)]
    inner = render(f.arg)
    if op == "!" or inner.startswith("(") or inner.startswith("!"):
        return op + inner
    return f"{op} {inner}"


def subformulas(f: Formula) -> Iterator[Formula]:
    """Preorder traversal."""
    stack = [f]
    while stack:
        g = stack.pop()
        yield g
        stack.extend(reversed(g.children()))


def atoms(f: Formula) -> list[str]:
    """Proposition names in order of first appearance."""
    seen: dict[str, None] = {}
    for g in subformulas(f):
        if isinstance(g, Atom):
            seen.setdefault(g.name)
    return list(seen)


def is_nnf(f: Formula) -> bool:
    for g in subformulas(f):
        if isinstance(g, Implies):
            return False
        if isinstance(g, Not) and not isinstance(g.arg, Atom):
            return False
    return True


def is_tau_normal(f: Formula) -> bool:
    return all(not isinstance(g, (Not, Implies)) for g in subformulas(f))


# -- parsing ---------------------------------------------------------------

_TOKEN_RE = re.compile(
    r"\s*(?:(?P<arrow>->)|(?P<sym>[!&|()])|(?P<comp>~[A-Za-z_][A-Za-z0-9_]*)"
    r"|(?P<ident>[A-Za-z_][A-Za-z0-9_]*))"
)


@dataclass
class _Token:
    kind: str  # "op", "atom", "const", "end"
    text: str
    offset: int


def _position(text: str, offset: int) -> tuple[int, int]:
    line = text.count("\n", 0, offset) + 1
    col = offset - (text.rfind("\n", 0, offset) + 1) + 1
    return line, col


def _tokenize(text: str, allow_complement: bool) -> list[_Token]:
    tokens = []
    pos = 0
    while True:
        while pos < len(text) and text[pos].isspace():
            pos += 1
        if pos >= len(text):
            break
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            raise ParseError(f"unknown token {text[pos]!r}", *_position(text, pos))
        start = m.start(m.lastgroup)
        value = m.group(m.lastgroup)
        if m.lastgroup == "comp":
            if not allow_complement:
                raise ParseError(
                    f"complement proposition {value!r} is not allowed in input", *_position(text, start)
                )
            tokens.append(_Token("atom", value, start))
        elif m.lastgroup == "ident":
            if value in ("true", "false"):
                tokens.append(_Token("const", value, start))
            elif value in KEYWORDS:
                tokens.append(_Token("op", value, start))
            else:
                tokens.append(_Token("atom", value, start))
        else:
            tokens.append(_Token("op", value, start))
        pos = m.end()
    tokens.append(_Token("end", "", len(text)))
    return tokens


class _Parser:
    def __init__(self, text: str, allow_complement: bool):
        self.text = text
        self.tokens = _tokenize(text, allow_complement)
        self.i = 0

    def peek(self) -> _Token:
        return self.tokens[self.i]

    def take(self) -> _Token:
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def error(self, message: str, tok: _Token):
        return ParseError(message, *_position(self.text, tok.offset))

    def expect(self, text: str):
        tok = self.take()
        if tok.kind != "op" or tok.text != text:
            found = "end of input" if tok.kind == "end" else repr(tok.text)
            raise self.error(f"expected {text!r}, found {found}", tok)

    def parse(self) -> Formula:
        f = self.implication()
        tok = self.peek()
        if tok.kind != "end":
            raise self.error(f"unexpected {tok.text!r}", tok)
        return f

    def implication(self) -> Formula:
        left = self.disjunction()
        tok = self.peek()
        if tok.kind == "op" and tok.text == "->":
            self.take()
            return Implies(left, self.implication())
        return left

    def disjunction(self) -> Formula:
        f = self.conjunction()
        while self.peek().kind == "op" and self.peek().text == "|":
            self.take()
            f = Or(f, self.conjunction())
        return f

    def conjunction(self) -> Formula:
        f = self.temporal()
        while self.peek().kind == "op" and self.peek().text == "&":
            self.take()
            f = And(f, self.temporal())
        return f

    def temporal(self) -> Formula:
        left = self.unary()
        tok = self.peek()
        if tok.kind == "op" and tok.text in ("U", "W", "R"):
            self.take()
            cls = {"U": Until, "W": WeakUntil, "R": Release}[tok.text]
            return cls(left, self.temporal())
        return left

    def unary(self) -> Formula:
        tok = self.take()
        if tok.kind == "atom":
            return Atom(tok.text)
        if tok.kind == "const":
            return TRUE if tok.text == "true" else FALSE
        if tok.kind == "op":
            if tok.text == "(":
                f = self.implication()
                self.expect(")")
                return f
            cls = {"!": Not, "X": Next, "G": Globally, "F": Finally}.get(tok.text)
            if cls is not None:
                return cls(self.unary())
        if tok.kind == "end":
            raise self.error("unexpected end of input", tok)
        raise self.error(f"unexpected {tok.text!r}", tok)


def parse_ltl(text: str, *, allow_complement: bool = False) -> Formula:
    """Parse one formula.

    Precedence, tightest first: unary operators, ``U``/``W``/``R`` (right
    associative), ``&``, ``|``, ``->`` (right associative).
    """
    return _Parser(text, allow_complement).parse()


def parse_properties(text: str) -> list[tuple[str, Formula]]:
    """Parse a property file: one ``name: formula`` per line, ``#`` comments."""
    props: list[tuple[str, Formula]] = []
    seen = set()
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0]
        if not line.strip():
            continue
        name, sep, body = line.partition(":")
        name = name.strip()
        if not sep:
            raise ParseError("expected 'name: formula'", lineno, 1)
        if not IDENT_RE.fullmatch(name) or name in KEYWORDS:
            raise ParseError(f"invalid property name {name!r}", lineno, 1)
        if name in seen:
            raise ParseError(f"duplicate property name {name!r}", lineno, 1)
        seen.add(name)
        try:
            f = parse_ltl(body)
        except ParseError as e:
            raise ParseError(e.message, lineno, (e.column or 1) + line.index(":") + 1) from None
        props.append((name, f))
    return props


# -- normal forms ----------------------------------------------------------


def to_nnf(f: Formula) -> Formula:
    """Push negations down to atoms; implications are eliminated first."""
    return _nnf(f, negate=False)


def _nnf(f: Formula, negate: bool) -> Formula:
    if isinstance(f, Atom):
        return Not(f) if negate else f
    if isinstance(f, Const):
        return Const(f.value != negate)
    if isinstance(f, Not):
        return _nnf(f.arg, not negate)
    if isinstance(f, Implies):
        return _nnf(Or(Not(f.left), f.right), negate)
    if isinstance(f, And):
        cls = Or if negate else And
        return cls(_nnf(f.left, negate), _nnf(f.right, negate))
    if isinstance(f, Or):
        cls = And if negate else Or
        return cls(_nnf(f.left, negate), _nnf(f.right, negate))
    if isinstance(f, Next):
        return Next(_nnf(f.arg, negate))
    if isinstance(f, Globally):
        return Finally(_nnf(f.arg, True)) if negate else Globally(_nnf(f.arg, False))
    if isinstance(f, Finally):
        return Globally(_nnf(f.arg, True)) if negate else Finally(_nnf(f.arg, False))
    a, b = f.left, f.right
    if not negate:
        return type(f)(_nnf(a, False), _nnf(b, False))
    if isinstance(f, Until):
        # !(a U b) == !b W (!a & !b)
        return WeakUntil(_nnf(b, True), And(_nnf(a, True), _nnf(b, True)))
    if isinstance(f, WeakUntil):
        # !(a W b) == !b U (!a & !b)
        return Until(_nnf(b, True), And(_nnf(a, True), _nnf(b, True)))
    if isinstance(f, Release):
        return Until(_nnf(a, True), _nnf(b, True))
    raise TypeError(f"unknown formula node {f!r}")


def replace_negated_atoms(f: Formula) -> Formula:
    """Rewrite every ``!a`` of an NNF formula into the complement atom ``~a``."""
    if isinstance(f, Not):
        if not isinstance(f.arg, Atom):
            raise ValueError("formula is not in negation normal form")
        return Atom(complement_name(f.arg.name))
    if isinstance(f, (Atom, Const)):
        return f
    if isinstance(f, _Binary):
        return type(f)(replace_negated_atoms(f.left), replace_negated_atoms(f.right))
    return type(f)(replace_negated_atoms(f.arg))


def tau_transform(f: Formula) -> Formula:
    """Negate, convert to NNF, and replace negated atoms by complement atoms.

    The result contains no negation and is satisfied by exactly the
    complement-closed traces that violate ``f``.
    """
    bad = [a for a in atoms(f) if is_complement(a)]
    if bad:
        raise PreconditionError(f"formula already uses complement propositions: {', '.join(bad)}")
    return replace_negated_atoms(to_nnf(Not(f)))


# -- evaluation on lassos ----------------------------------------------------


@dataclass(frozen=True)
class Lasso:
    """An ultimately periodic sequence ``prefix · loop^ω``."""

    prefix: tuple
    loop: tuple

    def __post_init__(self):
        object.__setattr__(self, "prefix", tuple(self.prefix))
        object.__setattr__(self, "loop", tuple(self.loop))
        if not self.loop:
            raise ValueError("lasso loop must be nonempty")

    def __len__(self):
        return len(self.prefix) + len(self.loop)

    def items(self) -> tuple:
        return self.prefix + self.loop

    def successor(self, i: int) -> int:
        return i + 1 if i + 1 < len(self) else len(self.prefix)

    def unroll(self, k: int) -> list:
        """The first ``k`` elements of the infinite sequence."""
        items = self.items()
        out = []
        i = 0
        for _ in range(k):
            out.append(items[i])
            i = self.successor(i)
        return out

    def map(self, fn: Callable[[Any], Any]) -> "Lasso":
        return Lasso(tuple(fn(x) for x in self.prefix), tuple(fn(x) for x in self.loop))

    def normalized(self) -> "Lasso":
        """Same infinite word, with shortest loop period and shortest prefix."""
        loop = list(self.loop)
        n = len(loop)
        for period in range(1, n + 1):
            if n % period == 0 and loop == loop[:period] * (n // period):
                loop = loop[:period]
                break
        prefix = list(self.prefix)
        while prefix and prefix[-1] == loop[-1]:
            prefix.pop()
            loop = [loop[-1]] + loop[:-1]
        return Lasso(tuple(prefix), tuple(loop))

    def __str__(self):
        head = "".join(f"{x}," for x in self.prefix)
        return f"{head}({','.join(str(x) for x in self.loop)})^ω"


class _Algebra:
    def __init__(self, bottom, top, conj, disj, neg, const):
        self.bottom, self.top = bottom, top
        self.conj, self.disj, self.neg, self.const = conj, disj, neg, const


_BOOL = _Algebra(False, True, lambda a, b: a and b, lambda a, b: a or b, lambda a: not a, bool)
_TRI = _Algebra(Tri.FALSE, Tri.TRUE, min, max, Tri.comp, Tri.of)


def _evaluate(f: Formula, w: Lasso, atom_value: Callable[[int, str], Any], alg: _Algebra):
    n = len(w)
    succ = [w.successor(i) for i in range(n)]
    memo: dict[Formula, list] = {}

    def ev(g: Formula) -> list:
        if g in memo:
            return memo[g]
        if isinstance(g, Atom):
            out = [atom_value(i, g.name) for i in range(n)]
        elif isinstance(g, Const):
            out = [alg.const(g.value)] * n
        elif isinstance(g, Not):
            out = [alg.neg(v) for v in ev(g.arg)]
        elif isinstance(g, And):
            out = [alg.conj(x, y) for x, y in zip(ev(g.left), ev(g.right))]
        elif isinstance(g, Or):
            out = [alg.disj(x, y) for x, y in zip(ev(g.left), ev(g.right))]
        elif isinstance(g, Implies):
            out = [alg.disj(alg.neg(x), y) for x, y in zip(ev(g.left), ev(g.right))]
        elif isinstance(g, Next):
            a = ev(g.arg)
            out = [a[succ[i]] for i in range(n)]
        else:
            out = _temporal_fixpoint(g, ev, succ, n, alg)
        memo[g] = out
        return out

    return ev(f)[0]


def _temporal_fixpoint(g, ev, succ, n, alg):
    if isinstance(g, Finally):
        a, b, least = None, ev(g.arg), True
        step = lambda i, v: alg.disj(b[i], v[succ[i]])  # noqa: E731
    elif isinstance(g, Globally):
        a, b, least = ev(g.arg), None, False
        step = lambda i, v: alg.conj(a[i], v[succ[i]])  # noqa: E731
    else:
        a, b = ev(g.left), ev(g.right)
        if isinstance(g, Until):
            least = True
            step = lambda i, v: alg.disj(b[i], alg.conj(a[i], v[succ[i]]))  # noqa: E731
        elif isinstance(g, WeakUntil):
            least = False
            step = lambda i, v: alg.disj(b[i], alg.conj(a[i], v[succ[i]]))  # noqa: E731
        elif isinstance(g, Release):
            least = False
            step = lambda i, v: alg.conj(b[i], alg.disj(a[i], v[succ[i]]))  # noqa: E731
        else:
            raise TypeError(f"unknown formula node {g!r}")
    val = [alg.bottom if least else alg.top] * n
    # Kleene iteration from bottom (least) or top (greatest) fixpoint, in place
    changed = True
    while changed:
        changed = False
        for i in reversed(range(n)):
            v = step(i, val)
            if v != val[i]:
                val[i] = v
                changed = True
    return val


def eval_classical(f: Formula, w: Lasso) -> bool:
    """Truth of ``f`` on the ultimately periodic word ``w``.

    ``w`` holds valuations (mappings from proposition name to bool).
    """
    items = w.items()

    def atom_value(i, name):
        try:
            return bool(items[i][name])
        except KeyError:
            raise KeyError(f"proposition {name!r} is unassigned at position {i}") from None

    return _evaluate(f, w, atom_value, _BOOL)


def eval_three_valued(f: Formula, path: Lasso, m) -> Tri:
    """Three-valued value of ``f`` on a lasso-shaped path of the PKS ``m``."""
    states = path.items()
    for s in states:
        if s not in m.state_set:
            raise ValueError(f"{s!r} is not a state of {m.name}")
    for i, s in enumerate(states):
        t = states[path.successor(i)]
        if (s, t) not in m.transition_set:
            raise ValueError(f"({s}, {t}) is not a transition of {m.name}")

    def atom_value(i, name):
        return m.label(states[i], name)

    return _evaluate(f, path, atom_value, _TRI)


def trace_of(path: Lasso, labels: Callable[[str], Mapping[str, bool]]) -> Lasso:
    return path.map(labels)


def conjoin(formulas: Sequence[Formula]) -> Formula:
    if not formulas:
        return TRUE
    out = formulas[0]
    for g in formulas[1:]:
        out = And(out, g)
    return out


def disjoin(formulas: Sequence[Formula]) -> Formula:
    if not formulas:
        return FALSE
    out = formulas[0]
    for g in formulas[1:]:
        out = Or(out, g)
    return out
