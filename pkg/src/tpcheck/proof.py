"""Three-valued analysis, topological proofs, and re-checking revisions against them.

The verdict comes from two classical checks on the complement-closed model:
once with every ``?`` read as false (a violation there is a violation in
every completion) and once with every ``?`` read as true (no violation there
means none anywhere). A proof is the slice of the model that an
unsatisfiable core of the encoded check depends on.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from typing import Iterator, Sequence, Union

from tpcheck.errors import ParseError, PreconditionError
from tpcheck.ltl import IDENT_RE, Formula, Lasso, atoms, base_name, tau_transform
from tpcheck.pks import (
    OPTIMISTIC,
    PESSIMISTIC,
    Pks,
    approximate,
    complement_closure,
    require_valid,
)
from tpcheck.sat import DEFAULT_NODE_LIMIT, check_star, property_automaton
from tpcheck.snf import Init, LabelFalse, LabelTrue, Reach, ks_to_snf, property_to_snf
from tpcheck.tri import Tri
from tpcheck.uc import UnsatCore, extract_uc

# -- proof clauses -------------------------------------------------------------


@dataclass(frozen=True)
class TPP:
    """The label of ``prop`` in ``state`` must stay ``value``."""

    state: str
    prop: str
    value: Tri

    @property
    def size(self) -> int:
        return 1

    def render(self) -> str:
        return f"tpp {self.state} {self.prop} {self.value.symbol}"


@dataclass(frozen=True)
class TPT:
    """``state`` must keep exactly these successors."""

    state: str
    successors: tuple[str, ...]

    def __post_init__(self):
        object.__setattr__(self, "successors", tuple(self.successors))
        if not self.successors:
            raise ValueError(f"successor set of {self.state} is empty")

    @property
    def size(self) -> int:
        return len(self.successors)

    def render(self) -> str:
        return f"tpt {self.state} : {' '.join(self.successors)}"


@dataclass(frozen=True)
class TPI:
    """The initial states must stay exactly these."""

    states: tuple[str, ...]

    def __post_init__(self):
        object.__setattr__(self, "states", tuple(self.states))

    @property
    def size(self) -> int:
        return len(self.states)

    def render(self) -> str:
        return "tpi " + " ".join(self.states)


TpClause = Union[TPP, TPT, TPI]


@dataclass(frozen=True)
class TopologicalProof:
    property: str
    level: Tri
    clauses: tuple[TpClause, ...]
    origin_ap: tuple[str, ...]
    origin: str | None = None

    def __post_init__(self):
        object.__setattr__(self, "clauses", tuple(self.clauses))
        object.__setattr__(self, "origin_ap", tuple(self.origin_ap))
        if self.level not in (Tri.TRUE, Tri.UNKNOWN):
            raise ValueError("proof level must be T or ?")
        tpi = [c for c in self.clauses if isinstance(c, TPI)]
        if len(tpi) > 1:
            raise ValueError("more than one tpi clause")
        tpt = [c.state for c in self.clauses if isinstance(c, TPT)]
        if len(tpt) != len(set(tpt)):
            raise ValueError("more than one tpt clause for a state")
        tpp = [(c.state, c.prop) for c in self.clauses if isinstance(c, TPP)]
        if len(tpp) != len(set(tpp)):
            raise ValueError("more than one tpp clause for a (state, proposition) pair")

    def of_kind(self, kind) -> list:
        return [c for c in self.clauses if isinstance(c, kind)]


def proof_size(omega: TopologicalProof) -> int:
    return sum(c.size for c in omega.clauses)


# -- analysis ------------------------------------------------------------------


@dataclass(frozen=True)
class AnalysisResult:
    property: str
    verdict: Tri
    counterexample: Lasso | None = None
    proof: TopologicalProof | None = None

    def __post_init__(self):
        v = self.verdict
        has_ce, has_proof = self.counterexample is not None, self.proof is not None
        if v is Tri.FALSE and has_proof:
            raise ValueError("a violated property has no proof")
        if v is Tri.FALSE and not has_ce:
            raise ValueError("a violated property needs a counterexample")
        if v is Tri.TRUE and has_ce:
            raise ValueError("a satisfied property has no counterexample")
        if v is Tri.UNKNOWN and not has_ce:
            raise ValueError("a possibly satisfied property needs a possible counterexample")

    @property
    def definitive(self) -> bool:
        return self.verdict is Tri.FALSE


@dataclass
class Approximations:
    """The complement closure of a model and its two classical readings."""

    closed: Pks
    low: Pks  # every ? read as F
    high: Pks  # every ? read as T

    @classmethod
    def of(cls, m: Pks) -> "Approximations":
        mc = complement_closure(m)
        return cls(mc, approximate(mc, PESSIMISTIC), approximate(mc, OPTIMISTIC))


def _check_property(m: Pks, phi: Formula):
    missing = [p for p in atoms(phi) if p not in m.ap]
    if missing:
        raise PreconditionError(f"property mentions propositions absent from {m.name}: {', '.join(missing)}")


def analyze(
    m: Pks,
    phi: Formula,
    name: str = "phi",
    *,
    with_proof: bool = True,
    node_limit: int = DEFAULT_NODE_LIMIT,
) -> AnalysisResult:
    """Verdict, counterexample and proof of ``phi`` on ``m``.

    ``with_proof=False`` skips core extraction; the verdict and
    counterexample are unaffected.
    """
    require_valid(m)
    _check_property(m, phi)
    ap = Approximations.of(m)
    gba = property_automaton(phi)
    low = check_star(ap.low, phi, node_limit, gba)
    if not low.holds:
        return AnalysisResult(name, Tri.FALSE, counterexample=low.counterexample)
    high = check_star(ap.high, phi, node_limit, gba)
    psi = tau_transform(phi)
    if high.holds:
        proof = compute_tp(m, ap.high, psi, Tri.TRUE, name, node_limit) if with_proof else None
        return AnalysisResult(name, Tri.TRUE, proof=proof)
    proof = compute_tp(m, ap.low, psi, Tri.UNKNOWN, name, node_limit) if with_proof else None
    return AnalysisResult(name, Tri.UNKNOWN, counterexample=high.counterexample, proof=proof)


def verdict(m: Pks, phi: Formula, node_limit: int = DEFAULT_NODE_LIMIT) -> Tri:
    return analyze(m, phi, with_proof=False, node_limit=node_limit).verdict


def encode_check(a: Pks, psi: Formula) -> list:
    """Clause set whose unsatisfiability means no path of ``a`` satisfies ``psi``."""
    return ks_to_snf(a) + property_to_snf(psi)


def unknown_labels_first(m: Pks):
    """Deletion tie-break: try dropping label clauses of ``?`` labels before definite ones."""

    def key(c):
        prov = c.provenance
        if isinstance(prov, (LabelTrue, LabelFalse)):
            v = m.labels.get((prov.state, base_name(prov.prop)))
            return 0 if v is Tri.UNKNOWN else 1
        return 0

    return key


def compute_tp(
    m: Pks,
    a: Pks,
    psi: Formula,
    level: Tri,
    name: str = "phi",
    node_limit: int = DEFAULT_NODE_LIMIT,
    verify: bool = False,
) -> TopologicalProof:
    """Proof that no path of the approximation ``a`` of ``m`` satisfies ``psi``."""
    core = extract_uc(encode_check(a, psi), unknown_labels_first(m), verify=verify, node_limit=node_limit)
    return TopologicalProof(name, level, get_tp(m, core), tuple(m.ap), m.name)


def get_tp(m: Pks, core: UnsatCore) -> tuple[TpClause, ...]:
    """Map the model part of a core to proof clauses, recording labels of ``m`` itself."""
    out: dict[TpClause, None] = {}
    states = m.state_set
    for c in core.ks_part:
        prov = c.provenance
        if isinstance(prov, Init):
            out[TPI(m.init)] = None
            continue
        if prov.state not in states:
            raise PreconditionError(f"core mentions state {prov.state} absent from {m.name}")
        if isinstance(prov, Reach):
            out[TPT(prov.state, m.successors(prov.state))] = None
        else:
            p = base_name(prov.prop)
            if p not in m.ap:
                raise PreconditionError(f"core mentions proposition {p} absent from {m.name}")
            out[TPP(prov.state, p, m.label(prov.state, p))] = None
    return tuple(out)


# -- re-check ------------------------------------------------------------------


@dataclass(frozen=True)
class Violation:
    clause: TpClause | None
    observed: str

    def __str__(self):
        what = self.clause.render() if self.clause is not None else "origin-ap"
        return f"{what}  [observed: {self.observed}]"


@dataclass(frozen=True)
class RecheckResult:
    violations: tuple[Violation, ...] = field(default_factory=tuple)

    @property
    def passed(self) -> bool:
        return not self.violations

    def __bool__(self):
        return self.passed


def recheck(omega: TopologicalProof, m2: Pks, original_ap: Sequence[str] | None = None) -> RecheckResult:
    """Whether ``m2`` preserves every clause of ``omega``; lists each clause it breaks."""
    ap = omega.origin_ap if original_ap is None else tuple(original_ap)
    out = []
    lost = [p for p in ap if p not in m2.ap]
    if lost:
        out.append(Violation(None, "missing propositions " + " ".join(lost)))
    states = m2.state_set
    for c in omega.clauses:
        if isinstance(c, TPI):
            if set(c.states) != set(m2.init):
                out.append(Violation(c, "init " + " ".join(m2.init)))
        elif c.state not in states:
            out.append(Violation(c, f"no state {c.state}"))
        elif isinstance(c, TPT):
            succ = m2.successors(c.state)
            if set(c.successors) != set(succ):
                out.append(Violation(c, f"successors {' '.join(succ)}"))
        elif c.prop not in m2.ap:
            out.append(Violation(c, f"no proposition {c.prop}"))
        else:
            v = m2.label(c.state, c.prop)
            if v is not c.value:
                out.append(Violation(c, f"{c.prop}={v.symbol}"))
    return RecheckResult(tuple(out))


# -- proof-preserving mutation -------------------------------------------------


def omega_related_mutants(m: Pks, omega: TopologicalProof, n: int, seed: int) -> Iterator[Pks]:
    """``n`` random revisions of ``m`` that keep every clause of ``omega``.

    Each mutant gets at most one fresh state, two label changes and two
    transition edits, and stays left-total. The stream depends only on
    ``(m, omega, n, seed)``.
    """
    rng = random.Random(seed)
    fixed_labels = {(c.state, c.prop) for c in omega.of_kind(TPP)}
    fixed_succ = {c.state for c in omega.of_kind(TPT)}
    fixed_init = bool(omega.of_kind(TPI))
    values = (Tri.FALSE, Tri.UNKNOWN, Tri.TRUE)
    for k in range(n):
        states = list(m.states)
        labels = dict(m.labels)
        trans = list(m.transitions)
        init = list(m.init)
        if rng.random() < 0.3:
            fresh = f"N{k}"
            while fresh in states:
                fresh += "_"
            states.append(fresh)
            for p in m.ap:
                labels[(fresh, p)] = rng.choice(values)
            trans.append((fresh, rng.choice([fresh] + list(m.states))))
            free_src = [s for s in m.states if s not in fixed_succ]
            if free_src:
                trans.append((rng.choice(free_src), fresh))
        free_labels = [(s, p) for s in states for p in m.ap if (s, p) not in fixed_labels]
        for _ in range(rng.randint(0, 2)):
            if free_labels:
                key = rng.choice(free_labels)
                labels[key] = rng.choice([v for v in values if v is not labels[key]])
        free_src = [s for s in states if s not in fixed_succ]
        for _ in range(rng.randint(0, 2)):
            if not free_src:
                break
            s = rng.choice(free_src)
            out = [t for (x, t) in trans if x == s]
            if rng.random() < 0.5 and len(out) > 1:
                trans.remove((s, rng.choice(out)))
            else:
                t = rng.choice(states)
                if (s, t) not in trans:
                    trans.append((s, t))
        if not fixed_init and rng.random() < 0.3:
            init = rng.sample(states, rng.randint(1, min(2, len(states))))
        yield Pks(f"{m.name}_mut{k}", tuple(states), m.ap, tuple(init), tuple(trans), labels)


# -- file formats --------------------------------------------------------------


def serialize_proof(omega: TopologicalProof) -> str:
    lines = [f"proof {omega.property} level={omega.level.symbol}"]
    lines.append(" ".join(["origin-ap", *omega.origin_ap]))
    if omega.origin is not None:
        lines.append(f"origin {omega.origin}")
    lines.extend(c.render() for c in omega.clauses)
    return "\n".join(lines) + "\n"


def parse_proof(text: str) -> TopologicalProof:
    name = level = origin = None
    origin_ap: list[str] | None = None
    clauses: list[TpClause] = []

    def ident(tok, lineno):
        if not IDENT_RE.fullmatch(tok):
            raise ParseError(f"invalid name {tok!r}", lineno)
        return tok

    for lineno, raw in enumerate(text.splitlines(), start=1):
        words = raw.split("#", 1)[0].split()
        if not words:
            continue
        head, args = words[0], words[1:]
        if name is None and head != "proof":
            raise ParseError("file must start with 'proof <property> level=T|?'", lineno)
        if head == "proof":
            if name is not None:
                raise ParseError("duplicate 'proof' header", lineno)
            if len(args) != 2 or not args[1].startswith("level="):
                raise ParseError("expected 'proof <property> level=T|?'", lineno)
            name = ident(args[0], lineno)
            try:
                level = Tri.parse(args[1][len("level="):])
            except ValueError as e:
                raise ParseError(str(e), lineno) from None
            if level is Tri.FALSE:
                raise ParseError("proof level must be T or ?", lineno)
        elif head == "origin-ap":
            origin_ap = [ident(a, lineno) for a in args]
        elif head == "origin":
            if len(args) != 1:
                raise ParseError("expected 'origin <model>'", lineno)
            origin = ident(args[0], lineno)
        elif head == "tpi":
            clauses.append(TPI(tuple(ident(a, lineno) for a in args)))
        elif head == "tpt":
            if len(args) < 3 or args[1] != ":":
                raise ParseError("expected 'tpt <state> : <succ> ...'", lineno)
            clauses.append(TPT(ident(args[0], lineno), tuple(ident(a, lineno) for a in args[2:])))
        elif head == "tpp":
            if len(args) != 3:
                raise ParseError("expected 'tpp <state> <prop> T|F|?'", lineno)
            try:
                v = Tri.parse(args[2])
            except ValueError as e:
                raise ParseError(str(e), lineno) from None
            clauses.append(TPP(ident(args[0], lineno), ident(args[1], lineno), v))
        else:
            raise ParseError(f"unknown directive {head!r}", lineno)
    if name is None:
        raise ParseError("empty proof file", 1)
    if origin_ap is None:
        raise ParseError("missing 'origin-ap' line")
    try:
        return TopologicalProof(name, level, tuple(clauses), tuple(origin_ap), origin)
    except ValueError as e:
        raise ParseError(str(e)) from None


def load_proof(path) -> TopologicalProof:
    with open(path, encoding="utf-8") as fh:
        return parse_proof(fh.read())


def serialize_counterexample(name: str, path: Lasso) -> str:
    prefix = "".join(" " + s for s in path.prefix)
    loop = "".join(" " + s for s in path.loop)
    return f"ce {name} prefix:{prefix} loop:{loop}\n"


def parse_counterexample(text: str) -> tuple[str, Lasso]:
    lines = [l for l in text.splitlines() if l.split("#", 1)[0].strip()]
    if len(lines) != 1:
        raise ParseError("expected a single 'ce' line")
    words = lines[0].split()
    if len(words) < 3 or words[0] != "ce" or words[2] != "prefix:" or "loop:" not in words:
        raise ParseError("expected 'ce <property> prefix: ... loop: ...'", 1)
    cut = words.index("loop:")
    prefix, loop = words[3:cut], words[cut + 1:]
    if not loop:
        raise ParseError("counterexample loop is empty", 1)
    return words[1], Lasso(tuple(prefix), tuple(loop))
