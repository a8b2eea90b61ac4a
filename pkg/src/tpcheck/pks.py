"""Partial Kripke structures: data model, text format, and the relations between models."""

from __future__ import annotations

import hashlib
import itertools
from dataclasses import dataclass, field, replace
from typing import Iterable, Iterator, Mapping

from tpcheck.errors import ModelError, ParseError, PreconditionError
from tpcheck.ltl import IDENT_RE, complement_name, is_complement
from tpcheck.tri import Tri

OPTIMISTIC = "optimistic"
PESSIMISTIC = "pessimistic"
DEFAULT_COMPLETION_BOUND = 12


@dataclass(frozen=True)
class Pks:
    """A partial Kripke structure.

    States, propositions, initial states and transitions keep their
    declaration order so every derived artifact is deterministic. Duplicate
    transitions collapse; the other sequences are kept verbatim so that
    :func:`validate` can report duplicates.
    """

    name: str
    states: tuple[str, ...]
    ap: tuple[str, ...]
    init: tuple[str, ...]
    transitions: tuple[tuple[str, str], ...]
    labels: Mapping[tuple[str, str], Tri]
    _succ: dict = field(default=None, init=False, repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "states", tuple(self.states))
        object.__setattr__(self, "ap", tuple(self.ap))
        object.__setattr__(self, "init", tuple(self.init))
        object.__setattr__(self, "transitions", tuple(dict.fromkeys((s, t) for s, t in self.transitions)))
        object.__setattr__(self, "labels", {k: Tri(v) for k, v in self.labels.items()})
        order = {s: i for i, s in enumerate(self.states)}
        succ: dict[str, list[str]] = {s: [] for s in self.states}
        for s, t in self.transitions:
            succ.setdefault(s, []).append(t)
        for s in succ:
            succ[s].sort(key=lambda t: order.get(t, len(order)))
        object.__setattr__(self, "_succ", {s: tuple(ts) for s, ts in succ.items()})

    __hash__ = None  # labels is a dict

    @classmethod
    def build(cls, name, states, ap, init, transitions, labels) -> "Pks":
        """Convenience constructor; ``labels`` maps state -> {prop: value}."""
        flat = {}
        for s, row in labels.items():
            for p, v in row.items():
                flat[(s, p)] = Tri.parse(v) if isinstance(v, str) else Tri(v)
        return cls(name, tuple(states), tuple(ap), tuple(init), tuple(transitions), flat)

    @property
    def state_set(self) -> frozenset:
        return frozenset(self.states)

    @property
    def transition_set(self) -> frozenset:
        return frozenset(self.transitions)

    def label(self, state: str, prop: str) -> Tri:
        return self.labels[(state, prop)]

    def successors(self, state: str) -> tuple[str, ...]:
        return self._succ.get(state, ())

    def unknowns(self) -> list[tuple[str, str]]:
        return [(s, p) for s in self.states for p in self.ap if self.labels.get((s, p)) is Tri.UNKNOWN]

    @property
    def is_ks(self) -> bool:
        return not self.unknowns()

    def with_labels(self, changes: Mapping[tuple[str, str], Tri], name: str | None = None) -> "Pks":
        labels = dict(self.labels)
        labels.update(changes)
        return replace(self, labels=labels, name=self.name if name is None else name)

    def valuation(self, state: str) -> dict[str, bool]:
        """Boolean valuation of a state; only defined when no label is ``?``."""
        out = {}
        for p in self.ap:
            v = self.labels[(state, p)]
            if v is Tri.UNKNOWN:
                raise ValueError(f"{p} is unknown in {state}")
            out[p] = v is Tri.TRUE
        return out

    def digest(self) -> str:
        return hashlib.sha256(serialize_pks(self).encode()).hexdigest()[:16]


def validate(m: Pks) -> list[str]:
    """Diagnostics for every violated structural invariant; empty means valid."""
    diags = []
    seen = set()
    for s in m.states:
        if s in seen:
            diags.append(f"duplicate state {s}")
        seen.add(s)
    seen_ap = set()
    for p in m.ap:
        if p in seen_ap:
            diags.append(f"duplicate proposition {p}")
        seen_ap.add(p)
    if not m.init:
        diags.append("no initial state")
    for s in m.init:
        if s not in seen:
            diags.append(f"initial state {s} is not a state")
    for s, t in m.transitions:
        for x in (s, t):
            if x not in seen:
                diags.append(f"transition ({s}, {t}) references unknown state {x}")
    for s in m.states:
        if not m.successors(s):
            diags.append(f"not left-total at {s}")
    for s in m.states:
        for p in m.ap:
            if (s, p) not in m.labels:
                diags.append(f"missing label for {p} at {s}")
    for s, p in m.labels:
        if s not in seen or p not in seen_ap:
            diags.append(f"label for unknown pair ({s}, {p})")
    return diags


def require_valid(m: Pks) -> None:
    diags = validate(m)
    if diags:
        raise ModelError(f"invalid model {m.name}: {diags[0]}", diags)


# -- text format -------------------------------------------------------------


def parse_pks(text: str) -> Pks:
    name = None
    ap: list[str] | None = None
    states: list[str] = []
    labels: dict[tuple[str, str], Tri] = {}
    init: list[str] = []
    trans: list[tuple[str, str]] = []

    def ident(tok, lineno, what):
        if not IDENT_RE.fullmatch(tok):
            raise ParseError(f"invalid {what} name {tok!r}", lineno)
        return tok

    for lineno, raw in enumerate(text.splitlines(), start=1):
        words = raw.split("#", 1)[0].split()
        if not words:
            continue
        head, args = words[0], words[1:]
        if name is None and head != "pks":
            raise ParseError("file must start with 'pks <name>'", lineno)
        if head == "pks":
            if name is not None:
                raise ParseError("duplicate 'pks' header", lineno)
            if len(args) != 1:
                raise ParseError("expected 'pks <name>'", lineno)
            name = ident(args[0], lineno, "model")
        elif head == "ap":
            if ap is not None:
                raise ParseError("duplicate 'ap' line", lineno)
            ap = [ident(a, lineno, "proposition") for a in args]
        elif head == "state":
            if ap is None:
                raise ParseError("'state' before 'ap'", lineno)
            if not args:
                raise ParseError("expected 'state <name> <p>=T|F|? ...'", lineno)
            s = ident(args[0], lineno, "state")
            if s in states:
                raise ParseError(f"duplicate state {s}", lineno)
            row = {}
            for item in args[1:]:
                p, eq, v = item.partition("=")
                if not eq:
                    raise ParseError(f"expected <prop>=T|F|?, got {item!r}", lineno)
                if p not in ap:
                    raise ParseError(f"unknown proposition {p!r}", lineno)
                if p in row:
                    raise ParseError(f"proposition {p} given twice for {s}", lineno)
                try:
                    row[p] = Tri.parse(v)
                except ValueError as e:
                    raise ParseError(str(e), lineno) from None
            missing = [p for p in ap if p not in row]
            if missing:
                raise ParseError(f"state {s} lacks values for {', '.join(missing)}", lineno)
            states.append(s)
            labels.update({(s, p): row[p] for p in ap})
        elif head == "init":
            if not args:
                raise ParseError("expected 'init <state> ...'", lineno)
            init.extend(ident(a, lineno, "state") for a in args)
        elif head == "trans":
            if len(args) != 2:
                raise ParseError("expected 'trans <src> <dst>'", lineno)
            trans.append((ident(args[0], lineno, "state"), ident(args[1], lineno, "state")))
        else:
            raise ParseError(f"unknown directive {head!r}", lineno)
    if name is None:
        raise ParseError("empty model file", 1)
    return Pks(name, tuple(states), tuple(ap or ()), tuple(init), tuple(trans), labels)


def serialize_pks(m: Pks) -> str:
    lines = [f"pks {m.name}", " ".join(["ap", *m.ap]).rstrip()]
    for s in m.states:
        vals = " ".join(f"{p}={m.labels[(s, p)].symbol}" for p in m.ap)
        lines.append(f"state {s} {vals}".rstrip())
    if m.init:
        lines.append("init " + " ".join(m.init))
    lines.extend(f"trans {s} {t}" for s, t in m.transitions)
    return "\n".join(lines) + "\n"


def load_pks(path) -> Pks:
    with open(path, encoding="utf-8") as fh:
        return parse_pks(fh.read())


# -- derived structures ------------------------------------------------------


def complement_closure(m: Pks) -> Pks:
    """Add ``~p`` for every proposition ``p``, labelled with the complement value."""
    clash = [p for p in m.ap if is_complement(p)]
    if clash:
        raise PreconditionError(f"model already has complement propositions: {', '.join(clash)}")
    comps = [complement_name(p) for p in m.ap]
    labels = dict(m.labels)
    for s in m.states:
        for p, cp in zip(m.ap, comps):
            labels[(s, cp)] = m.labels[(s, p)].comp()
    return replace(m, ap=m.ap + tuple(comps), labels=labels)


def is_complement_closed(m: Pks) -> bool:
    names = set(m.ap)
    return all(complement_name(p) in names for p in m.ap if not is_complement(p))


def approximate(mc: Pks, mode: str) -> Pks:
    """Resolve every ``?`` to ``F`` (pessimistic) or ``T`` (optimistic)."""
    if mode not in (OPTIMISTIC, PESSIMISTIC):
        raise ValueError(f"unknown approximation mode {mode!r}")
    if not is_complement_closed(mc):
        raise PreconditionError(f"{mc.name} is not complement-closed")
    fill = Tri.TRUE if mode == OPTIMISTIC else Tri.FALSE
    labels = {k: (fill if v is Tri.UNKNOWN else v) for k, v in mc.labels.items()}
    return replace(mc, labels=labels)


def refinement_violations(m: Pks, m2: Pks) -> list[str]:
    out = []
    for what, a, b in (
        ("states", set(m.states), set(m2.states)),
        ("transitions", set(m.transitions), set(m2.transitions)),
        ("initial states", set(m.init), set(m2.init)),
        ("propositions", set(m.ap), set(m2.ap)),
    ):
        if a != b:
            out.append(f"{what} differ")
    if out:
        return out
    for s in m.states:
        for p in m.ap:
            v = m.label(s, p)
            if v.definite and m2.label(s, p) is not v:
                out.append(f"label of {p} at {s} changed from {v} to {m2.label(s, p)}")
    return out


def is_refinement(m: Pks, m2: Pks) -> bool:
    return not refinement_violations(m, m2)


def is_revision(m: Pks, m2: Pks) -> bool:
    return set(m.ap) <= set(m2.ap)


def completions(m: Pks, bound: int = DEFAULT_COMPLETION_BOUND) -> Iterator[Pks]:
    """All Kripke structures obtained by resolving every ``?``.

    Unknown labels are ordered by state then proposition declaration order;
    assignments are enumerated with ``F`` before ``T``, last label fastest.
    Raises :class:`PreconditionError` immediately when there are more than
    ``bound`` unknowns.
    """
    unknown = m.unknowns()
    if len(unknown) > bound:
        raise PreconditionError(f"{len(unknown)} unknown labels exceed the completion bound {bound}")
    return _completions(m, unknown)


def _completions(m: Pks, unknown: list) -> Iterator[Pks]:
    for values in itertools.product((Tri.FALSE, Tri.TRUE), repeat=len(unknown)):
        yield m.with_labels(dict(zip(unknown, values)))


def model_size(m: Pks) -> int:
    return len(m.ap) * len(m.states) + len(m.transitions) + len(m.init)


def relabel_states(m: Pks, order: Iterable[str]) -> Pks:
    """Same structure with states declared in a different order."""
    return replace(m, states=tuple(order))
