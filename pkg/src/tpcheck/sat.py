"""Satisfiability of SNF clause sets and LTL formulas, and the per-approximation check.

SNF clause sets are decided by an explicit search over pairs ``(O, E)``:
``O`` is the set of X-obligations the next letter must meet and ``E`` the set
of eventualities still waiting to be fulfilled. Letters (assignments to all
clause variables) are grouped into classes that behave identically with
respect to the active clauses, so the search only ever branches over
classes. A successor that is a superset, in both components, of another
successor is dropped; the smaller one simulates it.

Formulas go through the tableau in :mod:`tpcheck.automata`; ``check_star``
builds the product of the Kripke structure with the automaton of the
transformed property.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from tpcheck.automata import DEFAULT_NODE_LIMIT, Gba, accepting_lasso, ltl_to_gba
from tpcheck.errors import PreconditionError, ResourceLimitExceeded
from tpcheck.ltl import Formula, Lasso, atoms, tau_transform
from tpcheck.pks import Pks
from tpcheck.snf import EVENTUALITY, GLOBAL, INITIAL, SnfClause
from tpcheck.tri import Tri

DEFAULT_MAX_VARS = 22


@dataclass(frozen=True)
class SatResult:
    satisfiable: bool
    witness: Lasso | None = None

    def __bool__(self):
        return self.satisfiable


@dataclass(frozen=True)
class CheckStarResult:
    holds: bool
    counterexample: Lasso | None = None


def _masks(lits, index) -> tuple[int, int]:
    pos = neg = 0
    for lit in lits:
        bit = 1 << index[lit.name]
        if lit.positive:
            pos |= bit
        else:
            neg |= bit
    return pos, neg


class SnfProblem:
    """A fixed clause list whose subsets can be decided repeatedly.

    Truth tables of clause parts over all letters are computed once and
    shared by every :meth:`solve` call, which is what makes deletion-based
    core extraction affordable.
    """

    def __init__(self, clauses: Sequence[SnfClause], max_vars: int = DEFAULT_MAX_VARS,
                 node_limit: int = DEFAULT_NODE_LIMIT):
        self.clauses = list(clauses)
        names: dict[str, None] = {}
        for c in self.clauses:
            names.update(dict.fromkeys(c.variables()))
        self.variables = list(names)
        if len(self.variables) > max_vars:
            raise ResourceLimitExceeded(
                f"{len(self.variables)} variables exceed the limit of {max_vars}"
            )
        self.node_limit = node_limit
        self.index = {v: i for i, v in enumerate(self.variables)}
        self.nletters = 1 << len(self.variables)
        self._letters = np.arange(self.nletters, dtype=np.int64)
        self._cache: dict[tuple[int, str], np.ndarray] = {}

    def _truth(self, i: int, part: str) -> np.ndarray:
        """Packed truth table of one clause part (``p``, ``q`` or ``ev``)."""
        key = (i, part)
        hit = self._cache.get(key)
        if hit is None:
            c = self.clauses[i]
            lits = c.p if part == "p" else c.q if part == "q" else (c.ev,)
            pos, neg = _masks(lits, self.index)
            L = self._letters
            val = ((L & pos) != 0) | ((~L & neg) != 0)
            hit = np.packbits(val)
            self._cache[key] = hit
        return hit

    def _column(self, i, part, sel) -> np.ndarray:
        return np.unpackbits(self._truth(i, part), count=self.nletters).astype(bool)[sel]

    def solve(self, active: Iterable[int] | None = None) -> SatResult:
        act = range(len(self.clauses)) if active is None else sorted(set(active))
        inits, xs, invs, evs = [], [], [], []
        for i in act:
            c = self.clauses[i]
            if c.kind == INITIAL:
                inits.append(i)
            elif c.kind == GLOBAL:
                (xs if c.q else invs).append(i)
            else:
                evs.append(i)

        valid = np.full((self.nletters + 7) // 8, 0xFF, dtype=np.uint8)
        for i in invs:
            valid &= self._truth(i, "p")
        sel = np.flatnonzero(np.unpackbits(valid, count=self.nletters))
        if sel.size == 0:
            return SatResult(False)

        cols = [~self._column(i, "p", sel) for i in xs]
        cols += [self._column(i, "q", sel) for i in xs]
        init_ok = np.ones(sel.size, dtype=bool)
        for i in inits:
            init_ok &= self._column(i, "p", sel)
        cols.append(init_ok)
        cols += [~self._column(i, "p", sel) for i in evs]
        cols += [self._column(i, "ev", sel) for i in evs]
        kx, ke = len(xs), len(evs)
        classes = []
        for r in _first_of_each_row(cols):
            bits = [bool(c[r]) for c in cols]
            classes.append((
                _bits_to_int(bits[:kx]),
                _bits_to_int(bits[kx:2 * kx]),
                bits[2 * kx],
                _bits_to_int(bits[2 * kx + 1:2 * kx + 1 + ke]),
                _bits_to_int(bits[2 * kx + 1 + ke:]),
                int(sel[r]),
            ))

        init = ("init",)
        edge_letter: dict = {}
        succ_cache: dict = {}

        def successors(q):
            out = succ_cache.get(q)
            if out is not None:
                return out
            cand: dict[tuple[int, int], int] = {}
            for trig, qsat, iok, etrig, ful, letter in classes:
                if q == init:
                    if not iok:
                        continue
                    e = etrig & ~ful
                else:
                    o, e0 = q
                    if qsat & o != o:
                        continue
                    e = (e0 | etrig) & ~ful
                cand.setdefault((trig, e), letter)
            keep = _pareto_minimal(list(cand))
            out = []
            for t in keep:
                edge_letter[(q, t)] = cand[t]
                out.append(t)
            succ_cache[q] = out
            return out

        def in_set(q, k):
            return q != init and not (q[1] >> k) & 1

        found = accepting_lasso([init], successors, in_set, ke, self.node_limit)
        if found is None:
            return SatResult(False)
        stem, loop = found
        path = stem + loop + [loop[0]]
        letters = [edge_letter[(path[j], path[j + 1])] for j in range(len(path) - 1)]
        m = len(stem)
        word = Lasso(tuple(letters[:m]), tuple(letters[m:])).normalized()
        return SatResult(True, word.map(self.valuation))

    def valuation(self, letter: int) -> dict[str, bool]:
        return {v: bool((letter >> i) & 1) for i, v in enumerate(self.variables)}


def _first_of_each_row(cols: list[np.ndarray]) -> list[int]:
    """Index of the first occurrence of each distinct row, in increasing order."""
    words = []
    for start in range(0, len(cols), 64):
        w = np.zeros(cols[0].size, dtype=np.uint64)
        for j, c in enumerate(cols[start:start + 64]):
            w |= c.astype(np.uint64) << np.uint64(j)
        words.append(w)
    if len(words) == 1:
        _, first = np.unique(words[0], return_index=True)
    else:
        order = np.lexsort(words[::-1])
        stacked = np.stack(words, axis=1)[order]
        starts = np.flatnonzero(np.r_[True, np.any(stacked[1:] != stacked[:-1], axis=1)])
        first = np.minimum.reduceat(order, starts)
    return sorted(int(i) for i in first)


def _bits_to_int(bits) -> int:
    out = 0
    for j, b in enumerate(bits):
        if b:
            out |= 1 << j
    return out


def _pareto_minimal(pairs: list[tuple[int, int]]) -> list[tuple[int, int]]:
    pairs.sort(key=lambda t: (bin(t[0]).count("1") + bin(t[1]).count("1"), t))
    keep: list[tuple[int, int]] = []
    for o, e in pairs:
        if not any(ko & o == ko and ke & e == ke for ko, ke in keep):
            keep.append((o, e))
    return keep


def sat(clauses: Sequence[SnfClause], node_limit: int = DEFAULT_NODE_LIMIT,
        max_vars: int = DEFAULT_MAX_VARS) -> SatResult:
    """Decide the conjunction of ``clauses`` over infinite words."""
    return SnfProblem(clauses, max_vars, node_limit).solve()


def sat_formula(f: Formula, node_limit: int = DEFAULT_NODE_LIMIT) -> SatResult:
    """Satisfiability of an arbitrary formula through its Büchi automaton.

    Witness valuations assign every atom of ``f``; atoms the automaton leaves
    open are set false.
    """
    gba = ltl_to_gba(f)
    names = atoms(f)
    found = accepting_lasso(
        gba.initial,
        lambda q: gba.succ[q],
        lambda q, i: q in gba.acceptance[i],
        len(gba.acceptance),
        node_limit,
    )
    if found is None:
        return SatResult(False)
    stem, loop = found
    word = Lasso(stem, loop).map(lambda q: {p: p in gba.pos[q] for p in names})
    return SatResult(True, word.normalized())


def property_automaton(phi: Formula) -> Gba:
    """Automaton whose language is the violations of ``phi`` (runs of its transform)."""
    return ltl_to_gba(tau_transform(phi))


def check_star(a: Pks, phi: Formula, node_limit: int = DEFAULT_NODE_LIMIT,
               gba: Gba | None = None) -> CheckStarResult:
    """Whether no path of the Kripke structure ``a`` satisfies the transform of ``phi``.

    ``a`` must have no unknown labels and must carry the complement
    propositions the transform refers to.
    """
    if not a.is_ks:
        raise PreconditionError(f"{a.name} has unknown labels")
    if gba is None:
        gba = property_automaton(phi)
    missing = sorted({p for q in range(len(gba)) for p in gba.pos[q] | gba.neg[q]} - set(a.ap))
    if missing:
        raise PreconditionError(f"{a.name} lacks propositions {', '.join(missing)}")
    truth = {s: {p for p in a.ap if a.label(s, p) is Tri.TRUE} for s in a.states}

    def ok(s, q):
        t = truth[s]
        return gba.pos[q] <= t and not (gba.neg[q] & t)

    initial = [(s, q) for s in a.init for q in gba.initial if ok(s, q)]

    def successors(node):
        s, q = node
        return [(t, r) for t in a.successors(s) for r in gba.succ[q] if ok(t, r)]

    found = accepting_lasso(
        initial,
        successors,
        lambda node, i: node[1] in gba.acceptance[i],
        len(gba.acceptance),
        node_limit,
    )
    if found is None:
        return CheckStarResult(True)
    stem, loop = found
    path = Lasso(stem, loop).map(lambda node: node[0]).normalized()
    return CheckStarResult(False, path)
