"""Deletion-based extraction of locally minimal unsatisfiable cores."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

from tpcheck.errors import PreconditionError
from tpcheck.sat import DEFAULT_MAX_VARS, DEFAULT_NODE_LIMIT, SnfProblem
from tpcheck.snf import SnfClause

# Regularity first, then property, labels, reachability, and init last.
GROUP_ORDER = {"reg": 0, "property": 1, "label": 2, "reach": 3, "init": 4}


@dataclass(frozen=True)
class UnsatCore:
    clauses: tuple[SnfClause, ...]

    def _group(self, *names):
        return tuple(c for c in self.clauses if _group(c) in names)

    @property
    def ks_part(self) -> tuple[SnfClause, ...]:
        return self._group("init", "reach", "label")

    @property
    def reg_part(self) -> tuple[SnfClause, ...]:
        return self._group("reg")

    @property
    def property_part(self) -> tuple[SnfClause, ...]:
        return self._group("property", None)

    def __len__(self):
        return len(self.clauses)

    def __iter__(self):
        return iter(self.clauses)


def _group(c: SnfClause):
    return getattr(c.provenance, "group", None)


def deletion_order(clauses: Sequence[SnfClause], tiebreak: Callable[[SnfClause], object] | None = None) -> list[int]:
    """Indices in the order deletion is attempted.

    Within a provenance group the input order is kept, unless ``tiebreak``
    supplies a sort key (it is applied inside each group).
    """
    def key(i):
        c = clauses[i]
        extra = tiebreak(c) if tiebreak else 0
        return (GROUP_ORDER.get(_group(c), 1), extra, i)

    return sorted(range(len(clauses)), key=key)


def extract_uc(
    clauses: Sequence[SnfClause],
    tiebreak: Callable[[SnfClause], object] | None = None,
    verify: bool = False,
    node_limit: int = DEFAULT_NODE_LIMIT,
    max_vars: int = DEFAULT_MAX_VARS,
) -> UnsatCore:
    """Shrink ``clauses`` to a locally minimal unsatisfiable subset.

    One pass over :func:`deletion_order`; a clause is dropped for good when
    the rest stays unsatisfiable. With ``verify`` the result is checked
    clause by clause for minimality.
    """
    problem = SnfProblem(clauses, max_vars, node_limit)
    if problem.solve().satisfiable:
        raise PreconditionError("clause set is satisfiable; there is no unsatisfiable core")
    active = set(range(len(clauses)))
    for i in deletion_order(clauses, tiebreak):
        active.discard(i)
        if problem.solve(active).satisfiable:
            active.add(i)
    if problem.solve(active).satisfiable:
        raise AssertionError("core became satisfiable")
    if verify:
        for i in sorted(active):
            if not problem.solve(active - {i}).satisfiable:
                raise AssertionError(f"core is not minimal: {clauses[i].render()} is redundant")
    return UnsatCore(tuple(clauses[i] for i in sorted(active)))
