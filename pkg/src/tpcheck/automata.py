"""LTL to generalized Büchi automata and accepting-lasso search.

The tableau follows the classic on-the-fly construction of Gerth, Peled,
Vardi and Wolper. Emptiness is decided on the degeneralized automaton with
a nested depth-first search; the lasso it finds is then shortened with
two breadth-first searches (shortest stem to the accepting state, shortest
cycle back to it).
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from typing import Callable, Hashable, Iterable, Sequence

from tpcheck.errors import ResourceLimitExceeded
from tpcheck.ltl import (
    FALSE,
    TRUE,
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
    render,
    subformulas,
    to_nnf,
)

DEFAULT_NODE_LIMIT = 10**6
_INIT = -1


def core_form(f: Formula) -> Formula:
    """NNF over literals, constants, ``&``, ``|``, ``X``, ``U`` and ``R`` only."""
    return _core(to_nnf(f))


def _core(f: Formula) -> Formula:
    if isinstance(f, (Atom, Const, Not)):
        return f
    if isinstance(f, Globally):
        return Release(FALSE, _core(f.arg))
    if isinstance(f, Finally):
        return Until(TRUE, _core(f.arg))
    if isinstance(f, WeakUntil):
        a, b = _core(f.left), _core(f.right)
        return Release(b, Or(a, b))
    if isinstance(f, Next):
        return Next(_core(f.arg))
    return type(f)(_core(f.left), _core(f.right))


@dataclass
class _Node:
    incoming: set
    new: set
    old: set = field(default_factory=set)
    next: set = field(default_factory=set)


def _contradicts(lit: Formula, old: set) -> bool:
    if isinstance(lit, Atom):
        return Not(lit) in old
    return lit.arg in old


@dataclass
class Gba:
    """Generalized Büchi automaton with state-based labels.

    A run reads letter ``i`` in state ``q_i``; the letter must make every
    literal in ``pos[q]`` true and every literal in ``neg[q]`` false.
    """

    formula: Formula
    pos: list[frozenset]
    neg: list[frozenset]
    initial: list[int]
    succ: list[list[int]]
    acceptance: list[frozenset]

    def __len__(self):
        return len(self.pos)

    def consistent(self, q: int, valuation: Callable[[str], bool]) -> bool:
        return all(valuation(p) for p in self.pos[q]) and not any(valuation(p) for p in self.neg[q])

    def dump(self) -> str:
        lines = [f"# automaton for {render(self.formula)}", f"states {len(self)}"]
        lines.append("acceptance " + " ".join("{" + ",".join(map(str, sorted(a))) + "}" for a in self.acceptance))
        for q in range(len(self)):
            lits = sorted(self.pos[q]) + ["!" + p for p in sorted(self.neg[q])]
            mark = " init" if q in self.initial else ""
            lines.append(f"{q}{mark} [{' '.join(lits)}] -> {' '.join(map(str, self.succ[q]))}".rstrip())
        return "\n".join(lines) + "\n"


def ltl_to_gba(f: Formula) -> Gba:
    g = core_form(f)
    nodes: dict[tuple[frozenset, frozenset], tuple[int, _Node]] = {}
    order: list[_Node] = []
    stack = [_Node(incoming={_INIT}, new={g})]
    while stack:
        node = stack.pop()
        if not node.new:
            key = (frozenset(node.old), frozenset(node.next))
            if key in nodes:
                nodes[key][1].incoming |= node.incoming
                continue
            nid = len(order)
            nodes[key] = (nid, node)
            order.append(node)
            stack.append(_Node(incoming={nid}, new=set(node.next)))
            continue
        eta = node.new.pop()
        if eta in node.old:
            stack.append(node)
            continue
        if isinstance(eta, Const):
            if eta.value:
                node.old.add(eta)
                stack.append(node)
            continue
        if isinstance(eta, (Atom, Not)):
            if not _contradicts(eta, node.old):
                node.old.add(eta)
                stack.append(node)
            continue
        old = node.old | {eta}
        if isinstance(eta, And):
            node.new |= {eta.left, eta.right} - old
            node.old = old
            stack.append(node)
        elif isinstance(eta, Next):
            node.old = old
            node.next = node.next | {eta.arg}
            stack.append(node)
        else:
            if isinstance(eta, Or):
                new1, next1, new2 = {eta.left}, set(), {eta.right}
            elif isinstance(eta, Until):
                new1, next1, new2 = {eta.left}, {eta}, {eta.right}
            elif isinstance(eta, Release):
                new1, next1, new2 = {eta.right}, {eta}, {eta.left, eta.right}
            else:
                raise TypeError(f"unexpected node {eta!r}")
            stack.append(_Node(set(node.incoming), node.new | (new1 - old), set(old), node.next | next1))
            stack.append(_Node(set(node.incoming), node.new | (new2 - old), set(old), set(node.next)))

    n = len(order)
    succ: list[list[int]] = [[] for _ in range(n)]
    initial = []
    for qid, node in enumerate(order):
        for i in sorted(node.incoming):
            if i == _INIT:
                initial.append(qid)
            else:
                succ[i].append(qid)
    untils = [u for u in dict.fromkeys(subformulas(g)) if isinstance(u, Until)]
    acceptance = [
        frozenset(q for q, node in enumerate(order) if u not in node.old or u.right in node.old)
        for u in untils
    ]
    pos = [frozenset(x.name for x in node.old if isinstance(x, Atom)) for node in order]
    neg = [frozenset(x.arg.name for x in node.old if isinstance(x, Not)) for node in order]
    return Gba(f, pos, neg, initial, succ, acceptance)


# -- emptiness ----------------------------------------------------------------


def accepting_lasso(
    initial: Iterable[Hashable],
    successors: Callable[[Hashable], Sequence[Hashable]],
    in_set: Callable[[Hashable, int], bool],
    num_sets: int,
    node_limit: int = DEFAULT_NODE_LIMIT,
) -> tuple[list, list] | None:
    """Find a run visiting each of ``num_sets`` acceptance sets infinitely often.

    Returns ``(stem, cycle)`` over the original states, or ``None`` when the
    language is empty. ``in_set(v, i)`` tells whether ``v`` belongs to set
    ``i``; with ``num_sets == 0`` every infinite run is accepting.
    """
    k = max(num_sets, 1)
    member = in_set if num_sets else (lambda v, i: True)

    cache: dict = {}

    def dsucc(state):
        out = cache.get(state)
        if out is None:
            v, i = state
            j = (i + 1) % k if member(v, i) else i
            out = [(w, j) for w in successors(v)]
            cache[state] = out
        return out

    def accepting(state):
        return state[1] == 0 and member(state[0], 0)

    inits = [(v, 0) for v in dict.fromkeys(initial)]
    seed = _nested_dfs(inits, dsucc, accepting, node_limit)
    if seed is None:
        return None
    seed, stem, cycle = _shortest_lasso(inits, dsucc, accepting, seed)
    # stem ends at seed; cycle runs from a successor of seed back to seed
    loop = [seed] + cycle[:-1]
    return [s[0] for s in stem[:-1]], [s[0] for s in loop]


def _nested_dfs(inits, succ, accepting, node_limit):
    outer: set = set()
    inner: set = set()

    def inner_search(seed) -> bool:
        stack = [iter(succ(seed))]
        while stack:
            for t in stack[-1]:
                if t == seed:
                    return True
                if t not in inner:
                    inner.add(t)
                    stack.append(iter(succ(t)))
                    break
            else:
                stack.pop()
        return False

    for s0 in inits:
        if s0 in outer:
            continue
        outer.add(s0)
        stack = [(s0, iter(succ(s0)))]
        while stack:
            s, it = stack[-1]
            for t in it:
                if t not in outer:
                    outer.add(t)
                    if len(outer) > node_limit:
                        raise ResourceLimitExceeded(f"search exceeded {node_limit} nodes")
                    stack.append((t, iter(succ(t))))
                    break
            else:
                stack.pop()
                if accepting(s) and inner_search(s):
                    return s
    return None


def _shortest_lasso(inits, succ, accepting, seed):
    # accepting states closer to the start than the search's seed may still
    # lie on a cycle; try them in breadth-first order
    stem = _bfs_path(inits, succ, lambda s: s == seed)
    for cand in _bfs_order(inits, succ, len(stem) - 1):
        if accepting(cand):
            cycle = _bfs_path(succ(cand), succ, lambda s: s == cand, required=False)
            if cycle is not None:
                return cand, _bfs_path(inits, succ, lambda s: s == cand), cycle
    return seed, stem, _bfs_path(succ(seed), succ, lambda s: s == seed)


def _bfs_order(starts, succ, max_depth):
    seen = set()
    frontier = []
    for s in starts:
        if s not in seen:
            seen.add(s)
            frontier.append(s)
    depth = 0
    while frontier and depth < max_depth:
        yield from frontier
        nxt = []
        for s in frontier:
            for t in succ(s):
                if t not in seen:
                    seen.add(t)
                    nxt.append(t)
        frontier = nxt
        depth += 1


def _bfs_path(starts, succ, goal, required=True) -> list | None:
    parent: dict = {}
    queue = deque()
    for s in starts:
        if s not in parent:
            parent[s] = None
            queue.append(s)
    while queue:
        s = queue.popleft()
        if goal(s):
            path = [s]
            while parent[path[-1]] is not None:
                path.append(parent[path[-1]])
            return path[::-1]
        for t in succ(s):
            if t not in parent:
                parent[t] = s
                queue.append(t)
    if required:
        raise AssertionError("target unreachable in lasso reconstruction")
    return None
