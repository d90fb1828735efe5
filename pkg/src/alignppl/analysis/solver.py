"""Worklist constraint solver and the alignment analysis entry point."""

from dataclasses import dataclass
from typing import Dict, FrozenSet

from ..syntax import ALet, AVar, BIf, BLam, BMatch, pattern_vars
from .constraints import abs_sort_key, generate_constraints


class Solver:
    """Least solution of a constraint set by worklist propagation.

    ``data`` maps names to abstract-value sets and ``unaligned`` holds the
    flagged names. ``edges`` maps a name to the constraints that must be
    re-fired when its data or flag changes. Constraints may register further
    edges and initialize new constraints while firing.
    """

    def __init__(self, names, order="lifo"):
        self.data = {n: set() for n in names}
        self.unaligned = set()
        self.edges = {n: [] for n in names}
        self._edge_set = set()
        self._initialized = set()
        self.worklist = []
        self._queued = set()
        self.order = order
        self.constraints = []

    def _ensure(self, n):
        if n not in self.data:
            self.data[n] = set()
            self.edges[n] = []

    def _push(self, n):
        if n not in self._queued:
            self._queued.add(n)
            self.worklist.append(n)

    def add_data(self, x, a):
        self._ensure(x)
        d = self.data[x]
        if a not in d:
            d.add(a)
            self._push(x)

    def add_unaligned(self, x):
        self._ensure(x)
        if x not in self.unaligned:
            self.unaligned.add(x)
            self._push(x)

    def watch(self, n, c):
        key = (n, id(c))
        if key not in self._edge_set:
            self._ensure(n)
            self._edge_set.add(key)
            self.edges[n].append(c)

    def initialize(self, c):
        if c in self._initialized:
            return
        self._initialized.add(c)
        self.constraints.append(c)
        for n in c.deps():
            self.watch(n, c)
        c.fire(self)

    def solve(self, constraints):
        for c in constraints:
            self.initialize(c)
        self.iterate()
        return self

    def iterate(self):
        wl = self.worklist
        while wl:
            n = wl.pop() if self.order == "lifo" else wl.pop(0)
            self._queued.discard(n)
            for c in list(self.edges[n]):
                c.fire(self)


def validate(constraints, data, unaligned):
    """Constraints not satisfied by the given solution."""
    return [c for c in constraints if not c.check(data, unaligned)]


@dataclass(frozen=True)
class AnalysisResult:
    data: Dict[str, FrozenSet]          # S_x for every binder
    unaligned: FrozenSet[str]           # flagged let-bound names
    unaligned_params: FrozenSet[str]    # flagged lambda parameters and pattern variables
    aligned: FrozenSet[str]             # let-bound names not flagged
    let_names: tuple                    # all let-bound names, program order

    def is_aligned(self, x):
        return x in self.aligned

    def to_json(self):
        return {n: {"abstract": [repr(a) for a in sorted(self.data[n], key=abs_sort_key)],
                    "unaligned": n in self.unaligned}
                for n in self.let_names}

    def table(self):
        rows = [("name", "aligned", "abstract values")]
        for n in self.let_names:
            vals = ", ".join(repr(a) for a in sorted(self.data[n], key=abs_sort_key))
            rows.append((n, "no" if n in self.unaligned else "yes", "{" + vals + "}"))
        w0 = max(len(r[0]) for r in rows)
        w1 = max(len(r[1]) for r in rows)
        return "\n".join(f"{a:<{w0}}  {b:<{w1}}  {c}".rstrip() for a, b, c in rows) + "\n"


def let_names(t):
    """Every let-bound name, in program order (depth first)."""
    out = []

    def go(t):
        while isinstance(t, ALet):
            out.append(t.name)
            b = t.bound
            if isinstance(b, BLam):
                go(b.body)
            elif isinstance(b, (BIf, BMatch)):
                go(b.then)
                go(b.els)
            t = t.body
        assert isinstance(t, AVar)

    go(t)
    return out


def binder_names(t):
    """Let-bound names, lambda parameters and pattern variables."""
    lets, other = [], []

    def go(t):
        while isinstance(t, ALet):
            lets.append(t.name)
            b = t.bound
            if isinstance(b, BLam):
                other.append(b.param)
                go(b.body)
            elif isinstance(b, (BIf, BMatch)):
                if isinstance(b, BMatch):
                    other.extend(sorted(pattern_vars(b.pattern)))
                go(b.then)
                go(b.els)
            t = t.body

    go(t)
    return lets, other


def solve(constraints, names, order="lifo"):
    s = Solver(names, order).solve(constraints)
    return s


def analyze_align(t, order="lifo", return_solver=False):
    """Run the alignment analysis on an ANF program."""
    lets, other = binder_names(t)
    cs = generate_constraints(t)
    s = solve(cs, lets + other, order)
    lets_set = set(lets)
    res = AnalysisResult(
        data={n: frozenset(v) for n, v in s.data.items()},
        unaligned=frozenset(s.unaligned & lets_set),
        unaligned_params=frozenset(s.unaligned - lets_set),
        aligned=frozenset(lets_set - s.unaligned),
        let_names=tuple(lets),
    )
    if return_solver:
        return res, s
    return res


def check_minimal(t, result=None, limit=None):
    """Spot-check minimality: dropping any derived fact must break a constraint.

    Returns the list of facts whose removal still validates (empty when the
    solution is minimal on the checked facts).
    """
    res, s = analyze_align(t, return_solver=True) if result is None else result
    cs = s.constraints
    data = {n: set(v) for n, v in s.data.items()}
    unaligned = set(s.unaligned)
    slack = []
    facts = [(n, a) for n in sorted(data) for a in sorted(data[n], key=abs_sort_key)]
    facts += [(n, None) for n in sorted(unaligned)]
    if limit is not None:
        facts = facts[:limit]
    for n, a in facts:
        if a is None:
            unaligned.discard(n)
            ok = not validate(cs, data, unaligned)
            unaligned.add(n)
        else:
            data[n].discard(a)
            ok = not validate(cs, data, unaligned)
            data[n].add(a)
        if ok:
            slack.append((n, a))
    return slack
