"""Abstract values and constraint generation for the alignment analysis.

Each constraint knows how to ``fire`` against a solver (adding the facts it
implies given the current solution, registering the names it depends on) and
how to ``check`` a finished solution.
"""

from dataclasses import dataclass
from typing import FrozenSet, Tuple

from ..intrinsics import Prim
from ..syntax import (ALet, AVar, BApp, BAssume, BConst, BIf, BLam, BMatch,
                      BRecord, BSeq, BVar, BVariant, BWeight, RecordPat,
                      SeqConsPat, SeqEmptyPat, VarPat, VariantPat, names_of,
                      name_of, pattern_vars, refutable)


# ---------------------------------------------------------------- abstract values

class _Stoch:
    __slots__ = ()

    def __repr__(self):
        return "stoch"

    def __reduce__(self):
        return "STOCH"


STOCH = _Stoch()


@dataclass(frozen=True)
class AbsLam:
    param: str
    body: str

    def __repr__(self):
        return f"λ{self.param}.{self.body}"


@dataclass(frozen=True)
class AbsConst:
    arity: int

    def __repr__(self):
        return f"const {self.arity}"


@dataclass(frozen=True)
class AbsRecord:
    items: Tuple[Tuple[str, FrozenSet[str]], ...]

    def get(self, key):
        for k, ns in self.items:
            if k == key:
                return ns
        return None

    def __repr__(self):
        inner = ", ".join(f"{k} = {{{', '.join(sorted(ns))}}}" for k, ns in self.items)
        return "{" + inner + "}"


@dataclass(frozen=True)
class AbsVariant:
    tag: str
    names: FrozenSet[str]

    def __repr__(self):
        return f"#{self.tag} {{{', '.join(sorted(self.names))}}}"


@dataclass(frozen=True)
class AbsSeq:
    names: FrozenSet[str]

    def __repr__(self):
        return "[" + ", ".join(sorted(self.names)) + "]"


def abs_sort_key(a):
    return (type(a).__name__, repr(a))


# ---------------------------------------------------------------- match helpers

def _union(names, data, visit):
    out = set()
    for n in names:
        if visit is not None:
            visit(n)
        out |= data.get(n, ())
    return out


def match_stochastic(vals, p, data=None, visit=None):
    """Can randomness decide whether a value from `vals` matches `p`?"""
    data = data if data is not None else {}
    if not refutable(p):
        return False
    if STOCH in vals:
        return True
    for v in vals:
        if isinstance(p, RecordPat) and isinstance(v, AbsRecord):
            for k, q in p.items:
                ns = v.get(k)
                if ns is not None and match_stochastic(_union(ns, data, visit), q, data, visit):
                    return True
        elif isinstance(p, VariantPat) and isinstance(v, AbsVariant):
            if v.tag == p.tag and match_stochastic(_union(v.names, data, visit), p.arg,
                                                   data, visit):
                return True
        elif isinstance(p, SeqConsPat) and isinstance(v, AbsSeq):
            if match_stochastic(_union(v.names, data, visit), p.head, data, visit):
                return True
            if match_stochastic({v}, p.tail, data, visit):
                return True
    return False


def _deep_stoch(x, data, visit, seen):
    """Is stoch reachable from S_x through record, variant and sequence names?"""
    if x in seen:
        return False
    seen.add(x)
    visit(x)
    vals = data.get(x, ())
    if STOCH in vals:
        return True
    for v in vals:
        if isinstance(v, AbsRecord):
            ns = [n for _, names in v.items for n in names]
        elif isinstance(v, (AbsVariant, AbsSeq)):
            ns = v.names
        else:
            continue
        if any(_deep_stoch(n, data, visit, seen) for n in sorted(ns)):
            return True
    return False


def _bind_facts(vals, p, data, visit, out):
    """Facts (name, abstract value) flowing into the variables of `p`."""
    if isinstance(p, VarPat):
        for a in vals:
            out.append((p.name, a))
        return
    if STOCH in vals:
        for n in pattern_vars(p):
            out.append((n, STOCH))
    for v in vals:
        if isinstance(p, RecordPat) and isinstance(v, AbsRecord):
            for k, q in p.items:
                ns = v.get(k)
                if ns is not None:
                    _bind_facts(_union(ns, data, visit), q, data, visit, out)
        elif isinstance(p, VariantPat) and isinstance(v, AbsVariant) and v.tag == p.tag:
            _bind_facts(_union(v.names, data, visit), p.arg, data, visit, out)
        elif isinstance(p, SeqConsPat) and isinstance(v, AbsSeq):
            _bind_facts(_union(v.names, data, visit), p.head, data, visit, out)
            _bind_facts({v}, p.tail, data, visit, out)


def _fmt(ns):
    return "{" + ", ".join(ns) + "}"


# ---------------------------------------------------------------- constraints

class Constraint:
    """Base class. ``deps`` are the names whose change re-fires the constraint."""

    __slots__ = ()

    def deps(self):
        return ()

    def fire(self, s):
        raise NotImplementedError

    def check(self, data, unaligned):
        raise NotImplementedError

    def mentions(self):
        return set(self.deps())


@dataclass(frozen=True, eq=True)
class Member(Constraint):
    """a ∈ S_x"""
    a: object
    x: str

    def fire(self, s):
        s.add_data(self.x, self.a)

    def check(self, data, unaligned):
        return self.a in data[self.x]

    def mentions(self):
        return {self.x}

    def __str__(self):
        return f"{self.a!r} ∈ S_{self.x}"


@dataclass(frozen=True)
class Subset(Constraint):
    """S_x ⊆ S_y"""
    x: str
    y: str

    def deps(self):
        return (self.x,)

    def fire(self, s):
        for a in list(s.data[self.x]):
            s.add_data(self.y, a)

    def check(self, data, unaligned):
        return data[self.x] <= data[self.y]

    def mentions(self):
        return {self.x, self.y}

    def __str__(self):
        return f"S_{self.x} ⊆ S_{self.y}"


@dataclass(frozen=True)
class LamApp(Constraint):
    """∀ λz.y ∈ S_lhs ⇒ S_rhs ⊆ S_z ∧ S_y ⊆ S_x"""
    lhs: str
    rhs: str
    x: str

    def deps(self):
        return (self.lhs,)

    def fire(self, s):
        for a in list(s.data[self.lhs]):
            if isinstance(a, AbsLam):
                s.initialize(Subset(self.rhs, a.param))
                s.initialize(Subset(a.body, self.x))

    def check(self, data, unaligned):
        return all(data[self.rhs] <= data[a.param] and data[a.body] <= data[self.x]
                   for a in data[self.lhs] if isinstance(a, AbsLam))

    def mentions(self):
        return {self.lhs, self.rhs, self.x}

    def __str__(self):
        return f"∀λz.y ∈ S_{self.lhs} ⇒ S_{self.rhs} ⊆ S_z ∧ S_y ⊆ S_{self.x}"


@dataclass(frozen=True)
class ConstApp(Constraint):
    """const n ∈ S_lhs ∧ n > 1 ⇒ const n−1 ∈ S_x"""
    lhs: str
    x: str

    def deps(self):
        return (self.lhs,)

    def fire(self, s):
        for a in list(s.data[self.lhs]):
            if isinstance(a, AbsConst) and a.arity > 1:
                s.add_data(self.x, AbsConst(a.arity - 1))

    def check(self, data, unaligned):
        return all(AbsConst(a.arity - 1) in data[self.x] for a in data[self.lhs]
                   if isinstance(a, AbsConst) and a.arity > 1)

    def mentions(self):
        return {self.lhs, self.x}

    def __str__(self):
        return f"const n ∈ S_{self.lhs} ∧ n > 1 ⇒ const n−1 ∈ S_{self.x}"


@dataclass(frozen=True)
class StochFlow(Constraint):
    """stoch ∈ S_src ⇒ stoch ∈ S_x"""
    src: str
    x: str

    def deps(self):
        return (self.src,)

    def fire(self, s):
        if STOCH in s.data[self.src]:
            s.add_data(self.x, STOCH)

    def check(self, data, unaligned):
        return STOCH not in data[self.src] or STOCH in data[self.x]

    def mentions(self):
        return {self.src, self.x}

    def __str__(self):
        return f"stoch ∈ S_{self.src} ⇒ stoch ∈ S_{self.x}"


@dataclass(frozen=True)
class ConstStoch(Constraint):
    """const _ ∈ S_lhs ⇒ (stoch ∈ S_rhs ⇒ stoch ∈ S_x)

    The argument counts as stochastic when stoch is reachable from it through
    record, variant or sequence components, since an intrinsic may read them.
    """
    lhs: str
    rhs: str
    x: str

    def deps(self):
        return (self.lhs, self.rhs)

    def fire(self, s):
        if not any(isinstance(a, AbsConst) for a in s.data[self.lhs]):
            return
        if _deep_stoch(self.rhs, s.data, lambda n: s.watch(n, self), set()):
            s.add_data(self.x, STOCH)

    def check(self, data, unaligned):
        if not any(isinstance(a, AbsConst) for a in data[self.lhs]):
            return True
        return (not _deep_stoch(self.rhs, data, lambda n: None, set())
                or STOCH in data[self.x])

    def mentions(self):
        return {self.lhs, self.rhs, self.x}

    def __str__(self):
        return f"const _ ∈ S_{self.lhs} ⇒ (stoch ∈ S_{self.rhs} ⇒ stoch ∈ S_{self.x})"


@dataclass(frozen=True)
class UnalignedLams(Constraint):
    """unaligned_x ⇒ ∀ λy ∈ S_lhs: unaligned_y"""
    x: str
    lhs: str

    def deps(self):
        return (self.x, self.lhs)

    def fire(self, s):
        if self.x in s.unaligned:
            for a in list(s.data[self.lhs]):
                if isinstance(a, AbsLam):
                    s.add_unaligned(a.param)

    def check(self, data, unaligned):
        return self.x not in unaligned or all(
            a.param in unaligned for a in data[self.lhs] if isinstance(a, AbsLam))

    def mentions(self):
        return {self.x, self.lhs}

    def __str__(self):
        return f"unaligned_{self.x} ⇒ ∀λy ∈ S_{self.lhs}: unaligned_y"


@dataclass(frozen=True)
class StochLams(Constraint):
    """stoch ∈ S_lhs ⇒ ∀ λy ∈ S_lhs: unaligned_y"""
    lhs: str

    def deps(self):
        return (self.lhs,)

    def fire(self, s):
        d = s.data[self.lhs]
        if STOCH in d:
            for a in list(d):
                if isinstance(a, AbsLam):
                    s.add_unaligned(a.param)

    def check(self, data, unaligned):
        d = data[self.lhs]
        return STOCH not in d or all(
            a.param in unaligned for a in d if isinstance(a, AbsLam))

    def __str__(self):
        return f"stoch ∈ S_{self.lhs} ⇒ ∀λy ∈ S_{self.lhs}: unaligned_y"


@dataclass(frozen=True)
class UnalignedImpl(Constraint):
    """unaligned_x ⇒ unaligned_n for every n in names"""
    x: str
    names: Tuple[str, ...]

    def deps(self):
        return (self.x,)

    def fire(self, s):
        if self.x in s.unaligned:
            for n in self.names:
                s.add_unaligned(n)

    def check(self, data, unaligned):
        return self.x not in unaligned or all(n in unaligned for n in self.names)

    def mentions(self):
        return {self.x, *self.names}

    def __str__(self):
        return f"unaligned_{self.x} ⇒ unaligned_n for n ∈ {_fmt(self.names)}"


@dataclass(frozen=True)
class StochUnaligned(Constraint):
    """stoch ∈ S_cond ⇒ unaligned_n for every n in names"""
    cond: str
    names: Tuple[str, ...]

    def deps(self):
        return (self.cond,)

    def fire(self, s):
        if STOCH in s.data[self.cond]:
            for n in self.names:
                s.add_unaligned(n)

    def check(self, data, unaligned):
        return STOCH not in data[self.cond] or all(n in unaligned for n in self.names)

    def mentions(self):
        return {self.cond, *self.names}

    def __str__(self):
        return f"stoch ∈ S_{self.cond} ⇒ unaligned_n for n ∈ {_fmt(self.names)}"


@dataclass(frozen=True)
class MatchBind(Constraint):
    """Values of the scrutinee flow into the pattern's variables."""
    scrut: str
    pattern: object

    def deps(self):
        return (self.scrut,)

    def _facts(self, data, visit):
        out = []
        _bind_facts(data.get(self.scrut, set()), self.pattern, data, visit, out)
        return out

    def fire(self, s):
        for n, a in self._facts(s.data, lambda n: s.watch(n, self)):
            s.add_data(n, a)

    def check(self, data, unaligned):
        return all(a in data[n] for n, a in self._facts(data, None))

    def mentions(self):
        return {self.scrut, *pattern_vars(self.pattern)}

    def __str__(self):
        from ..pretty import pp_pattern
        return f"S_{self.scrut} flows into ({pp_pattern(self.pattern)})"


@dataclass(frozen=True)
class MatchStoch(Constraint):
    """matchStochastic(S_scrut, p) ⇒ stoch ∈ S_x ∧ unaligned_n for n in names"""
    scrut: str
    pattern: object
    x: str
    names: Tuple[str, ...]

    def deps(self):
        return (self.scrut,)

    def fire(self, s):
        if match_stochastic(s.data[self.scrut], self.pattern, s.data,
                            lambda n: s.watch(n, self)):
            s.add_data(self.x, STOCH)
            for n in self.names:
                s.add_unaligned(n)

    def check(self, data, unaligned):
        if not match_stochastic(data[self.scrut], self.pattern, data):
            return True
        return STOCH in data[self.x] and all(n in unaligned for n in self.names)

    def mentions(self):
        return {self.scrut, self.x, *self.names}

    def __str__(self):
        from ..pretty import pp_pattern
        return (f"stochastic(S_{self.scrut}, {pp_pattern(self.pattern)}) ⇒ "
                f"stoch ∈ S_{self.x} ∧ unaligned_n for n ∈ {_fmt(self.names)}")


# ---------------------------------------------------------------- generation

def generate_constraints(t):
    """Constraints of an ANF program, in program order."""
    out = []
    _gen(t, out)
    return out


def _gen(t, out):
    while isinstance(t, ALet):
        x, b = t.name, t.bound
        if isinstance(b, BVar):
            out.append(Subset(b.name, x))
        elif isinstance(b, BConst):
            if type(b.value) is Prim and b.value.arity > 0:
                out.append(Member(AbsConst(b.value.arity), x))
        elif isinstance(b, BLam):
            out.append(Member(AbsLam(b.param, name_of(b.body)), x))
            out.append(UnalignedImpl(b.param, tuple(names_of(b.body))))
            _gen(b.body, out)
        elif isinstance(b, BApp):
            f, a = b.fn, b.arg
            out.append(LamApp(f, a, x))
            out.append(ConstApp(f, x))
            out.append(StochFlow(f, x))
            out.append(ConstStoch(f, a, x))
            out.append(UnalignedLams(x, f))
            out.append(StochLams(f))
        elif isinstance(b, (BIf, BMatch)):
            then_n, else_n = name_of(b.then), name_of(b.els)
            branch = tuple(names_of(b.then)) + tuple(names_of(b.els))
            out.append(Subset(then_n, x))
            out.append(Subset(else_n, x))
            if isinstance(b, BIf):
                out.append(StochFlow(b.cond, x))
                out.append(UnalignedImpl(x, branch))
                out.append(StochUnaligned(b.cond, branch))
            else:
                out.append(MatchBind(b.scrutinee, b.pattern))
                out.append(UnalignedImpl(x, branch))
                out.append(MatchStoch(b.scrutinee, b.pattern, x, branch))
            _gen(b.then, out)
            _gen(b.els, out)
        elif isinstance(b, BAssume):
            out.append(Member(STOCH, x))
        elif isinstance(b, BWeight):
            pass
        elif isinstance(b, BRecord):
            out.append(Member(AbsRecord(tuple((k, frozenset([n])) for k, n in b.items)), x))
        elif isinstance(b, BVariant):
            out.append(Member(AbsVariant(b.tag, frozenset([b.arg])), x))
        elif isinstance(b, BSeq):
            out.append(Member(AbsSeq(frozenset(b.items)), x))
        else:
            raise TypeError(f"not an ANF bound: {b!r}")
        t = t.body
    assert isinstance(t, AVar)


__all__ = ["STOCH", "AbsLam", "AbsConst", "AbsRecord", "AbsVariant", "AbsSeq",
           "Constraint", "Member", "Subset", "LamApp", "ConstApp", "StochFlow",
           "ConstStoch", "UnalignedLams", "StochLams", "UnalignedImpl",
           "StochUnaligned", "MatchBind", "MatchStoch", "generate_constraints",
           "match_stochastic", "abs_sort_key", "SeqEmptyPat"]
