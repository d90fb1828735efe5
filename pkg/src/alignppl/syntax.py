"""Abstract syntax for surface terms, patterns, and A-normal form."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Optional, Tuple, Union


@dataclass(frozen=True)
class Pos:
    line: int
    col: int

    def __str__(self):
        return f"{self.line}:{self.col}"


NOPOS = Pos(0, 0)


# --- surface terms ---------------------------------------------------------

@dataclass(frozen=True)
class Var:
    name: str
    pos: Pos = field(default=NOPOS, compare=False, repr=False)


@dataclass(frozen=True)
class Const:
    """An intrinsic: a literal (bool, int, float, unit) or a named operator."""
    value: Any
    pos: Pos = field(default=NOPOS, compare=False, repr=False)


@dataclass(frozen=True)
class Lam:
    param: str
    body: "Term"
    pos: Pos = field(default=NOPOS, compare=False, repr=False)


@dataclass(frozen=True)
class App:
    fn: "Term"
    arg: "Term"
    pos: Pos = field(default=NOPOS, compare=False, repr=False)


@dataclass(frozen=True)
class Let:
    name: str
    bound: "Term"
    body: "Term"
    pos: Pos = field(default=NOPOS, compare=False, repr=False)


@dataclass(frozen=True)
class LetRec:
    name: str
    param: str
    lam_body: "Term"
    body: "Term"
    pos: Pos = field(default=NOPOS, compare=False, repr=False)
    self_ref: bool = field(default=False, compare=False)


@dataclass(frozen=True)
class If:
    cond: "Term"
    then: "Term"
    els: "Term"
    pos: Pos = field(default=NOPOS, compare=False, repr=False)


@dataclass(frozen=True)
class Assume:
    arg: "Term"
    pos: Pos = field(default=NOPOS, compare=False, repr=False)


@dataclass(frozen=True)
class Weight:
    arg: "Term"
    pos: Pos = field(default=NOPOS, compare=False, repr=False)


@dataclass(frozen=True)
class Match:
    scrutinee: "Term"
    pattern: "Pattern"
    then: "Term"
    els: "Term"
    pos: Pos = field(default=NOPOS, compare=False, repr=False)


@dataclass(frozen=True)
class Record:
    items: Tuple[Tuple[str, "Term"], ...]
    pos: Pos = field(default=NOPOS, compare=False, repr=False)


@dataclass(frozen=True)
class Variant:
    tag: str
    arg: "Term"
    pos: Pos = field(default=NOPOS, compare=False, repr=False)


@dataclass(frozen=True)
class Seq:
    items: Tuple["Term", ...]
    pos: Pos = field(default=NOPOS, compare=False, repr=False)


Term = Union[Var, Const, Lam, App, Let, LetRec, If, Assume, Weight, Match,
             Record, Variant, Seq]


# --- patterns --------------------------------------------------------------

@dataclass(frozen=True)
class VarPat:
    name: str


@dataclass(frozen=True)
class BoolPat:
    value: bool


@dataclass(frozen=True)
class RecordPat:
    items: Tuple[Tuple[str, "Pattern"], ...]


@dataclass(frozen=True)
class VariantPat:
    tag: str
    arg: "Pattern"


@dataclass(frozen=True)
class SeqConsPat:
    head: "Pattern"
    tail: "Pattern"


@dataclass(frozen=True)
class SeqEmptyPat:
    pass


@dataclass(frozen=True)
class Wildcard:
    pass


Pattern = Union[VarPat, BoolPat, RecordPat, VariantPat, SeqConsPat,
                SeqEmptyPat, Wildcard]


def pattern_vars(p):
    """Variables bound by a pattern, left to right."""
    if isinstance(p, VarPat):
        return [p.name]
    if isinstance(p, RecordPat):
        return [v for _, q in p.items for v in pattern_vars(q)]
    if isinstance(p, VariantPat):
        return pattern_vars(p.arg)
    if isinstance(p, SeqConsPat):
        return pattern_vars(p.head) + pattern_vars(p.tail)
    return []


def refutable(p) -> bool:
    return not isinstance(p, (VarPat, Wildcard))


# --- A-normal form ---------------------------------------------------------
#
# ANFTerm  ::= AVar(name) | ALet(name, bound, ANFTerm)
# bound    ::= BVar | BConst | BLam | BApp | BIf | BMatch | BAssume | BWeight
#            | BRecord | BVariant | BSeq

@dataclass(frozen=True)
class AVar:
    name: str


@dataclass(frozen=True)
class ALet:
    name: str
    bound: "ANFBound"
    body: "ANFTerm"


@dataclass(frozen=True)
class BVar:
    name: str


@dataclass(frozen=True)
class BConst:
    value: Any


@dataclass(frozen=True)
class BLam:
    param: str
    body: "ANFTerm"
    rec: bool = False


@dataclass(frozen=True)
class BApp:
    fn: str
    arg: str


@dataclass(frozen=True)
class BIf:
    cond: str
    then: "ANFTerm"
    els: "ANFTerm"


@dataclass(frozen=True)
class BMatch:
    scrutinee: str
    pattern: Pattern
    then: "ANFTerm"
    els: "ANFTerm"


@dataclass(frozen=True)
class BAssume:
    arg: str


@dataclass(frozen=True)
class BWeight:
    arg: str


@dataclass(frozen=True)
class BRecord:
    items: Tuple[Tuple[str, str], ...]


@dataclass(frozen=True)
class BVariant:
    tag: str
    arg: str


@dataclass(frozen=True)
class BSeq:
    items: Tuple[str, ...]


ANFBound = Union[BVar, BConst, BLam, BApp, BIf, BMatch, BAssume, BWeight,
                 BRecord, BVariant, BSeq]
ANFTerm = Union[AVar, ALet]


def name_of(t: ANFTerm) -> str:
    """The variable labelling an ANF term: its tail variable."""
    while isinstance(t, ALet):
        t = t.body
    return t.name


def names_of(t: ANFTerm):
    """Names bound by the top-level let sequence of `t` (not nested ones)."""
    out = []
    while isinstance(t, ALet):
        out.append(t.name)
        t = t.body
    return out


def all_binders(t: ANFTerm):
    """Every name bound anywhere in `t`: lets, lambda params, pattern vars."""
    out = []

    def go(t):
        while isinstance(t, ALet):
            out.append(t.name)
            b = t.bound
            if isinstance(b, BLam):
                out.append(b.param)
                go(b.body)
            elif isinstance(b, BIf):
                go(b.then)
                go(b.els)
            elif isinstance(b, BMatch):
                out.extend(pattern_vars(b.pattern))
                go(b.then)
                go(b.els)
            t = t.body

    go(t)
    return out


def find_binding(t: ANFTerm, name: str) -> Optional[ALet]:
    """Locate the let binding for `name` anywhere in `t`."""
    stack = [t]
    while stack:
        t = stack.pop()
        while isinstance(t, ALet):
            if t.name == name:
                return t
            b = t.bound
            if isinstance(b, BLam):
                stack.append(b.body)
            elif isinstance(b, (BIf, BMatch)):
                stack.append(b.then)
                stack.append(b.els)
            t = t.body
    return None
