"""Canonical pretty-printer for surface terms and ANF terms.

Output reparses to an equal term (positions aside) and is byte-stable.
"""

from . import intrinsics
from .intrinsics import Prim
from .syntax import (ALet, AVar, App, Assume, BApp, BAssume, BConst, BIf, BLam,
                     BMatch, BRecord, BSeq, BVar, BVariant, BWeight, BoolPat,
                     Const, If, Lam, Let, LetRec, Match, Record, RecordPat, Seq,
                     SeqConsPat, SeqEmptyPat, Var, VarPat, Variant, VariantPat,
                     Weight, Wildcard)

EXPR, OR, AND, CMP, CONS, ADD, MUL, UNARY, APP, ATOM = range(10)

_INFIX = {
    "or": ("||", OR), "and": ("&&", AND),
    "eq": ("==", CMP), "neq": ("!=", CMP), "lt": ("<", CMP), "le": ("<=", CMP),
    "gt": (">", CMP), "ge": (">=", CMP),
    "cons": ("::", CONS),
    "add": ("+", ADD), "sub": ("-", ADD), "mul": ("*", MUL), "div": ("/", MUL),
}

_IND = "  "


def show_const(v):
    if v is None:
        return "()"
    if v is True:
        return "true"
    if v is False:
        return "false"
    if isinstance(v, Prim):
        if v.args:
            raise ValueError("partially applied intrinsic has no surface syntax")
        return v.name
    if isinstance(v, (int, float)):
        s = repr(v)
        return f"({s})" if s.startswith("-") else s
    raise ValueError(f"constant {v!r} has no surface syntax")


def _binop(t):
    if (isinstance(t, App) and isinstance(t.fn, App) and isinstance(t.fn.fn, Const)
            and isinstance(t.fn.fn.value, Prim) and not t.fn.fn.value.args
            and t.fn.fn.value.name in _INFIX):
        return t.fn.fn.value.name, t.fn.arg, t.arg
    return None


def _is_prim(t, name):
    return (isinstance(t, Const) and isinstance(t.value, Prim)
            and not t.value.args and t.value.name == name)


def _paren(s, mine, need):
    return f"({s})" if mine < need else s


def pp(t, level=EXPR, ind=""):
    if isinstance(t, Var):
        return t.name
    if isinstance(t, Const):
        return show_const(t.value)
    if isinstance(t, Let):
        inner = ind + _IND if level > EXPR else ind
        if t.name == "_":
            s = f"{pp(t.bound, OR, inner)};\n{inner}{pp(t.body, EXPR, inner)}"
        else:
            s = (f"let {t.name} = {pp(t.bound, EXPR, inner + _IND)} in\n"
                 f"{inner}{pp(t.body, EXPR, inner)}")
        return _wrap(s, level, ind)
    if isinstance(t, LetRec):
        inner = ind + _IND if level > EXPR else ind
        if t.param is None:
            bound = pp(t.lam_body, EXPR, inner + _IND)
        else:
            bound = pp(Lam(t.param, t.lam_body), EXPR, inner + _IND)
        s = f"let rec {t.name} = {bound} in\n{inner}{pp(t.body, EXPR, inner)}"
        return _wrap(s, level, ind)
    if isinstance(t, Lam):
        inner = ind + _IND
        s = f"lam {t.param}.\n{inner}{pp(t.body, EXPR, inner)}"
        return _wrap(s, level, ind)
    if isinstance(t, If):
        inner = ind + _IND
        s = (f"if {pp(t.cond, EXPR, inner)} then\n{inner}{pp(t.then, EXPR, inner)}\n"
             f"{ind}else\n{inner}{pp(t.els, EXPR, inner)}")
        return _wrap(s, level, ind)
    if isinstance(t, Match):
        inner = ind + _IND
        s = (f"match {pp(t.scrutinee, EXPR, inner)} with {pp_pattern(t.pattern)} then\n"
             f"{inner}{pp(t.then, EXPR, inner)}\n{ind}else\n{inner}{pp(t.els, EXPR, inner)}")
        return _wrap(s, level, ind)
    if isinstance(t, Assume):
        return _paren(f"assume {pp(t.arg, UNARY, ind)}", UNARY, level)
    if isinstance(t, Weight):
        return _paren(f"weight {pp(t.arg, UNARY, ind)}", UNARY, level)
    if isinstance(t, Record):
        inner = ", ".join(f"{k} = {pp(v, EXPR, ind)}" for k, v in t.items)
        return "{" + inner + "}"
    if isinstance(t, Seq):
        return "[" + ", ".join(pp(v, EXPR, ind) for v in t.items) + "]"
    if isinstance(t, Variant):
        return _paren(f"#{t.tag} {pp(t.arg, ATOM, ind)}", APP, level)
    if isinstance(t, App):
        b = _binop(t)
        if b is not None:
            name, lhs, rhs = b
            op, prec = _INFIX[name]
            if name == "cons":
                lp, rp = ADD, CONS
            elif prec == CMP:
                lp, rp = CONS, CONS
            else:
                lp, rp = prec, prec + 1
            s = f"{pp(lhs, lp, ind)} {op} {pp(rhs, rp, ind)}"
            return _paren(s, prec, level)
        if _is_prim(t.fn, "neg"):
            a = t.arg
            if isinstance(a, Const) and isinstance(a.value, (int, float)) \
                    and not isinstance(a.value, bool):
                return _paren(f"-({pp(a, EXPR, ind)})", UNARY, level)
            return _paren(f"-{pp(a, UNARY, ind)}", UNARY, level)
        s = f"{pp(t.fn, APP, ind)} {pp(t.arg, ATOM, ind)}"
        return _paren(s, APP, level)
    raise TypeError(f"not a term: {t!r}")


def _wrap(s, level, ind):
    if level > EXPR:
        return "(" + s + ")"
    return s


def pp_pattern(p, top=True):
    if isinstance(p, VarPat):
        return p.name
    if isinstance(p, Wildcard):
        return "_"
    if isinstance(p, BoolPat):
        return "true" if p.value else "false"
    if isinstance(p, SeqEmptyPat):
        return "[]"
    if isinstance(p, RecordPat):
        return "{" + ", ".join(f"{k} = {pp_pattern(q)}" for k, q in p.items) + "}"
    if isinstance(p, VariantPat):
        s = f"#{p.tag} {pp_pattern(p.arg, False)}"
        return s if top else f"({s})"
    if isinstance(p, SeqConsPat):
        s = f"{pp_pattern(p.head, False)} :: {pp_pattern(p.tail, True)}"
        return s if top else f"({s})"
    raise TypeError(f"not a pattern: {p!r}")


def pretty(t) -> str:
    """Canonical text for a surface term or an ANF term."""
    if isinstance(t, (AVar, ALet)):
        return pp(anf_to_term(t)) + "\n"
    return pp(t) + "\n"


def anf_to_term(t):
    """View an ANF term as a surface term."""
    if isinstance(t, AVar):
        return Var(t.name)
    b = t.bound
    body = anf_to_term(t.body)
    if isinstance(b, BLam) and b.rec:
        return LetRec(t.name, b.param, anf_to_term(b.body), body)
    return Let(t.name, _bound_to_term(b), body)


def _bound_to_term(b):
    if isinstance(b, BVar):
        return Var(b.name)
    if isinstance(b, BConst):
        return Const(b.value)
    if isinstance(b, BLam):
        return Lam(b.param, anf_to_term(b.body))
    if isinstance(b, BApp):
        return App(Var(b.fn), Var(b.arg))
    if isinstance(b, BIf):
        return If(Var(b.cond), anf_to_term(b.then), anf_to_term(b.els))
    if isinstance(b, BMatch):
        return Match(Var(b.scrutinee), b.pattern, anf_to_term(b.then), anf_to_term(b.els))
    if isinstance(b, BAssume):
        return Assume(Var(b.arg))
    if isinstance(b, BWeight):
        return Weight(Var(b.arg))
    if isinstance(b, BRecord):
        return Record(tuple((k, Var(n)) for k, n in b.items))
    if isinstance(b, BVariant):
        return Variant(b.tag, Var(b.arg))
    if isinstance(b, BSeq):
        return Seq(tuple(Var(n) for n in b.items))
    raise TypeError(f"not an ANF bound: {b!r}")


__all__ = ["pretty", "pp", "pp_pattern", "anf_to_term", "show_const", "intrinsics"]
