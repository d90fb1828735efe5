"""Lexer and recursive-descent parser for the surface language.

See ``docs/lang.md`` for the grammar. Operators desugar to applications of
intrinsics, so ``a + b`` parses to ``App(App(Const(add), a), b)``.
"""

import re

from . import intrinsics
from .syntax import (App, Assume, BoolPat, Const, If, Lam, Let, LetRec, Match,
                     Pos, Record, RecordPat, Seq, SeqConsPat, SeqEmptyPat,
                     Var, VarPat, Variant, VariantPat, Weight, Wildcard,
                     pattern_vars)


class ParseError(Exception):
    def __init__(self, msg, pos):
        super().__init__(f"{pos.line}:{pos.col}: {msg}")
        self.pos = pos
        self.msg = msg


KEYWORDS = {"let", "rec", "in", "lam", "if", "then", "else", "match", "with",
            "assume", "weight", "true", "false"}

_TOKEN = re.compile(r"""
    (?P<ws>[ \t\r]+)
  | (?P<nl>\n)
  | (?P<comment>--[^\n]*)
  | (?P<float>\d+\.\d+(?:[eE][+-]?\d+)?|\d+[eE][+-]?\d+)
  | (?P<int>\d+)
  | (?P<tag>\#[A-Za-z][A-Za-z0-9_']*)
  | (?P<ident>[A-Za-z_][A-Za-z0-9_']*)
  | (?P<op>::|==|!=|<=|>=|&&|\|\||[-+*/<>=(){}\[\],;.\\]|λ)
""", re.VERBOSE)


class Token:
    __slots__ = ("kind", "text", "pos")

    def __init__(self, kind, text, pos):
        self.kind = kind
        self.text = text
        self.pos = pos

    def __repr__(self):
        return f"Token({self.kind}, {self.text!r}, {self.pos})"


def tokenize(src):
    toks = []
    i, line, col = 0, 1, 1
    n = len(src)
    while i < n:
        if src.startswith("(*", i):
            # nested block comment
            depth, start = 0, Pos(line, col)
            while i < n:
                if src.startswith("(*", i):
                    depth += 1
                    i += 2
                    col += 2
                elif src.startswith("*)", i):
                    depth -= 1
                    i += 2
                    col += 2
                    if depth == 0:
                        break
                elif src[i] == "\n":
                    i += 1
                    line += 1
                    col = 1
                else:
                    i += 1
                    col += 1
            if depth:
                raise ParseError("unterminated comment", start)
            continue
        m = _TOKEN.match(src, i)
        if m is None:
            raise ParseError(f"unexpected character {src[i]!r}", Pos(line, col))
        kind = m.lastgroup
        text = m.group()
        if kind == "nl":
            line += 1
            col = 1
        elif kind not in ("ws", "comment"):
            if kind == "ident" and text in KEYWORDS:
                kind = "kw"
            elif kind == "op" and text in ("λ", "\\"):
                kind, text = "kw", "lam"
            toks.append(Token(kind, text, Pos(line, col)))
            col += len(text)
        else:
            col += len(text)
        i = m.end()
    toks.append(Token("eof", "", Pos(line, col)))
    return toks


def _binop(op, a, b, pos):
    return App(App(Const(intrinsics.prim(intrinsics.BINOPS[op]), pos), a, pos), b, pos)


_CMP = ("==", "!=", "<", "<=", ">", ">=")


class Parser:
    def __init__(self, src):
        self.toks = tokenize(src)
        self.i = 0

    # -- token helpers -------------------------------------------------

    @property
    def tok(self):
        return self.toks[self.i]

    def peek(self, k=1):
        return self.toks[min(self.i + k, len(self.toks) - 1)]

    def at(self, kind, text=None):
        t = self.tok
        return t.kind == kind and (text is None or t.text == text)

    def at_op(self, text):
        return self.at("op", text)

    def at_kw(self, text):
        return self.at("kw", text)

    def advance(self):
        t = self.tok
        self.i += 1
        return t

    def expect(self, kind, text=None, what=None):
        if not self.at(kind, text):
            t = self.tok
            want = what or repr(text or kind)
            got = "end of input" if t.kind == "eof" else repr(t.text)
            raise ParseError(f"expected {want}, found {got}", t.pos)
        return self.advance()

    def error(self, msg):
        raise ParseError(msg, self.tok.pos)

    def binder(self, what="a name"):
        t = self.tok
        if t.kind == "kw":
            raise ParseError(f"reserved word '{t.text}' cannot be used as {what}", t.pos)
        if t.kind == "ident" and intrinsics.is_intrinsic_name(t.text):
            raise ParseError(f"intrinsic '{t.text}' is reserved and cannot be used as {what}", t.pos)
        if t.kind != "ident":
            got = "end of input" if t.kind == "eof" else repr(t.text)
            raise ParseError(f"expected {what}, found {got}", t.pos)
        self.advance()
        return t.text

    # -- entry ---------------------------------------------------------

    def program(self):
        e = self.expr()
        if not self.at("eof"):
            self.error(f"unexpected {self.tok.text!r} after end of expression")
        return e

    # -- expressions ---------------------------------------------------

    def expr(self):
        t = self.tok
        if t.kind == "kw":
            if t.text == "let":
                return self.let_expr()
            if t.text == "if":
                return self.if_expr()
            if t.text == "match":
                return self.match_expr()
            if t.text == "lam":
                return self.lam_expr()
        return self.seq_expr()

    def seq_expr(self):
        pos = self.tok.pos
        e = self.or_expr()
        if self.at_op(";"):
            self.advance()
            rest = self.expr()
            return Let("_", e, rest, pos)
        return e

    def let_expr(self):
        pos = self.advance().pos
        if self.at_kw("rec"):
            self.advance()
            name = self.binder()
            params = self.params()
            self.expect("op", "=")
            bound = self.expr_bound()
            bound = self.wrap_params(params, bound, pos)
            self.expect("kw", "in", "'in'")
            body = self.expr()
            if isinstance(bound, Lam):
                return LetRec(name, bound.param, bound.body, body, pos)
            return LetRec(name, None, bound, body, pos)
        name = self.binder()
        params = self.params()
        self.expect("op", "=")
        bound = self.expr_bound()
        bound = self.wrap_params(params, bound, pos)
        self.expect("kw", "in", "'in'")
        body = self.expr()
        return Let(name, bound, body, pos)

    def expr_bound(self):
        if self.at_kw("in"):
            self.error("missing bound expression before 'in'")
        return self.expr()

    def params(self):
        ps = []
        while not self.at_op("="):
            ps.append(self.binder("a parameter name"))
        return ps

    @staticmethod
    def wrap_params(params, body, pos):
        for p in reversed(params):
            body = Lam(p, body, pos)
        return body

    def if_expr(self):
        pos = self.advance().pos
        c = self.expr()
        self.expect("kw", "then", "'then'")
        t = self.expr()
        self.expect("kw", "else", "'else'")
        e = self.expr()
        return If(c, t, e, pos)

    def match_expr(self):
        pos = self.advance().pos
        s = self.expr()
        self.expect("kw", "with", "'with'")
        ppos = self.tok.pos
        p = self.pattern()
        names = pattern_vars(p)
        if len(names) != len(set(names)):
            raise ParseError("a variable is bound twice in the same pattern", ppos)
        self.expect("kw", "then", "'then'")
        t = self.expr()
        self.expect("kw", "else", "'else'")
        e = self.expr()
        return Match(s, p, t, e, pos)

    def lam_expr(self):
        pos = self.advance().pos
        ps = [self.binder("a parameter name")]
        while not self.at_op("."):
            ps.append(self.binder("a parameter name"))
        self.advance()
        body = self.expr()
        return self.wrap_params(ps, body, pos)

    def or_expr(self):
        e = self.and_expr()
        while self.at_op("||"):
            t = self.advance()
            e = _binop("||", e, self.and_expr(), t.pos)
        return e

    def and_expr(self):
        e = self.cmp_expr()
        while self.at_op("&&"):
            t = self.advance()
            e = _binop("&&", e, self.cmp_expr(), t.pos)
        return e

    def cmp_expr(self):
        e = self.cons_expr()
        if self.tok.kind == "op" and self.tok.text in _CMP:
            t = self.advance()
            e = _binop(t.text, e, self.cons_expr(), t.pos)
            if self.tok.kind == "op" and self.tok.text in _CMP:
                self.error("comparison operators do not chain; add parentheses")
        return e

    def cons_expr(self):
        e = self.add_expr()
        if self.at_op("::"):
            t = self.advance()
            rest = self.cons_expr()
            cons = Const(intrinsics.prim("cons"), t.pos)
            return App(App(cons, e, t.pos), rest, t.pos)
        return e

    def add_expr(self):
        e = self.mul_expr()
        while self.tok.kind == "op" and self.tok.text in ("+", "-"):
            t = self.advance()
            e = _binop(t.text, e, self.mul_expr(), t.pos)
        return e

    def mul_expr(self):
        e = self.unary()
        while self.tok.kind == "op" and self.tok.text in ("*", "/"):
            t = self.advance()
            e = _binop(t.text, e, self.unary(), t.pos)
        return e

    def unary(self):
        t = self.tok
        if t.kind == "op" and t.text == "-":
            self.advance()
            nxt = self.tok
            if nxt.kind in ("int", "float") and not self._app_follows(1):
                self.advance()
                v = int(nxt.text) if nxt.kind == "int" else float(nxt.text)
                return Const(-v, t.pos)
            return App(Const(intrinsics.prim("neg"), t.pos), self.unary(), t.pos)
        if t.kind == "kw" and t.text in ("assume", "weight"):
            self.advance()
            arg = self.unary()
            return Assume(arg, t.pos) if t.text == "assume" else Weight(arg, t.pos)
        return self.app()

    def _app_follows(self, k):
        t = self.peek(k)
        return self._starts_atom(t)

    @staticmethod
    def _starts_atom(t):
        if t.kind in ("int", "float", "ident", "tag"):
            return True
        if t.kind == "kw":
            return t.text in ("true", "false")
        return t.kind == "op" and t.text in ("(", "{", "[")

    def app(self):
        pos = self.tok.pos
        f = self.atom()
        while self._starts_atom(self.tok):
            for a in self.arg_atoms():
                f = App(f, a, pos)
        return f

    def arg_atoms(self):
        # `f(a, b)` is sugar for `f a b`
        if self.at_op("(") and not self.peek().text == ")":
            save = self.i
            self.advance()
            first = self.expr()
            if self.at_op(","):
                args = [first]
                while self.at_op(","):
                    self.advance()
                    args.append(self.expr())
                self.expect("op", ")")
                return args
            self.i = save
        return [self.atom()]

    def atom(self):
        t = self.tok
        k = t.kind
        if k == "int":
            self.advance()
            return Const(int(t.text), t.pos)
        if k == "float":
            self.advance()
            return Const(float(t.text), t.pos)
        if k == "kw":
            if t.text in ("true", "false"):
                self.advance()
                return Const(t.text == "true", t.pos)
            if t.text in ("let", "if", "match", "lam"):
                return self.expr()
            raise ParseError(f"unexpected reserved word '{t.text}'", t.pos)
        if k == "ident":
            self.advance()
            if intrinsics.is_intrinsic_name(t.text):
                return Const(intrinsics.prim(t.text), t.pos)
            return Var(t.text, t.pos)
        if k == "tag":
            self.advance()
            tag = t.text[1:]
            if self._starts_atom(self.tok):
                return Variant(tag, self.atom(), t.pos)
            return Variant(tag, Const(None, t.pos), t.pos)
        if k == "op":
            if t.text == "(":
                self.advance()
                if self.at_op(")"):
                    self.advance()
                    return Const(None, t.pos)
                e = self.expr()
                if self.at_op(","):
                    self.error("tuples are not supported; use a record or sequence")
                self.expect("op", ")")
                return e
            if t.text == "{":
                return self.record(t.pos)
            if t.text == "[":
                self.advance()
                items = []
                if not self.at_op("]"):
                    items.append(self.expr())
                    while self.at_op(","):
                        self.advance()
                        items.append(self.expr())
                self.expect("op", "]")
                return Seq(tuple(items), t.pos)
        got = "end of input" if k == "eof" else repr(t.text)
        raise ParseError(f"expected an expression, found {got}", t.pos)

    def record(self, pos):
        self.advance()
        items = []
        seen = set()
        if not self.at_op("}"):
            while True:
                kt = self.tok
                key = self.expect("ident", what="a record key").text
                if key in seen:
                    raise ParseError(f"duplicate record key '{key}'", kt.pos)
                seen.add(key)
                self.expect("op", "=")
                items.append((key, self.expr()))
                if not self.at_op(","):
                    break
                self.advance()
        self.expect("op", "}")
        return Record(tuple(items), pos)

    # -- patterns ------------------------------------------------------

    def pattern(self):
        p = self.pat_atom()
        if self.at_op("::"):
            self.advance()
            return SeqConsPat(p, self.pattern())
        return p

    def pat_atom(self):
        t = self.tok
        if t.kind == "ident":
            if t.text == "_":
                self.advance()
                return Wildcard()
            return VarPat(self.binder("a pattern variable"))
        if t.kind == "kw" and t.text in ("true", "false"):
            self.advance()
            return BoolPat(t.text == "true")
        if t.kind == "tag":
            self.advance()
            nxt = self.tok
            if (nxt.kind == "ident" or (nxt.kind == "kw" and nxt.text in ("true", "false"))
                    or (nxt.kind == "op" and nxt.text in ("(", "{", "["))
                    or nxt.kind == "tag"):
                return VariantPat(t.text[1:], self.pat_atom())
            return VariantPat(t.text[1:], Wildcard())
        if t.kind == "op":
            if t.text == "(":
                self.advance()
                if self.at_op(")"):
                    self.error("unit patterns are not supported; use _")
                p = self.pattern()
                self.expect("op", ")")
                return p
            if t.text == "[":
                self.advance()
                items = []
                if not self.at_op("]"):
                    items.append(self.pattern())
                    while self.at_op(","):
                        self.advance()
                        items.append(self.pattern())
                self.expect("op", "]")
                p = SeqEmptyPat()
                for q in reversed(items):
                    p = SeqConsPat(q, p)
                return p
            if t.text == "{":
                self.advance()
                items, seen = [], set()
                if not self.at_op("}"):
                    while True:
                        kt = self.tok
                        key = self.expect("ident", what="a record key").text
                        if key in seen:
                            raise ParseError(f"duplicate record key '{key}'", kt.pos)
                        seen.add(key)
                        self.expect("op", "=")
                        items.append((key, self.pattern()))
                        if not self.at_op(","):
                            break
                        self.advance()
                self.expect("op", "}")
                return RecordPat(tuple(items))
        if t.kind == "kw":
            raise ParseError(f"reserved word '{t.text}' cannot be used as a pattern", t.pos)
        got = "end of input" if t.kind == "eof" else repr(t.text)
        raise ParseError(f"expected a pattern, found {got}", t.pos)


def parse(src: str):
    """Parse program text into a surface :class:`Term`."""
    return Parser(src).program()
