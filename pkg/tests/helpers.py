"""Test-only utilities: a direct evaluator over surface terms and a random
program generator. The evaluator shares intrinsics and distributions with the
package but none of the ANF machinery, so it serves as a reference for the
ANF transform and the machine."""

import math
import random

from alignppl import intrinsics
from alignppl.dists import Dist
from alignppl.machine import match_pattern
from alignppl.syntax import (App, Assume, Const, If, Lam, Let, LetRec, Match, Record,
                             Seq, Var, Variant, Weight)
from alignppl.values import EvalError, RecordV, VariantV


class TClo:
    def __init__(self, param, body, env):
        self.param, self.body, self.env = param, body, env


class TraceOut(Exception):
    pass


class DirectEval:
    """Big-step evaluation of a uniquified, letrec-desugared surface term."""

    def __init__(self, trace):
        self.trace = list(trace)
        self.i = 0
        self.log_lik = 0.0
        self.log_prior = 0.0

    def run(self, t):
        return self.ev(t, {})

    def ev(self, t, env):
        if isinstance(t, Var):
            return env[t.name]
        if isinstance(t, Const):
            return t.value
        if isinstance(t, Lam):
            return TClo(t.param, t.body, env)
        if isinstance(t, App):
            f = self.ev(t.fn, env)
            a = self.ev(t.arg, env)
            return self.apply(f, a)
        if isinstance(t, Let):
            v = self.ev(t.bound, env)
            e2 = dict(env)
            e2[t.name] = v
            return self.ev(t.body, e2)
        if isinstance(t, LetRec):
            e2 = dict(env)
            clo = TClo(t.param, t.lam_body, e2)
            e2[t.name] = clo
            return self.ev(t.body, e2)
        if isinstance(t, If):
            c = self.ev(t.cond, env)
            if c is True:
                return self.ev(t.then, env)
            if c is False:
                return self.ev(t.els, env)
            raise EvalError("if: condition is not a boolean")
        if isinstance(t, Assume):
            d = self.ev(t.arg, env)
            if not isinstance(d, Dist):
                raise EvalError("assume: not a distribution")
            if self.i >= len(self.trace):
                raise TraceOut()
            v = self.trace[self.i]
            self.i += 1
            self.log_prior += d.log_density(v)
            return v
        if isinstance(t, Weight):
            w = self.ev(t.arg, env)
            if type(w) not in (int, float):
                raise EvalError("weight: not a number")
            if w < 0:
                raise EvalError("weight: negative")
            self.log_lik += math.log(w) if w > 0 else -math.inf
            return None
        if isinstance(t, Match):
            v = self.ev(t.scrutinee, env)
            binds = {}
            if match_pattern(t.pattern, v, binds):
                e2 = dict(env)
                e2.update(binds)
                return self.ev(t.then, e2)
            return self.ev(t.els, env)
        if isinstance(t, Record):
            return RecordV({k: self.ev(x, env) for k, x in t.items})
        if isinstance(t, Variant):
            return VariantV(t.tag, self.ev(t.arg, env))
        if isinstance(t, Seq):
            return tuple(self.ev(x, env) for x in t.items)
        raise TypeError(t)

    def apply(self, f, a):
        if isinstance(f, TClo):
            e2 = dict(f.env)
            e2[f.param] = a
            return self.ev(f.body, e2)
        if isinstance(a, TClo):
            raise EvalError("intrinsics cannot take functions")
        return intrinsics.delta(f, a)


def has_function(v):
    if isinstance(v, TClo) or type(v).__name__ in ("Closure", "Prim"):
        return True
    if isinstance(v, tuple):
        return any(has_function(x) for x in v)
    if isinstance(v, RecordV):
        return any(has_function(x) for x in v.fields.values())
    if isinstance(v, VariantV):
        return has_function(v.value)
    return False


# ---------------------------------------------------------------- random programs

class ProgramGen:
    """Random closed programs as source text, mostly well typed."""

    def __init__(self, seed):
        self.r = random.Random(seed)
        self.k = 0

    def fresh(self, base):
        self.k += 1
        return f"{base}{self.k}"

    def pick(self, env, ty):
        xs = [x for x, t in env if t == ty]
        return self.r.choice(xs) if xs else None

    def program(self, depth=4):
        return self.gen("int", [], depth)

    def gen(self, ty, env, d):
        return getattr(self, "g_" + ty)(env, d)

    def g_int(self, env, d):
        r = self.r
        v = self.pick(env, "int")
        if d <= 0:
            return v if v and r.random() < 0.6 else str(r.randint(0, 9))
        c = r.randrange(12)
        if c == 0 and v:
            return v
        if c == 1:
            return str(r.randint(-3, 9))
        if c == 2:
            return f"({self.g_int(env, d - 1)} + {self.g_int(env, d - 1)})"
        if c == 3:
            return f"({self.g_int(env, d - 1)} * {self.g_int(env, d - 1)})"
        if c == 4:
            return (f"(if {self.g_bool(env, d - 1)} then {self.g_int(env, d - 1)} "
                    f"else {self.g_int(env, d - 1)})")
        if c == 5:
            ty = r.choice(["int", "bool", "fn", "seq", "rec"])
            x = self.fresh("x")
            b = self.gen(ty, env, d - 1)
            return f"(let {x} = {b} in {self.g_int(env + [(x, ty)], d - 1)})"
        if c == 6:
            return f"({self.g_fn(env, d - 1)} {self.g_atom_int(env, d - 1)})"
        if c == 7:
            p = r.choice(["0.5", "0.3", "0.9"])
            return f"(if assume (Bernoulli {p}) then {self.g_int(env, d - 1)} else {self.g_int(env, d - 1)})"
        if c == 8:
            w = r.choice(["0.5", "2.0", "1", "3.5"])
            x = self.fresh("w")
            return f"(let {x} = weight {w} in {self.g_int(env, d - 1)})"
        if c == 9:
            h, t = self.fresh("h"), self.fresh("tl")
            return (f"(match {self.g_seq(env, d - 1)} with {h} :: {t} then "
                    f"{self.g_int(env + [(h, 'int'), (t, 'seq')], d - 1)} else {self.g_int(env, d - 1)})")
        if c == 10:
            a, b = self.fresh("a"), self.fresh("b")
            return (f"(match {self.g_rec(env, d - 1)} with {{a = {a}, b = {b}}} then "
                    f"{self.g_int(env + [(a, 'int'), (b, 'bool')], d - 1)} else 0)")
        f, n = self.fresh("f"), self.fresh("n")
        body_env = env + [(n, "int")]
        return (f"(let rec {f} = lam {n}. if {n} <= 0 then {self.g_int(body_env, 0)} "
                f"else {f} ({n} - 1) + {self.g_int(body_env, 0)} in {f} {r.randint(0, 4)})")

    def g_atom_int(self, env, d):
        return f"({self.g_int(env, d)})"

    def g_bool(self, env, d):
        r = self.r
        v = self.pick(env, "bool")
        if d <= 0:
            return v if v and r.random() < 0.5 else r.choice(["true", "false"])
        c = r.randrange(7)
        if c == 0 and v:
            return v
        if c == 1:
            return f"({self.g_int(env, d - 1)} < {self.g_int(env, d - 1)})"
        if c == 2:
            return f"({self.g_int(env, d - 1)} == {self.g_int(env, d - 1)})"
        if c == 3:
            return f"(assume (Bernoulli {r.choice(['0.5', '0.2'])}))"
        if c == 4:
            return f"(not {self.g_bool(env, d - 1)})"
        if c == 5:
            return f"({self.g_bool(env, d - 1)} && {self.g_bool(env, d - 1)})"
        return r.choice(["true", "false"])

    def g_fn(self, env, d):
        v = self.pick(env, "fn")
        if v and self.r.random() < 0.4:
            return v
        x = self.fresh("p")
        return f"(lam {x}. {self.g_int(env + [(x, 'int')], max(d - 1, 0))})"

    def g_seq(self, env, d):
        v = self.pick(env, "seq")
        if v and self.r.random() < 0.4:
            return v
        n = self.r.randint(0, 3)
        return "[" + ", ".join(self.g_int(env, max(d - 2, 0)) for _ in range(n)) + "]"

    def g_rec(self, env, d):
        v = self.pick(env, "rec")
        if v and self.r.random() < 0.4:
            return v
        return f"{{a = {self.g_int(env, max(d - 1, 0))}, b = {self.g_bool(env, max(d - 1, 0))}}}"
