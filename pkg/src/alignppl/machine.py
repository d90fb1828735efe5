"""A defunctionalized step machine over ANF programs.

ANF terms are compiled once into flat instruction tuples. The machine keeps
its continuation as an explicit linked stack of frames, so a suspended
machine is plain data: it can be cloned (for resampling) and resumed.

Instruction layouts (first field is the opcode)::

    (VAR, x, y)                       let x = y
    (CONST, x, c)                     let x = c
    (LAM, x, param, instrs, ret, freevars, rec)
    (APP, x, f, a, tail)              let x = f a
    (PRIM, x, fn, args)               saturated intrinsic call (fast mode)
    (IF, x, c, then_blk, else_blk, tail)
    (MATCH, x, s, matcher, then_blk, else_blk, tail)
    (ASSUME, x, d)
    (WEIGHT, x, w)
    (RECORD, x, ((key, name), ...))
    (VARIANT, x, tag, a)
    (SEQ, x, (name, ...))
    (BASIC, x, fn)                    a run of pure instructions (fast mode)

A block is ``(instrs, ret)``. Frames are tuples
``(instrs, pc, env, ret, binder, path, parent)``.
"""

import math

from . import dists
from .intrinsics import Prim
from .syntax import (ALet, AVar, BApp, BAssume, BConst, BIf, BLam, BMatch,
                     BRecord, BSeq, BVar, BVariant, BWeight, BoolPat,
                     RecordPat, SeqConsPat, SeqEmptyPat, VarPat, VariantPat,
                     Wildcard)
from .values import Closure, EvalError, RecordV, VariantV, show

VAR, CONST, LAM, APP, PRIM, IF, MATCH, ASSUME, WEIGHT, RECORD, VARIANT, SEQ, BASIC = range(13)
_PURE = (VAR, CONST, LAM, PRIM, RECORD, VARIANT, SEQ)

RUNNING, SUSPENDED, TERMINATED = "running", "suspended", "terminated"

NEG_INF = float("-inf")
_Dist = dists.Dist
_log = math.log


# ---------------------------------------------------------------- compile

def _free_vars(t, memo):
    """Free names of an ANF term (names are unique, so a set difference works)."""
    key = id(t)
    if key in memo:
        return memo[key][1]
    used, bound = set(), set()
    stack = [t]
    while stack:
        t = stack.pop()
        if isinstance(t, AVar):
            used.add(t.name)
            continue
        bound.add(t.name)
        b = t.bound
        stack.append(t.body)
        if isinstance(b, BVar):
            used.add(b.name)
        elif isinstance(b, BLam):
            bound.add(b.param)
            stack.append(b.body)
        elif isinstance(b, BApp):
            used.add(b.fn)
            used.add(b.arg)
        elif isinstance(b, BIf):
            used.add(b.cond)
            stack += [b.then, b.els]
        elif isinstance(b, BMatch):
            from .syntax import pattern_vars
            used.add(b.scrutinee)
            bound.update(pattern_vars(b.pattern))
            stack += [b.then, b.els]
        elif isinstance(b, (BAssume, BWeight, BVariant)):
            used.add(b.arg)
        elif isinstance(b, BRecord):
            used.update(n for _, n in b.items)
        elif isinstance(b, BSeq):
            used.update(b.items)
    fv = frozenset(used - bound)
    memo[key] = (t, fv)
    return fv


def _uses(t):
    """Reference counts of names, and counts of uses in function position."""
    uses, fn_uses = {}, {}

    def use(n):
        uses[n] = uses.get(n, 0) + 1

    stack = [t]
    while stack:
        t = stack.pop()
        if isinstance(t, AVar):
            use(t.name)
            continue
        b = t.bound
        stack.append(t.body)
        if isinstance(b, BVar):
            use(b.name)
        elif isinstance(b, BLam):
            stack.append(b.body)
        elif isinstance(b, BApp):
            use(b.fn)
            use(b.arg)
            fn_uses[b.fn] = fn_uses.get(b.fn, 0) + 1
        elif isinstance(b, BIf):
            use(b.cond)
            stack += [b.then, b.els]
        elif isinstance(b, BMatch):
            use(b.scrutinee)
            stack += [b.then, b.els]
        elif isinstance(b, (BAssume, BWeight, BVariant)):
            use(b.arg)
        elif isinstance(b, BRecord):
            for _, n in b.items:
                use(n)
        elif isinstance(b, BSeq):
            for n in b.items:
                use(n)
    return uses, fn_uses


def _partial(p, k):
    def build(*args):
        return Prim(p.name, p.arity - k, p.fn, args)
    return build


class _Compiler:
    def __init__(self, anf, fuse):
        self.fv_memo = {}
        self.static = {}
        self.elide = set()
        self.fuse = fuse
        if fuse:
            self.uses = _uses(anf)[0]
            self._plan_fusion(anf)

    def _plan_fusion(self, anf):
        # names statically known to hold an intrinsic, possibly partially applied
        uses, fn_uses = _uses(anf)
        static = self.static
        stack = [anf]
        while stack:
            t = stack.pop()
            if isinstance(t, AVar):
                continue
            b = t.bound
            stack.append(t.body)
            if isinstance(b, BConst) and type(b.value) is Prim and b.value.arity > 0:
                static[t.name] = (b.value, ())
            elif isinstance(b, BApp) and b.fn in static:
                p, args = static[b.fn]
                if len(args) + 1 < p.arity:
                    static[t.name] = (p, args + (b.arg,))
            elif isinstance(b, BLam):
                stack.append(b.body)
            elif isinstance(b, (BIf, BMatch)):
                stack += [b.then, b.els]
        for n in static:
            if uses.get(n, 0) == fn_uses.get(n, 0):
                self.elide.add(n)

    def block(self, t):
        instrs = []
        while isinstance(t, ALet):
            ins = self.instr(t.name, t.bound)
            if ins is not None:
                instrs.append(ins)
            t = t.body
        ret = t.name
        if instrs and instrs[-1][1] == ret and instrs[-1][0] in (APP, IF, MATCH):
            last = instrs[-1]
            instrs[-1] = last[:-1] + (True,)
        if self.fuse:
            instrs = self._group(instrs, ret)
        return tuple(instrs), ret

    def _group(self, instrs, ret):
        out, run = [], []
        for ins in instrs:
            if ins[0] in _PURE:
                run.append(ins)
                continue
            if run:
                out.append(_basic(run, self.uses, ret) if len(run) > 1 else run[0])
                run = []
            out.append(ins)
        if run:
            out.append(_basic(run, self.uses, ret) if len(run) > 1 else run[0])
        return out

    def instr(self, x, b):
        if isinstance(b, BVar):
            return (VAR, x, b.name)
        if isinstance(b, BConst):
            if x in self.elide:
                return None
            return (CONST, x, b.value)
        if isinstance(b, BLam):
            instrs, ret = self.block(b.body)
            fv = _free_vars(b.body, self.fv_memo) - {b.param}
            if b.rec:
                fv = fv - {x}
            # sorted so the compiled form is deterministic
            return (LAM, x, b.param, instrs, ret, tuple(sorted(fv)), b.rec)
        if isinstance(b, BApp):
            if b.fn in self.static:
                p, args = self.static[b.fn]
                args = args + (b.arg,)
                if len(args) == p.arity:
                    return (PRIM, x, p.fn, args)
                if x in self.elide:
                    return None
                return (PRIM, x, _partial(p, len(args)), args)
            return (APP, x, b.fn, b.arg, False)
        if isinstance(b, BIf):
            return (IF, x, b.cond, self.block(b.then), self.block(b.els), False)
        if isinstance(b, BMatch):
            return (MATCH, x, b.scrutinee, compile_pattern(b.pattern), self.block(b.then),
                    self.block(b.els), False)
        if isinstance(b, BAssume):
            return (ASSUME, x, b.arg)
        if isinstance(b, BWeight):
            return (WEIGHT, x, b.arg)
        if isinstance(b, BRecord):
            return (RECORD, x, b.items)
        if isinstance(b, BVariant):
            return (VARIANT, x, b.tag, b.arg)
        if isinstance(b, BSeq):
            return (SEQ, x, b.items)
        raise TypeError(f"not an ANF bound: {b!r}")


def _run_uses(run):
    counts = {}

    def use(n):
        counts[n] = counts.get(n, 0) + 1

    for ins in run:
        op = ins[0]
        if op == VAR:
            use(ins[2])
        elif op == PRIM:
            for a in ins[3]:
                use(a)
        elif op == RECORD:
            for _, a in ins[2]:
                use(a)
        elif op == VARIANT:
            use(ins[3])
        elif op == SEQ:
            for a in ins[2]:
                use(a)
        elif op == LAM:
            # a capture stands for any number of uses inside the body
            for f in ins[5]:
                counts[f] = counts.get(f, 0) + 10 ** 9
    return counts


def _basic(run, uses, ret):
    """Generate one Python function executing a run of pure instructions."""
    ns = {"Closure": Closure, "RecordV": RecordV, "VariantV": VariantV}
    local = {}
    lines = []
    inner = _run_uses(run)

    def load(n):
        v = local.get(n)
        if v is None:
            v = local[n] = f"v{len(local)}"
            lines.append(f"    {v} = env[{n!r}]")
        return v

    def bind(n, k):
        v = local[n] = f"v{len(local)}"
        return v

    for k, ins in enumerate(run):
        op, x = ins[0], ins[1]
        if op == CONST:
            ns[f"c{k}"] = ins[2]
            rhs = f"c{k}"
        elif op == VAR:
            rhs = load(ins[2])
        elif op == PRIM:
            ns[f"f{k}"] = ins[2]
            rhs = f"f{k}(" + ", ".join(load(a) for a in ins[3]) + ")"
        elif op == RECORD:
            rhs = "RecordV({" + ", ".join(f"{key!r}: {load(a)}" for key, a in ins[2]) + "})"
        elif op == VARIANT:
            rhs = f"VariantV({ins[2]!r}, {load(ins[3])})"
        elif op == SEQ:
            rhs = "(" + "".join(f"{load(a)}, " for a in ins[2]) + ")"
        else:
            ns[f"b{k}"] = ins[3]
            cap = "{" + ", ".join(f"{f!r}: {load(f)}" for f in ins[5]) + "}"
            if ins[6]:
                lines.append(f"    e{k} = {cap}")
                cap = f"e{k}"
            rhs = f"Closure({ins[2]!r}, b{k}, {ins[4]!r}, {cap}, {x!r})"
        v = bind(x, k)
        lines.append(f"    {v} = {rhs}")
        if op == LAM and ins[6]:
            lines.append(f"    e{k}[{x!r}] = {v}")
        if x == ret or uses.get(x, 0) != inner.get(x, 0):
            lines.append(f"    env[{x!r}] = {v}")
    src = "def _basic(env):\n" + "\n".join(lines) + "\n"
    exec(compile(src, f"<basic {run[0][1]}>", "exec"), ns)
    return (BASIC, run[0][1], ns["_basic"])


class Program:
    """A compiled ANF program.

    ``exact`` keeps one instruction per let binding (needed to record
    let-sequences); ``fast`` fuses saturated intrinsic applications.
    """

    def __init__(self, anf):
        self.anf = anf
        self._exact = None
        self._fast = None

    @property
    def exact(self):
        if self._exact is None:
            self._exact = _Compiler(self.anf, fuse=False).block(self.anf)
        return self._exact

    @property
    def fast(self):
        if self._fast is None:
            self._fast = _Compiler(self.anf, fuse=True).block(self.anf)
        return self._fast


_CACHE = {}


def program(t):
    """The compiled :class:`Program` for an ANF term (memoized by identity)."""
    if isinstance(t, Program):
        return t
    hit = _CACHE.get(id(t))
    if hit is not None and hit.anf is t:
        return hit
    if len(_CACHE) > 256:
        _CACHE.clear()
    p = _CACHE[id(t)] = Program(t)
    return p


# ---------------------------------------------------------------- patterns

def match_pattern(p, v, out):
    """Match value `v` against pattern `p`, adding bindings to `out`."""
    if isinstance(p, VarPat):
        out[p.name] = v
        return True
    if isinstance(p, Wildcard):
        return True
    if isinstance(p, BoolPat):
        return v is p.value
    if isinstance(p, RecordPat):
        if type(v) is not RecordV:
            return False
        f = v.fields
        for k, q in p.items:
            if k not in f or not match_pattern(q, f[k], out):
                return False
        return True
    if isinstance(p, VariantPat):
        return (type(v) is VariantV and v.tag == p.tag
                and match_pattern(p.arg, v.value, out))
    if isinstance(p, SeqConsPat):
        return (type(v) is tuple and len(v) > 0 and match_pattern(p.head, v[0], out)
                and match_pattern(p.tail, v[1:], out))
    if isinstance(p, SeqEmptyPat):
        return type(v) is tuple and len(v) == 0
    raise TypeError(f"not a pattern: {p!r}")


def compile_pattern(p):
    """A function ``(value, out) -> bool`` equivalent to :func:`match_pattern`."""
    if isinstance(p, VarPat):
        name = p.name

        def m(v, out):
            out[name] = v
            return True
        return m
    if isinstance(p, Wildcard):
        return lambda v, out: True
    if isinstance(p, BoolPat):
        b = p.value
        return lambda v, out: v is b
    if isinstance(p, SeqEmptyPat):
        return lambda v, out: type(v) is tuple and not v
    if isinstance(p, SeqConsPat):
        if isinstance(p.head, VarPat) and isinstance(p.tail, VarPat):
            h, t = p.head.name, p.tail.name

            def m(v, out):
                if type(v) is tuple and v:
                    out[h] = v[0]
                    out[t] = v[1:]
                    return True
                return False
            return m
        mh, mt = compile_pattern(p.head), compile_pattern(p.tail)
        return lambda v, out: (type(v) is tuple and len(v) > 0 and mh(v[0], out)
                               and mt(v[1:], out))
    if isinstance(p, VariantPat):
        tag, ma = p.tag, compile_pattern(p.arg)
        return lambda v, out: type(v) is VariantV and v.tag == tag and ma(v.value, out)
    if isinstance(p, RecordPat):
        items = [(k, compile_pattern(q)) for k, q in p.items]

        def m(v, out):
            if type(v) is not RecordV:
                return False
            f = v.fields
            for k, mq in items:
                if k not in f or not mq(f[k], out):
                    return False
            return True
        return m
    raise TypeError(f"not a pattern: {p!r}")


# ---------------------------------------------------------------- machine

class Machine:
    """One suspendable program instance.

    ``on_assume(machine, name, dist)`` supplies the value of each draw; when
    it is None the machine samples from ``rng``. ``letseq`` is a list when
    let-sequences are recorded (exact mode only) and None otherwise.
    ``log_w`` holds the weight accumulated since it was last reset;
    ``log_lik`` the total over the run.
    """

    __slots__ = ("instrs", "pc", "env", "ret", "frames", "path", "rng",
                 "on_assume", "letseq", "track_paths", "log_w", "log_lik",
                 "status", "value", "at", "data")

    def __init__(self, prog, rng=None, on_assume=None, record=False,
                 track_paths=False, data=None):
        prog = program(prog)
        self.instrs, self.ret = prog.exact if record else prog.fast
        self.pc = 0
        self.env = {}
        self.frames = None
        self.path = None
        self.rng = rng
        self.on_assume = on_assume
        self.letseq = [] if record else None
        self.track_paths = track_paths
        self.log_w = 0.0
        self.log_lik = 0.0
        self.status = RUNNING
        self.value = None
        self.at = None
        self.data = data

    def clone(self):
        m = Machine.__new__(Machine)
        memo = {}

        def cp(env):
            r = memo.get(id(env))
            if r is None:
                r = memo[id(env)] = env.copy()
            return r

        m.instrs = self.instrs
        m.pc = self.pc
        m.env = cp(self.env)
        m.ret = self.ret
        chain = []
        f = self.frames
        while f is not None:
            chain.append(f)
            f = f[6]
        frames = None
        for f in reversed(chain):
            frames = (f[0], f[1], cp(f[2]), f[3], f[4], f[5], frames)
        m.frames = frames
        m.path = self.path
        m.rng = self.rng.copy() if self.rng is not None else None
        m.on_assume = self.on_assume
        m.letseq = list(self.letseq) if self.letseq is not None else None
        m.track_paths = self.track_paths
        m.log_w = self.log_w
        m.log_lik = self.log_lik
        m.status = self.status
        m.value = self.value
        m.at = self.at
        m.data = self.data.copy() if hasattr(self.data, "copy") else self.data
        return m

    def run(self, suspend=frozenset()):
        """Run until a weight whose binder is in `suspend`, or termination."""
        if self.status == TERMINATED:
            return self
        self.status = RUNNING
        instrs, pc, env, ret = self.instrs, self.pc, self.env, self.ret
        frames, path = self.frames, self.path
        seq = self.letseq
        tco = seq is None
        track = self.track_paths
        hook = self.on_assume
        rng = self.rng
        lw = 0.0
        ins = None
        n = len(instrs)
        try:
            while True:
                if pc == n:
                    v = env[ret]
                    if frames is None:
                        self.status = TERMINATED
                        self.log_w += lw
                        self.log_lik += lw
                        lw = 0.0
                        self.value = v
                        self.at = None
                        self.frames = None
                        self.env = env
                        self.instrs, self.pc, self.ret = instrs, pc, ret
                        return self
                    instrs, pc, env, ret, x, path, frames = frames
                    n = len(instrs)
                    env[x] = v
                    if seq is not None:
                        seq.append(x)
                    continue
                ins = instrs[pc]
                pc += 1
                op = ins[0]
                if op == BASIC:
                    ins[2](env)
                    continue
                if op == PRIM:
                    args = ins[3]
                    if len(args) == 2:
                        env[ins[1]] = ins[2](env[args[0]], env[args[1]])
                    else:
                        env[ins[1]] = ins[2](*[env[a] for a in args])
                    continue
                if op == APP:
                    fv = env[ins[2]]
                    a = env[ins[3]]
                    cls = fv.__class__
                    if cls is Closure:
                        new = fv.env.copy()
                        new[fv.param] = a
                        if not (ins[4] and tco):
                            frames = (instrs, pc, env, ret, ins[1], path, frames)
                        if track:
                            path = (ins[1], path)
                        instrs, ret, env, pc = fv.binds, fv.ret, new, 0
                        n = len(instrs)
                        continue
                    if cls is Prim:
                        if a.__class__ is Closure:
                            raise EvalError(
                                f"{fv.name}: intrinsics cannot take functions as arguments")
                        if fv.arity == 1:
                            v = fv.fn(*fv.args, a)
                        else:
                            v = Prim(fv.name, fv.arity - 1, fv.fn, fv.args + (a,))
                    else:
                        raise EvalError(f"cannot apply {show(fv)}: arity 0")
                    env[ins[1]] = v
                    if seq is not None:
                        seq.append(ins[1])
                    continue
                if op == CONST:
                    env[ins[1]] = ins[2]
                elif op == VAR:
                    env[ins[1]] = env[ins[2]]
                elif op == IF:
                    c = env[ins[2]]
                    if c is True:
                        blk = ins[3]
                    elif c is False:
                        blk = ins[4]
                    else:
                        raise EvalError(f"if: condition is not a boolean: {show(c)}")
                    if not (ins[5] and tco):
                        frames = (instrs, pc, env, ret, ins[1], path, frames)
                    instrs, ret = blk
                    pc = 0
                    n = len(instrs)
                    continue
                elif op == WEIGHT:
                    w = env[ins[2]]
                    if w.__class__ is not float:
                        if w.__class__ is not int:
                            raise EvalError(f"weight: expected a number, got {show(w)}")
                        w = float(w)
                    if w > 0.0:
                        w = _log(w)
                    elif w == 0.0:
                        w = NEG_INF
                    else:
                        raise EvalError(f"weight: negative weight {w}")
                    lw += w
                    x = ins[1]
                    env[x] = None
                    if seq is not None:
                        seq.append(x)
                    if x in suspend:
                        self.status = SUSPENDED
                        self.at = x
                        self.instrs, self.pc, self.env, self.ret = instrs, pc, env, ret
                        self.frames, self.path = frames, path
                        self.log_w += lw
                        self.log_lik += lw
                        lw = 0.0
                        return self
                    continue
                elif op == ASSUME:
                    d = env[ins[2]]
                    if not isinstance(d, _Dist):
                        raise EvalError(f"assume: expected a distribution, got {show(d)}")
                    if hook is None:
                        v = d.sample(rng)
                    else:
                        self.path = path
                        self.log_w += lw
                        self.log_lik += lw
                        lw = 0.0
                        v = hook(self, ins[1], d)
                    env[ins[1]] = v
                elif op == LAM:
                    fvs = ins[5]
                    cenv = {f: env[f] for f in fvs}
                    clo = Closure(ins[2], ins[3], ins[4], cenv, ins[1])
                    if ins[6]:
                        cenv[ins[1]] = clo
                    env[ins[1]] = clo
                elif op == MATCH:
                    binds = {}
                    if ins[3](env[ins[2]], binds):
                        env.update(binds)
                        blk = ins[4]
                    else:
                        blk = ins[5]
                    if not (ins[6] and tco):
                        frames = (instrs, pc, env, ret, ins[1], path, frames)
                    instrs, ret = blk
                    pc = 0
                    n = len(instrs)
                    continue
                elif op == RECORD:
                    env[ins[1]] = RecordV({k: env[a] for k, a in ins[2]})
                elif op == VARIANT:
                    env[ins[1]] = VariantV(ins[2], env[ins[3]])
                elif op == SEQ:
                    env[ins[1]] = tuple(env[a] for a in ins[2])
                else:
                    raise AssertionError(f"bad opcode {op}")
                if seq is not None:
                    seq.append(ins[1])
        except EvalError as e:
            if e.name is None and ins is not None:
                raise EvalError(str(e), ins[1]) from None
            raise
        except (ArithmeticError, TypeError, ValueError) as e:
            raise EvalError(f"{type(e).__name__}: {e}",
                            ins[1] if ins is not None else None) from None
        finally:
            if self.status == RUNNING:
                self.log_w += lw
                self.log_lik += lw

    def take_weight(self):
        """Return and reset the weight accumulated since the last call."""
        w = self.log_w
        self.log_w = 0.0
        return w
