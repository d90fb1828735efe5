"""Name uniquification, let-rec checking, and the A-normal form transform."""

from .syntax import (ALet, AVar, App, Assume, BApp, BAssume, BConst, BIf, BLam,
                     BMatch, BRecord, BSeq, BVar, BVariant, BWeight, Const, If,
                     Lam, Let, LetRec, Match, NOPOS, Record, RecordPat, Seq,
                     SeqConsPat, Var, VarPat, Variant, VariantPat, Weight)


class ScopeError(Exception):
    def __init__(self, msg, pos=NOPOS):
        super().__init__(f"{pos}: {msg}" if pos != NOPOS else msg)
        self.pos = pos


def _surface_names(t, out):
    """Every identifier occurring in `t` (binders and references)."""
    stack = [t]
    while stack:
        t = stack.pop()
        if isinstance(t, Var):
            out.add(t.name)
        elif isinstance(t, Lam):
            out.add(t.param)
            stack.append(t.body)
        elif isinstance(t, App):
            stack += [t.fn, t.arg]
        elif isinstance(t, Let):
            out.add(t.name)
            stack += [t.bound, t.body]
        elif isinstance(t, LetRec):
            out.add(t.name)
            if t.param is not None:
                out.add(t.param)
            stack += [t.lam_body, t.body]
        elif isinstance(t, If):
            stack += [t.cond, t.then, t.els]
        elif isinstance(t, (Assume, Weight)):
            stack.append(t.arg)
        elif isinstance(t, Match):
            from .syntax import pattern_vars
            out.update(pattern_vars(t.pattern))
            stack += [t.scrutinee, t.then, t.els]
        elif isinstance(t, Record):
            stack += [v for _, v in t.items]
        elif isinstance(t, Variant):
            stack.append(t.arg)
        elif isinstance(t, Seq):
            stack += list(t.items)
    return out


class _Renamer:
    def __init__(self, taken):
        self.taken = set(taken)
        self.used = set()

    def fresh(self, name):
        if name not in self.used:
            self.used.add(name)
            return name
        k = 1
        while f"{name}_{k}" in self.taken or f"{name}_{k}" in self.used:
            k += 1
        new = f"{name}_{k}"
        self.used.add(new)
        return new


def uniquify(t):
    """Rename binders so that no two binders share a name.

    The first binder of a name keeps it; later ones get a ``_k`` suffix.
    Raises :class:`ScopeError` on a reference to an unbound variable.
    """
    ren = _Renamer(_surface_names(t, set()))

    def pat(p, env):
        if isinstance(p, VarPat):
            new = ren.fresh(p.name)
            env[p.name] = new
            return VarPat(new)
        if isinstance(p, RecordPat):
            return RecordPat(tuple((k, pat(q, env)) for k, q in p.items))
        if isinstance(p, VariantPat):
            return VariantPat(p.tag, pat(p.arg, env))
        if isinstance(p, SeqConsPat):
            return SeqConsPat(pat(p.head, env), pat(p.tail, env))
        return p

    def go(t, env):
        if isinstance(t, Var):
            if t.name not in env:
                raise ScopeError(f"unbound variable '{t.name}'", t.pos)
            return Var(env[t.name], t.pos)
        if isinstance(t, Const):
            return t
        if isinstance(t, Lam):
            new = ren.fresh(t.param)
            return Lam(new, go(t.body, {**env, t.param: new}), t.pos)
        if isinstance(t, App):
            return App(go(t.fn, env), go(t.arg, env), t.pos)
        if isinstance(t, Let):
            bound = go(t.bound, env)
            new = ren.fresh(t.name)
            return Let(new, bound, go(t.body, {**env, t.name: new}), t.pos)
        if isinstance(t, LetRec):
            new = ren.fresh(t.name)
            inner = {**env, t.name: new}
            if t.param is None:
                lb = go(t.lam_body, inner)
                return LetRec(new, None, lb, go(t.body, inner), t.pos, t.self_ref)
            p = ren.fresh(t.param)
            lb = go(t.lam_body, {**inner, t.param: p})
            return LetRec(new, p, lb, go(t.body, inner), t.pos, t.self_ref)
        if isinstance(t, If):
            return If(go(t.cond, env), go(t.then, env), go(t.els, env), t.pos)
        if isinstance(t, Assume):
            return Assume(go(t.arg, env), t.pos)
        if isinstance(t, Weight):
            return Weight(go(t.arg, env), t.pos)
        if isinstance(t, Match):
            s = go(t.scrutinee, env)
            inner = dict(env)
            p = pat(t.pattern, inner)
            return Match(s, p, go(t.then, inner), go(t.els, env), t.pos)
        if isinstance(t, Record):
            return Record(tuple((k, go(v, env)) for k, v in t.items), t.pos)
        if isinstance(t, Variant):
            return Variant(t.tag, go(t.arg, env), t.pos)
        if isinstance(t, Seq):
            return Seq(tuple(go(v, env) for v in t.items), t.pos)
        raise TypeError(f"not a term: {t!r}")

    return go(t, {})


def _free_in(t, name):
    return name in _surface_names(t, set())


def letrec_desugar(t):
    """Check every ``let rec`` binds a lambda and mark self-reference."""
    def go(t):
        if isinstance(t, LetRec):
            if t.param is None:
                raise ScopeError(f"let rec '{t.name}' must bind a lambda", t.pos)
            lb = go(t.lam_body)
            return LetRec(t.name, t.param, lb, go(t.body), t.pos,
                          self_ref=_free_in(lb, t.name))
        if isinstance(t, (Var, Const)):
            return t
        if isinstance(t, Lam):
            return Lam(t.param, go(t.body), t.pos)
        if isinstance(t, App):
            return App(go(t.fn), go(t.arg), t.pos)
        if isinstance(t, Let):
            return Let(t.name, go(t.bound), go(t.body), t.pos)
        if isinstance(t, If):
            return If(go(t.cond), go(t.then), go(t.els), t.pos)
        if isinstance(t, Assume):
            return Assume(go(t.arg), t.pos)
        if isinstance(t, Weight):
            return Weight(go(t.arg), t.pos)
        if isinstance(t, Match):
            return Match(go(t.scrutinee), t.pattern, go(t.then), go(t.els), t.pos)
        if isinstance(t, Record):
            return Record(tuple((k, go(v)) for k, v in t.items), t.pos)
        if isinstance(t, Variant):
            return Variant(t.tag, go(t.arg), t.pos)
        if isinstance(t, Seq):
            return Seq(tuple(go(v) for v in t.items), t.pos)
        raise TypeError(f"not a term: {t!r}")

    return go(t)


def to_anf(t, prefix="t"):
    """Transform a uniquified term to A-normal form.

    User binder names are kept; intermediate results get fresh names
    ``<prefix><k>`` that do not clash with any name in the program. Branches
    of ``if`` and ``match`` stay nested.
    """
    taken = _surface_names(t, set())
    counter = [0]

    def fresh():
        while True:
            counter[0] += 1
            n = f"{prefix}{counter[0]}"
            if n not in taken:
                taken.add(n)
                return n

    def top(t):
        return norm(t, _ret)

    def _ret(b):
        if isinstance(b, BVar):
            return AVar(b.name)
        n = fresh()
        return ALet(n, b, AVar(n))

    def name_of(t, k):
        if isinstance(t, Var):
            return k(t.name)

        def bind(b):
            n = fresh()
            return ALet(n, b, k(n))
        return norm(t, bind)

    def names_of(ts, k, acc=()):
        if not ts:
            return k(acc)
        return name_of(ts[0], lambda n: names_of(ts[1:], k, acc + (n,)))

    def norm(t, k):
        if isinstance(t, Var):
            return k(BVar(t.name))
        if isinstance(t, Const):
            return k(BConst(t.value))
        if isinstance(t, Lam):
            return k(BLam(t.param, top(t.body)))
        if isinstance(t, App):
            return name_of(t.fn, lambda f: name_of(t.arg, lambda a: k(BApp(f, a))))
        if isinstance(t, Let):
            return norm(t.bound, lambda b: ALet(t.name, b, norm(t.body, k)))
        if isinstance(t, LetRec):
            if t.param is None:
                raise ScopeError(f"let rec '{t.name}' must bind a lambda", t.pos)
            return ALet(t.name, BLam(t.param, top(t.lam_body), rec=True), norm(t.body, k))
        if isinstance(t, If):
            return name_of(t.cond, lambda c: k(BIf(c, top(t.then), top(t.els))))
        if isinstance(t, Match):
            return name_of(t.scrutinee,
                           lambda s: k(BMatch(s, t.pattern, top(t.then), top(t.els))))
        if isinstance(t, Assume):
            return name_of(t.arg, lambda a: k(BAssume(a)))
        if isinstance(t, Weight):
            return name_of(t.arg, lambda a: k(BWeight(a)))
        if isinstance(t, Record):
            keys = [kk for kk, _ in t.items]
            return names_of([v for _, v in t.items],
                            lambda ns: k(BRecord(tuple(zip(keys, ns)))))
        if isinstance(t, Variant):
            return name_of(t.arg, lambda a: k(BVariant(t.tag, a)))
        if isinstance(t, Seq):
            return names_of(list(t.items), lambda ns: k(BSeq(ns)))
        raise TypeError(f"not a term: {t!r}")

    return top(t)


def compile_source(src):
    """parse -> uniquify -> let-rec check -> ANF."""
    from .parser import parse
    return to_anf(letrec_desugar(uniquify(parse(src))))
