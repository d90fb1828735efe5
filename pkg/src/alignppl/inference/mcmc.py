"""Aligned lightweight MCMC and standard (stack-trace addressed) lightweight MCMC.

Both chains consume one random stream in the same order each step: the
proposal index, the global-step coin, the fresh draws made while running the
program, then the acceptance uniform. On a program whose draws are all
aligned the two chains therefore make identical decisions.
"""

import math
import time

from ..analysis import analyze_align
from ..machine import Machine, program
from ..rng import Stream
from ..values import EvalError
from .common import InferenceError, InferenceOutput, InvariantViolation, assume_binders

NEG_INF = float("-inf")


class _Reject(Exception):
    """A reused draw has zero density under its new distribution."""


def _density(d, x):
    try:
        return d.log_density(x)
    except EvalError:
        return NEG_INF


class _AlignedRun:
    """Hook for one run of aligned lightweight MCMC."""

    __slots__ = ("aligned", "rng", "j", "glob", "prev_s", "prev_p", "prev_segs",
                 "s", "p", "segs", "reuse", "w_new", "w_old")

    def __init__(self, aligned, rng, j, glob, prev_s, prev_p, prev_segs):
        self.aligned = aligned
        self.rng = rng
        self.j = j
        self.glob = glob
        self.prev_s = prev_s
        self.prev_p = prev_p
        self.prev_segs = prev_segs
        self.s = []
        self.p = []
        self.segs = [[]]
        self.reuse = True
        self.w_new = 0.0
        self.w_old = 0.0

    def __call__(self, m, name, d):
        if name in self.aligned:
            k = len(self.s)
            if k == self.j or self.glob or k >= len(self.prev_s):
                x = d.sample(self.rng)
                lp = d.log_density(x)
            else:
                x = self.prev_s[k]
                lp = _density(d, x)
                if lp == NEG_INF:
                    raise _Reject
                self.w_old += self.prev_p[k]
                self.w_new += lp
            self.s.append(x)
            self.p.append(lp)
            self.segs.append([])
            self.reuse = True
            return x
        k = len(self.s)
        seg = self.segs[k]
        l = len(seg)
        prev = self.prev_segs
        if (not self.reuse or self.glob or k >= len(prev) or l >= len(prev[k])
                or prev[k][l][2] != name):
            x = d.sample(self.rng)
            lp = d.log_density(x)
            self.reuse = False
        else:
            x, plp, _ = prev[k][l]
            lp = _density(d, x)
            if lp == NEG_INF:
                raise _Reject
            self.w_old += plp
            self.w_new += lp
        seg.append((x, lp, name))
        return x


class _TraceRun:
    """Hook for one run of stack-trace addressed lightweight MCMC."""

    __slots__ = ("rng", "target", "glob", "prev", "db", "counts", "w_new", "w_old")

    def __init__(self, rng, target, glob, prev):
        self.rng = rng
        self.target = target
        self.glob = glob
        self.prev = prev
        self.db = {}
        self.counts = {}
        self.w_new = 0.0
        self.w_old = 0.0

    def __call__(self, m, name, d):
        site = (m.path, name)
        c = self.counts.get(site, 0)
        self.counts[site] = c + 1
        addr = (m.path, name, c)
        hit = None if self.glob or addr == self.target else self.prev.get(addr)
        if hit is None:
            x = d.sample(self.rng)
            lp = d.log_density(x)
        else:
            x, plp = hit
            lp = _density(d, x)
            if lp == NEG_INF:
                raise _Reject
            self.w_old += plp
            self.w_new += lp
        self.db[addr] = (x, lp)
        return x


def _accept(log_a, u):
    if log_a != log_a:
        return False
    return log_a >= 0.0 or u < math.exp(log_a)


def _burn(steps, burn):
    return int(math.floor(steps * burn))


def run_aligned_lightweight_mcmc(t, steps, seed=0, g=0.1, burn=0.1, analysis=None):
    """Aligned lightweight MCMC.

    When the program has no aligned draws there is nothing to pick a local
    proposal from, so every step is a global step.
    """
    if not g > 0:
        raise ValueError("global step probability must be > 0")
    t0 = time.perf_counter()
    prog = program(t)
    res = analysis if analysis is not None else analyze_align(prog.anf)
    aligned = frozenset(a for a in assume_binders(prog.anf) if a in res.aligned)
    rng = Stream.from_path(seed, 1)

    hook = _AlignedRun(aligned, rng, -1, True, [], [], [])
    m = Machine(prog, on_assume=hook).run()
    value, w = m.value, m.log_lik
    cur = hook
    values = [value]
    accepts = []
    n_acc = 0
    for _ in range(1, steps):
        size = len(cur.s)
        j = rng.randbelow(size) if size else -1
        glob = rng.random() < g or size == 0
        hook = _AlignedRun(aligned, rng, j, glob, cur.s, cur.p, cur.segs)
        try:
            m = Machine(prog, on_assume=hook).run()
            rejected = False
        except _Reject:
            rejected = True
        u = rng.random()
        if not rejected:
            if not glob and len(hook.s) != size:
                raise InvariantViolation(
                    f"aligned draw count changed from {size} to {len(hook.s)} on a local step")
            if w == NEG_INF:
                ok = True
            else:
                ok = _accept((m.log_lik - w) + (hook.w_new - hook.w_old), u)
        else:
            ok = False
        accepts.append(ok)
        if ok:
            n_acc += 1
            cur, value, w = hook, m.value, m.log_lik
        values.append(value)
    b = _burn(steps, burn)
    out = InferenceOutput(
        method="mcmc-aligned", seed=seed, samples=values[b:], steps=steps,
        acceptance_rate=n_acc / max(1, steps - 1), accepts=accepts)
    out.wall_ms = (time.perf_counter() - t0) * 1e3
    return out


def run_lightweight_mcmc(t, steps, seed=0, g=0.1, burn=0.1):
    """Lightweight MCMC with a database keyed by stack traces."""
    if not g > 0:
        raise ValueError("global step probability must be > 0")
    t0 = time.perf_counter()
    prog = program(t)
    rng = Stream.from_path(seed, 1)

    hook = _TraceRun(rng, None, True, {})
    m = Machine(prog, on_assume=hook, track_paths=True).run()
    value, w = m.value, m.log_lik
    db = hook.db
    keys = None
    values = [value]
    accepts = []
    n_acc = 0
    for _ in range(1, steps):
        size = len(db)
        if size == 0:
            raise InferenceError("lightweight MCMC needs at least one random draw")
        if keys is None:
            keys = list(db)
        target = keys[rng.randbelow(size)]
        glob = rng.random() < g
        hook = _TraceRun(rng, target, glob, db)
        try:
            m = Machine(prog, on_assume=hook, track_paths=True).run()
            rejected = False
        except _Reject:
            rejected = True
        u = rng.random()
        if rejected:
            ok = False
        elif w == NEG_INF:
            ok = True
        elif glob:
            ok = _accept(m.log_lik - w, u)
        else:
            log_a = ((m.log_lik - w) + (hook.w_new - hook.w_old)
                     + math.log(size) - math.log(len(hook.db)))
            ok = _accept(log_a, u)
        accepts.append(ok)
        if ok:
            n_acc += 1
            db, value, w = hook.db, m.value, m.log_lik
            keys = None
        values.append(value)
    b = _burn(steps, burn)
    out = InferenceOutput(
        method="mcmc-lightweight", seed=seed, samples=values[b:], steps=steps,
        acceptance_rate=n_acc / max(1, steps - 1), accepts=accepts)
    out.wall_ms = (time.perf_counter() - t0) * 1e3
    return out


def run_mcmc(t, steps, seed=0, g=0.1, burn=0.1, aligned=True, analysis=None):
    if aligned:
        return run_aligned_lightweight_mcmc(t, steps, seed, g, burn, analysis)
    return run_lightweight_mcmc(t, steps, seed, g, burn)
