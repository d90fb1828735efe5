"""Aligned and unaligned sequential Monte Carlo."""

import time
from concurrent.futures import ThreadPoolExecutor

from ..analysis import analyze_align
from ..machine import SUSPENDED, TERMINATED, Machine, program
from ..rng import Stream, family
from .common import (InferenceError, InferenceOutput, InvariantViolation,
                     log_mean_exp, resample, weight_binders)

_RESAMPLE = -1
_PARTICLES = 0x534D43


def _advance(particles, suspend, threads):
    def step(m):
        if m.status != TERMINATED:
            m.log_w = 0.0
            m.run(suspend)
        else:
            m.log_w = 0.0

    if threads > 1:
        with ThreadPoolExecutor(threads) as ex:
            chunk = (len(particles) + threads - 1) // threads
            parts = [particles[i:i + chunk] for i in range(0, len(particles), chunk)]
            list(ex.map(lambda ps: [step(m) for m in ps], parts))
    else:
        for m in particles:
            step(m)


def run_smc(t, n, seed=0, aligned=True, threads=1, analysis=None):
    """SMC over ANF program `t` with `n` particles.

    Aligned SMC resamples only at weights the analysis marks aligned; the
    unaligned variant resamples at every weight, giving terminated particles
    weight one.
    """
    if n < 2:
        raise ValueError("SMC needs at least 2 particles")
    t0 = time.perf_counter()
    prog = program(t)
    weights = weight_binders(prog.anf)
    if aligned:
        res = analysis if analysis is not None else analyze_align(prog.anf)
        suspend = frozenset(w for w in weights if w in res.aligned)
    else:
        suspend = frozenset(weights)
    streams = family(seed, _PARTICLES, 0)
    particles = [Machine(prog, rng=streams(i)) for i in range(n)]
    log_z = 0.0
    gen = 0
    while True:
        _advance(particles, suspend, threads)
        lw = [m.log_w for m in particles]
        n_term = sum(1 for m in particles if m.status == TERMINATED)
        if aligned and 0 < n_term < n:
            raise InvariantViolation(
                f"generation {gen}: {n_term} of {n} particles terminated, the rest suspended")
        if aligned and n_term == 0:
            at = {m.at for m in particles}
            if len(at) > 1:
                raise InvariantViolation(
                    f"generation {gen}: particles suspended at different weights {sorted(at)}")
        g = log_mean_exp(lw)
        if g == float("-inf"):
            raise InferenceError(
                f"degenerate population at generation {gen}: every particle has zero weight")
        log_z += g
        if n_term == n:
            break
        idx = resample(lw, Stream.from_path(seed, _RESAMPLE, gen))
        seen = set()
        new = []
        for i in idx:
            i = int(i)
            if i in seen:
                new.append(particles[i].clone())
            else:
                seen.add(i)
                new.append(particles[i])
        gen += 1
        streams = family(seed, _PARTICLES, gen)
        for k, m in enumerate(new):
            m.rng = streams(k)
        particles = new
    out = InferenceOutput(
        method="smc-aligned" if aligned else "smc-unaligned", seed=seed,
        samples=[m.value for m in particles], log_weights=lw, log_z=log_z,
        particles=n, generations=gen + 1,
    )
    out.wall_ms = (time.perf_counter() - t0) * 1e3
    return out


def run_aligned_smc(t, n, seed=0, threads=1, analysis=None):
    return run_smc(t, n, seed, aligned=True, threads=threads, analysis=analysis)


def run_unaligned_smc(t, n, seed=0, threads=1):
    return run_smc(t, n, seed, aligned=False, threads=threads)
