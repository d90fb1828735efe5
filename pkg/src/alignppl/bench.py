"""Repeated timing runs comparing aligned and unaligned inference."""

import math
import statistics
import time
from dataclasses import dataclass

import numpy as np

from .inference import run_mcmc, run_smc
from .machine import program


@dataclass
class BenchSpec:
    term: object
    model: str = "<program>"
    kind: str = "smc"            # "smc" or "mcmc"
    reps: int = 10
    warmup: int = 1
    particles: int = 1000
    steps: int = 10000
    g: float = 0.1
    burn: float = 0.1
    seed: int = 1
    threads: int = 1


def _summary(xs):
    xs = [float(x) for x in xs]
    qs = np.quantile(xs, [0.0, 0.25, 0.5, 0.75, 1.0]) if xs else [math.nan] * 5
    return {"mean": statistics.fmean(xs),
            "std": statistics.stdev(xs) if len(xs) > 1 else 0.0,
            "min": float(qs[0]), "q1": float(qs[1]), "median": float(qs[2]),
            "q3": float(qs[3]), "max": float(qs[4])}


def _once(spec: BenchSpec, aligned: bool, seed: int):
    if spec.kind == "smc":
        return run_smc(spec.term, spec.particles, seed, aligned=aligned, threads=spec.threads)
    return run_mcmc(spec.term, spec.steps, seed, spec.g, spec.burn, aligned=aligned)


def bench(spec: BenchSpec):
    """Run both variants `reps` times each after `warmup` untimed runs.

    Repetition r of either variant uses seed ``spec.seed + r``, so the two
    rows are on matched seeds.
    """
    if spec.kind not in ("smc", "mcmc"):
        raise ValueError(f"unknown benchmark kind {spec.kind!r}")
    if spec.reps < 1:
        raise ValueError("reps must be >= 1")
    program(spec.term)
    rows = []
    for aligned in (True, False):
        for w in range(spec.warmup):
            _once(spec, aligned, spec.seed - 1 - w)
        times, estimates, rates = [], [], []
        method = None
        for r in range(spec.reps):
            t0 = time.perf_counter()
            out = _once(spec, aligned, spec.seed + r)
            times.append((time.perf_counter() - t0) * 1e3)
            method = out.method
            if out.log_z is not None:
                estimates.append(out.log_z)
            if out.acceptance_rate is not None:
                rates.append(out.acceptance_rate)
        row = {"method": method, "reps": spec.reps, "wallMs": _summary(times)}
        if estimates:
            finite = [e for e in estimates if math.isfinite(e)]
            row["logZ"] = _summary(finite) if finite else None
            row["logZValues"] = [e if math.isfinite(e) else str(e) for e in estimates]
        if rates:
            row["acceptanceRate"] = _summary(rates)
        rows.append(row)
    report = {"model": spec.model, "kind": spec.kind, "seed": spec.seed,
              "particles" if spec.kind == "smc" else "steps":
                  spec.particles if spec.kind == "smc" else spec.steps,
              "rows": rows,
              "speedup": rows[1]["wallMs"]["mean"] / rows[0]["wallMs"]["mean"]}
    return report


def report_csv(report):
    """One line per variant with timing and estimate quantiles."""
    cols = ["method", "reps", "wall_mean_ms", "wall_std_ms", "wall_min", "wall_q1",
            "wall_median", "wall_q3", "wall_max", "logz_mean", "logz_std", "logz_min",
            "logz_q1", "logz_median", "logz_q3", "logz_max", "speedup"]
    lines = [",".join(cols)]
    for row in report["rows"]:
        w = row["wallMs"]
        z = row.get("logZ") or {}
        vals = [row["method"], row["reps"], w["mean"], w["std"], w["min"], w["q1"],
                w["median"], w["q3"], w["max"], z.get("mean", ""), z.get("std", ""),
                z.get("min", ""), z.get("q1", ""), z.get("median", ""), z.get("q3", ""),
                z.get("max", ""), report["speedup"]]
        lines.append(",".join(_fmt(v) for v in vals))
    return "\n".join(lines) + "\n"


def _fmt(v):
    if isinstance(v, float):
        return repr(round(v, 6))
    return str(v)
