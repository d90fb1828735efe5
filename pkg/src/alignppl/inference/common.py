"""Shared inference pieces: outputs, resampling, estimators, acceptance ratios."""

import math
from dataclasses import dataclass, field
from typing import Any, List, Optional

import numpy as np

from ..syntax import ALet, BIf, BLam, BMatch, BWeight, BAssume
from ..values import to_json


class InferenceError(Exception):
    """A run that cannot continue, e.g. every particle has zero weight."""


class InvariantViolation(InferenceError):
    """An internal invariant failed; for aligned SMC this means unsound alignment."""


@dataclass
class InferenceOutput:
    method: str
    seed: int
    samples: List[Any]
    log_weights: Optional[List[float]] = None
    log_z: Optional[float] = None
    particles: Optional[int] = None
    steps: Optional[int] = None
    acceptance_rate: Optional[float] = None
    accepts: Optional[List[bool]] = None
    generations: Optional[int] = None
    wall_ms: float = 0.0
    extra: dict = field(default_factory=dict)

    def to_json(self, with_samples=True):
        out = {"method": self.method, "seed": self.seed}
        if self.particles is not None:
            out["particles"] = self.particles
        if self.steps is not None:
            out["steps"] = self.steps
        if self.log_z is not None:
            out["logZ"] = _jnum(self.log_z)
        if self.generations is not None:
            out["generations"] = self.generations
        if self.acceptance_rate is not None:
            out["acceptanceRate"] = self.acceptance_rate
        if with_samples:
            lws = self.log_weights
            if lws is None:
                out["samples"] = [{"value": to_json(v), "logWeight": 0.0} for v in self.samples]
            else:
                out["samples"] = [{"value": to_json(v), "logWeight": _jnum(w)}
                                  for v, w in zip(self.samples, lws)]
        out["wallMs"] = round(self.wall_ms, 3)
        return out

    def normalized_weights(self):
        if self.log_weights is None:
            n = len(self.samples)
            return np.full(n, 1.0 / n)
        lw = np.asarray(self.log_weights, dtype=float)
        m = lw.max()
        if not np.isfinite(m):
            raise InferenceError("all samples have zero weight")
        w = np.exp(lw - m)
        return w / w.sum()

    def distribution(self):
        """Weighted empirical distribution over hashable sample values."""
        out = {}
        for v, w in zip(self.samples, self.normalized_weights()):
            out[v] = out.get(v, 0.0) + float(w)
        return out


def _jnum(x):
    return x if math.isfinite(x) else str(x)


def log_mean_exp(lw):
    lw = np.asarray(lw, dtype=float)
    m = lw.max()
    if not np.isfinite(m):
        return m
    return float(m + math.log(np.mean(np.exp(lw - m))))


def log_z_from_generations(per_gen):
    """Sum over generations of the log mean weight."""
    return float(sum(log_mean_exp(g) for g in per_gen))


def resample(log_weights, rng):
    """Systematic resampling; returns sorted ancestor indices."""
    lw = np.asarray(log_weights, dtype=float)
    n = len(lw)
    m = lw.max()
    if not np.isfinite(m) or m == -np.inf:
        raise InferenceError("degenerate population: every particle has zero weight")
    w = np.exp(lw - m)
    cum = np.cumsum(w)
    cum /= cum[-1]
    u = (rng.random() + np.arange(n)) / n
    idx = np.searchsorted(cum, u, side="right")
    return np.minimum(idx, n - 1)


def acceptance_ratio(kind, w_i, w_prev, w_new, w_old, dom_prev=None, dom_cur=None):
    """Metropolis-Hastings acceptance probability from log-space quantities.

    ``kind`` is "aligned" or "stack-trace"; the latter also scales by
    dom_prev / dom_cur.
    """
    if w_prev == -math.inf:
        return 1.0
    a = (w_i - w_prev) + (w_new - w_old)
    if kind == "stack-trace":
        a += math.log(dom_prev) - math.log(dom_cur)
    elif kind != "aligned":
        raise ValueError(f"unknown kind {kind!r}")
    if a != a:
        return 0.0
    return 1.0 if a >= 0.0 else math.exp(a)


def binders_of(t, kind):
    """Let-bound names whose bound is of the given ANF class."""
    out = []

    def go(t):
        while isinstance(t, ALet):
            b = t.bound
            if isinstance(b, kind):
                out.append(t.name)
            if isinstance(b, BLam):
                go(b.body)
            elif isinstance(b, (BIf, BMatch)):
                go(b.then)
                go(b.els)
            t = t.body

    go(t)
    return out


def weight_binders(t):
    return binders_of(t, BWeight)


def assume_binders(t):
    return binders_of(t, BAssume)
