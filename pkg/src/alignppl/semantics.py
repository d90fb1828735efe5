"""Evaluation entry points: trace replay, sampling, and suspendable runs."""

import json
import math
from dataclasses import dataclass, field
from typing import Any, List

from . import intrinsics
from .machine import SUSPENDED, TERMINATED, Machine, program
from .rng import Stream
from .values import EvalError, to_json


class TraceExhausted(EvalError):
    """Replay ran out of trace; ``dist`` is the distribution of the next draw."""

    def __init__(self, msg, name=None, dist=None):
        super().__init__(msg, name)
        self.dist = dist


@dataclass
class EvalOutcome:
    value: Any
    log_weight: float      # log prior density of draws + log likelihood
    log_likelihood: float  # from weight only
    log_prior: float       # from assume only
    letseq: List[str] = field(default_factory=list)
    trace: List[Any] = field(default_factory=list)

    def to_json(self):
        return {"value": to_json(self.value), "logWeight": _num(self.log_weight),
                "logLikelihood": _num(self.log_likelihood),
                "logPrior": _num(self.log_prior), "letSeq": list(self.letseq),
                "trace": [to_json(c) for c in self.trace]}


def _num(x):
    return x if math.isfinite(x) else str(x)


class _Replay:
    __slots__ = ("trace", "i", "log_prior")

    def __init__(self, trace):
        self.trace = trace
        self.i = 0
        self.log_prior = 0.0

    def __call__(self, m, name, d):
        if self.i >= len(self.trace):
            raise TraceExhausted(f"trace exhausted after {self.i} draws", name, d)
        v = self.trace[self.i]
        self.i += 1
        self.log_prior += d.log_density(v)
        return v


class _Sample:
    __slots__ = ("trace", "log_prior")

    def __init__(self):
        self.trace = []
        self.log_prior = 0.0

    def __call__(self, m, name, d):
        v = d.sample(m.rng)
        self.trace.append(v)
        self.log_prior += d.log_density(v)
        return v


def _outcome(m, hook, trace):
    return EvalOutcome(m.value, hook.log_prior + m.log_lik, m.log_lik, hook.log_prior,
                       m.letseq, list(trace))


def eval_replay(t, trace) -> EvalOutcome:
    """Evaluate with every assume taking the next element of `trace`."""
    hook = _Replay(list(trace))
    m = Machine(t, on_assume=hook, record=True).run()
    return _outcome(m, hook, hook.trace[:hook.i])


def eval_sample(t, rng) -> EvalOutcome:
    """Evaluate drawing fresh values; `rng` is a Stream or an integer seed."""
    if not isinstance(rng, Stream):
        rng = Stream.from_path(rng)
    hook = _Sample()
    m = Machine(t, rng=rng, on_assume=hook, record=True).run()
    return _outcome(m, hook, hook.trace)


def checkpoint(t, rng, record=False, track_paths=False):
    """A fresh checkpoint at the start of program `t`."""
    if not isinstance(rng, Stream):
        rng = Stream.from_path(rng)
    return Machine(t, rng=rng, record=record, track_paths=track_paths)


def run_until_checkpoint(cp, suspend_set):
    """Resume `cp` until it suspends at a weight in `suspend_set` or ends.

    The checkpoint's ``log_w`` afterwards holds the weight accumulated in
    this segment, including the suspending weight.
    """
    if cp.status == TERMINATED:
        return cp
    cp.log_w = 0.0
    return cp.run(suspend_set)


def delta_apply(c, arg):
    return intrinsics.delta(c, arg)


def dump_jsonl(outcomes, fh):
    """Write one JSON object per outcome (debug output)."""
    for o in outcomes:
        fh.write(json.dumps(o.to_json()) + "\n")


__all__ = ["EvalOutcome", "TraceExhausted", "eval_replay", "eval_sample",
           "checkpoint", "run_until_checkpoint", "delta_apply", "dump_jsonl",
           "program", "SUSPENDED", "TERMINATED"]
