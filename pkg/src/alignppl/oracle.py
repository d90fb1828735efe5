"""Independent checks: empirical alignment, exact enumeration, reference posteriors."""

import math
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Tuple

import numpy as np

from .analysis import analyze_align
from .machine import program
from .semantics import TraceExhausted, eval_replay, eval_sample
from .values import EvalError, to_json


# ---------------------------------------------------------------- alignment

def restrict(seq, names):
    """Order-preserving filter of a name sequence to the names in `names`."""
    names = set(names)
    return [x for x in seq if x in names]


@dataclass
class AlignmentReport:
    program: str
    names: List[str]
    runs: int
    consistent: bool
    witness: Optional[Tuple[int, int]] = None
    restrictions: Optional[Tuple[List[str], List[str]]] = None

    def to_json(self):
        out = {"program": self.program, "names": sorted(self.names), "runs": self.runs,
               "verdict": "consistent" if self.consistent else "violation"}
        if not self.consistent:
            out["witnessSeeds"] = list(self.witness)
            out["restrictions"] = [list(r) for r in self.restrictions]
        return out


def check_alignment_empirically(t, names=None, runs=1000, seed=0, program_id="<program>"):
    """Sample `runs` executions and compare their let-sequences restricted to `names`.

    Run k uses integer seed ``seed + k``, so a violation's two witness seeds
    reproduce it through `eval_sample`. `names` defaults to the aligned set
    from the analysis.
    """
    if runs < 2:
        raise ValueError("need at least 2 runs")
    prog = program(t)
    if names is None:
        names = analyze_align(prog.anf).aligned
    names = frozenset(names)
    first = None
    first_seed = seed
    for k in range(runs):
        s = seed + k
        try:
            out = eval_sample(prog.anf, s)
        except EvalError as e:
            raise EvalError(f"run with seed {s} failed: {e}") from None
        r = restrict(out.letseq, names)
        if first is None:
            first = r
        elif r != first:
            return AlignmentReport(program_id, sorted(names), k + 1, False,
                                   (first_seed, s), (first, r))
    return AlignmentReport(program_id, sorted(names), runs, True)


# ---------------------------------------------------------------- enumeration

class EnumerationError(Exception):
    pass


@dataclass
class ExactPosterior:
    probs: Dict[Any, float]
    log_z: float
    traces: int
    tail_prior_mass: float = 0.0
    truncated: int = 0
    log_z_tree: float = float("nan")
    leaves: List[Tuple[tuple, float]] = field(default_factory=list, repr=False)

    def to_json(self):
        return {"logZ": self.log_z, "traces": self.traces,
                "tailPriorMass": self.tail_prior_mass, "truncatedPaths": self.truncated,
                "posterior": [{"value": to_json(v), "probability": p}
                              for v, p in sorted(self.probs.items(), key=lambda kv: repr(kv[0]))]}


def _support(d):
    sup = getattr(d, "support", None)
    if not getattr(d, "discrete", False) or sup is None:
        raise EnumerationError(f"cannot enumerate a {d.kind} draw")
    try:
        return sup()
    except (TypeError, ValueError, NotImplementedError):
        raise EnumerationError(f"{d.kind} has unbounded support") from None


def _logsumexp(xs):
    xs = [x for x in xs if x != -math.inf]
    if not xs:
        return -math.inf
    m = max(xs)
    return m + math.log(math.fsum(math.exp(x - m) for x in xs))


def enumerate_posterior(t, max_trace_len=64, truncate=False):
    """Exact posterior over return values of a finite-support program.

    Traces are enumerated depth first by replay. A path that needs more than
    `max_trace_len` draws is an error unless `truncate` is set, in which case
    its prior mass is added to ``tail_prior_mass`` and it is dropped.

    ``log_z`` sums the flat list of trace masses; ``log_z_tree`` sums the
    same masses recursively along the enumeration tree.
    """
    prog = program(t)
    leaves = []
    state = {"tail": [], "truncated": 0}

    def go(prefix, prior):
        try:
            out = eval_replay(prog.anf, prefix)
        except TraceExhausted as e:
            if len(prefix) >= max_trace_len:
                if not truncate:
                    raise EnumerationError(
                        f"a path needs more than {max_trace_len} draws") from None
                state["tail"].append(prior)
                state["truncated"] += 1
                return -math.inf
            d = e.dist
            parts = []
            for v in _support(d):
                lp = d.log_density(v)
                if lp == -math.inf:
                    continue
                parts.append(go(prefix + [v], prior + lp))
            return _logsumexp(parts)
        leaves.append((tuple(prefix), out.log_weight, out.value))
        return out.log_weight

    log_z_tree = go([], 0.0)
    log_z = _logsumexp([lw for _, lw, _ in leaves])
    if log_z == -math.inf:
        raise EnumerationError("every trace has zero weight")
    probs: Dict[Any, float] = {}
    for _, lw, v in leaves:
        probs[v] = probs.get(v, 0.0) + math.exp(lw - log_z)
    tail = math.fsum(math.exp(p) for p in state["tail"])
    return ExactPosterior(probs, log_z, len(leaves), tail, state["truncated"],
                          log_z_tree, [(tr, lw) for tr, lw, _ in leaves])


def compare_distributions(empirical, exact):
    """Total variation distance between two discrete distributions.

    Either argument may be a value-to-probability dict, an ExactPosterior,
    an inference output, or a plain list of samples.
    """
    p, q = _as_dist(empirical), _as_dist(exact)
    keys = set(p) | set(q)
    return 0.5 * math.fsum(abs(p.get(k, 0.0) - q.get(k, 0.0)) for k in keys)


def _as_dist(x):
    if isinstance(x, ExactPosterior):
        return x.probs
    if isinstance(x, dict):
        return x
    if hasattr(x, "distribution"):
        return x.distribution()
    xs = list(x)
    out: Dict[Any, float] = {}
    for v in xs:
        out[v] = out.get(v, 0.0) + 1.0
    return {k: c / len(xs) for k, c in out.items()}


# ---------------------------------------------------------------- reference posteriors

def lda_relabel(sample):
    """Map an LDA sample (θ1₀, θ2₀, θ3₀, φ1₀, φ2₀) to the labelling with φ1₀ ≥ φ2₀."""
    t1, t2, t3, a, b = sample
    if a >= b:
        return tuple(sample)
    return (1.0 - t1, 1.0 - t2, 1.0 - t3, b, a)


def lda_posterior_means(docs, nodes=48):
    """Posterior means of (θ1₀, θ2₀, θ3₀, φ1₀, φ2₀) under the labelling φ1₀ > φ2₀.

    Uniform priors on every two-component probability vector. With topics
    summed out each document likelihood is a polynomial in (θ, φ1₀, φ2₀),
    so Gauss-Legendre quadrature over θ and over the triangle φ2₀ < φ1₀
    (mapped to the unit square) is exact once `nodes` exceeds half the
    total degree.
    """
    x, w = np.polynomial.legendre.leggauss(nodes)
    x = 0.5 * (x + 1.0)
    w = 0.5 * w
    a = x[:, None]                    # φ1₀
    b = a * x[None, :]                # φ2₀ = φ1₀ s
    jac = a * np.ones_like(b)
    ws2 = w[:, None] * w[None, :] * jac
    t = x[:, None, None]
    wt = w[:, None, None]
    ints, tints = [], []
    for doc in docs:
        n0 = sum(1 for v in doc if v == 0)
        n1 = len(doc) - n0
        lik = (t * a + (1 - t) * b) ** n0 * (t * (1 - a) + (1 - t) * (1 - b)) ** n1
        ints.append((wt * lik).sum(axis=0))
        tints.append((wt * t * lik).sum(axis=0))
    joint = np.prod(ints, axis=0)
    z = (ws2 * joint).sum()
    means = []
    for d in range(len(docs)):
        others = np.prod([ints[e] for e in range(len(docs)) if e != d], axis=0)
        means.append(float((ws2 * tints[d] * others).sum() / z))
    means.append(float((ws2 * a * joint).sum() / z))
    means.append(float((ws2 * b * joint).sum() / z))
    return tuple(means)


def crbd_extinction(t, lam, mu):
    """Probability that a lineage alive at age `t` leaves no descendant today.

    Works elementwise on numpy arrays of rates.
    """
    lam = np.asarray(lam, dtype=float)
    mu = np.asarray(mu, dtype=float)
    r = lam - mu
    close = np.abs(r) < 1e-9
    r_safe = np.where(close, 1.0, r)
    e = np.exp(-r_safe * t)
    general = mu * (1.0 - e) / (lam - mu * e)
    return np.where(close, lam * t / (1.0 + lam * t), general)


def tree_branches(tree):
    """(start age, end age) for every branch below the root of a ("node", ...) tree."""
    out = []

    def go(node, parent_age):
        if node[0] == "leaf":
            out.append((parent_age, 0.0))
            return
        _, age, l, r = node
        out.append((parent_age, age))
        go(l, age)
        go(r, age)

    _, age, l, r = tree
    go(l, age)
    go(r, age)
    return out


def crbd_log_likelihood(tree, lam, mu, nodes=32):
    """Log marginal likelihood of a ranked tree under the birth-death program.

    Hidden speciation events along a branch form a Poisson process of rate
    `lam`; each contributes weight 2 if its side lineage dies out and 0
    otherwise, so the branch factor is exp(∫ lam (2E(t) - 1) dt). Rates may
    be numpy arrays.
    """
    lam = np.asarray(lam, dtype=float)
    mu = np.asarray(mu, dtype=float)
    x, w = np.polynomial.legendre.leggauss(nodes)
    branches = tree_branches(tree)
    n_internal = sum(1 for _, end in branches if end > 0.0)
    total = n_internal * np.log(lam)
    for start, end in branches:
        half = 0.5 * (start - end)
        acc = np.zeros(np.broadcast(lam, mu).shape)
        for xk, wk in zip(x, w):
            acc = acc + wk * (2.0 * crbd_extinction(end + half * (xk + 1.0), lam, mu) - 1.0)
        total = total + half * lam * acc - mu * (start - end)
    return total


def crbd_posterior(tree, lam_prior=(1.0, 1.0), mu_prior=(1.0, 0.5), grid=200,
                   upper=(12.0, 12.0)):
    """logZ and posterior means of the rates by product quadrature.

    Priors are Gamma(shape, scale). The rates are integrated on
    [0, upper] with Gauss-Legendre nodes; the prior mass beyond is below
    1e-5 for the default priors.
    """
    x, w = np.polynomial.legendre.leggauss(grid)
    lams = 0.5 * upper[0] * (x + 1.0)
    mus = 0.5 * upper[1] * (x + 1.0)
    wl = 0.5 * upper[0] * w
    wm = 0.5 * upper[1] * w

    def log_gamma_pdf(v, k, s):
        return (k - 1.0) * np.log(v) - v / s - math.lgamma(k) - k * math.log(s)

    L, M = np.meshgrid(lams, mus, indexing="ij")
    logs = (crbd_log_likelihood(tree, L, M)
            + log_gamma_pdf(L, *lam_prior) + log_gamma_pdf(M, *mu_prior))
    m = logs.max()
    dens = np.exp(logs - m) * wl[:, None] * wm[None, :]
    z = dens.sum()
    return {"logZ": float(m + math.log(z)),
            "meanLambda": float((dens * L).sum() / z),
            "meanMu": float((dens * M).sum() / z)}
