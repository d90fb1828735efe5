"""The model corpus: source programs with their expected alignment facts.

Expected facts name binders (after uniquification) that must come out
aligned or unaligned. Every named `assume` and `weight` binder is listed;
anonymous binders such as the `__1` introduced for `e1; e2` are not.
Reference quantities carry a provenance tag: "external" for values taken as
given, "derived" for values computed here by an independent method (see
`alignppl.oracle`).
"""

import math
from dataclasses import dataclass, field
from importlib import resources
from typing import Dict, FrozenSet, Optional


@dataclass(frozen=True)
class Reference:
    quantity: str
    value: object
    provenance: str
    note: str = ""


@dataclass(frozen=True)
class CorpusEntry:
    id: str
    source: str
    aligned: FrozenSet[str]
    unaligned: FrozenSet[str]
    discrete: bool
    description: str
    references: tuple = field(default_factory=tuple)

    def reference(self, quantity) -> Optional[Reference]:
        for r in self.references:
            if r.quantity == quantity:
                return r
        return None

    def term(self):
        from ..transform import compile_source
        return compile_source(self.source)


def load_source(name: str) -> str:
    return resources.files(__name__).joinpath(f"{name}.appl").read_text()


_SPECS = [
    ("motivating", "Gamma rate with a random number of survival trials per iteration",
     {"rate", "n", "wIter"}, {"s", "wSurvive", "wDie"}, False, ()),
    ("geometric", "weighted geometric distribution",
     set(), {"x"}, True,
     (Reference("logZ", math.log(2.0), "external",
                "total mass of 0.5^n 1.5^(n-1) over n >= 1"),)),
    ("fig4", "analysis example with higher-order flow through a stochastic branch",
     {"a1", "t1"}, {"t2", "t3", "t4", "t5"}, True, ()),
    ("fig6a", "two branches with equal total weight in opposite order",
     {"c"}, {"w1", "w2", "w3", "w4"}, True,
     (Reference("posterior", {True: 0.5, False: 0.5}, "derived",
                "both branches carry weight 10"),)),
    ("fig6b", "rare branch with a nested choice",
     {"c"}, {"w1", "c2", "w2", "w3", "w4"}, True, ()),
    ("aircraft", "aircraft position from noisy readings in a holding pattern",
     {"position", "altitude", "wObs", "pos1", "alt1"}, {"wAlt"}, False,
     (Reference("logZ", -61.26, "external", "aligned SMC estimate"),)),
    ("lda", "two-topic LDA over three ten-word documents",
     {"phi1", "phi2", "z", "wObs", "theta1", "theta2", "theta3"}, set(), False,
     (Reference("relabelledMeans", (0.903529, 0.095549, 0.594184, 0.901955, 0.103999),
                "derived", "exact quadrature, labelling with phi1[0] > phi2[0]"),)),
    ("crbd6", "constant-rate birth-death on a six-leaf tree",
     {"lambda", "mu", "wBranch", "wNode", "wLeaf"},
     {"dt", "split", "wait", "wSide", "wSide2"}, False,
     (Reference("logZ", -12.858625, "derived", "product quadrature over the rates"),
      Reference("meanLambda", 0.334996, "derived", "product quadrature over the rates"))),
]


def corpus():
    """All corpus entries, in a fixed order."""
    return [CorpusEntry(id=i, source=load_source(i), aligned=frozenset(a),
                        unaligned=frozenset(u), discrete=d, description=desc,
                        references=refs)
            for i, desc, a, u, d, refs in _SPECS]


def entry(model_id: str) -> CorpusEntry:
    for e in corpus():
        if e.id == model_id:
            return e
    raise KeyError(f"unknown model {model_id!r}; known: {', '.join(ids())}")


def ids():
    return [s[0] for s in _SPECS]


def fact_mismatches(e: CorpusEntry, result):
    """Differences between an analysis result and the entry's expected facts."""
    from ..inference.common import assume_binders, weight_binders
    t = e.term()
    out = []
    for x in sorted(e.aligned):
        if x not in result.aligned:
            out.append(f"{x}: expected aligned")
    for x in sorted(e.unaligned):
        if x in result.aligned:
            out.append(f"{x}: expected unaligned")
    listed = e.aligned | e.unaligned
    for x in assume_binders(t) + weight_binders(t):
        if not x.startswith("__") and x not in listed:
            out.append(f"{x}: not covered by the expected facts")
    return out


_TERMS: Dict[str, object] = {}


def term(model_id: str):
    """The compiled ANF term for a corpus model (cached)."""
    t = _TERMS.get(model_id)
    if t is None:
        t = _TERMS[model_id] = entry(model_id).term()
    return t
