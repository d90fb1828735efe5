import math

import pytest

from alignppl import intrinsics
from alignppl.machine import SUSPENDED, TERMINATED, Machine
from alignppl.models import term
from alignppl.oracle import restrict
from alignppl.rng import Stream
from alignppl.semantics import (TraceExhausted, checkpoint, delta_apply, eval_replay,
                                eval_sample, run_until_checkpoint)
from alignppl.inference.common import weight_binders
from alignppl.transform import compile_source
from alignppl.values import EvalError

from helpers import ProgramGen


def src(s):
    return compile_source(s)


def test_geometric_replay():
    t = term("geometric")
    out = eval_replay(t, [True, True, True, False])
    assert out.value == 4
    assert out.log_likelihood == pytest.approx(3 * math.log(1.5))
    assert out.log_prior == pytest.approx(4 * math.log(0.5))
    assert restrict(out.letseq, {"geometric", "x"}) == ["geometric", "x", "x", "x", "x"]


def test_replay_exhausted_reports_next_distribution():
    with pytest.raises(TraceExhausted) as e:
        eval_replay(term("geometric"), [True])
    assert e.value.dist.kind == "Bernoulli"


@pytest.mark.parametrize("seed", range(25))
def test_replay_deterministic(seed):
    t = src(ProgramGen(seed).program())
    trace = eval_sample(t, seed).trace
    a, b = eval_replay(t, trace), eval_replay(t, trace)
    assert (a.value, a.log_weight, a.letseq) == (b.value, b.log_weight, b.letseq)


@pytest.mark.parametrize("model", ["geometric", "motivating", "aircraft", "fig6b", "crbd6", "lda"])
def test_sample_replay_coherence(model):
    t = term(model)
    for seed in range(5):
        s = eval_sample(t, seed)
        r = eval_replay(t, s.trace)
        assert r.value == s.value
        assert r.log_weight == s.log_weight
        assert r.letseq == s.letseq


def test_sample_is_seed_deterministic():
    t = term("motivating")
    assert eval_sample(t, 3).trace == eval_sample(t, 3).trace
    assert eval_sample(t, 3).trace != eval_sample(t, 4).trace


def test_log_weight_additivity():
    out = eval_replay(src("weight 2.0; weight 3.0; weight 0.5; 1"), [])
    assert out.log_likelihood == pytest.approx(math.log(3.0))
    out = eval_replay(src("let x = assume (Bernoulli 0.25) in weight 4.0; x"), [True])
    assert out.log_weight == pytest.approx(math.log(0.25) + math.log(4.0))


def test_weight_zero_and_negative():
    assert eval_replay(src("weight 0; 1"), []).log_likelihood == -math.inf
    with pytest.raises(EvalError):
        eval_replay(src("weight (0.0 - 1.0); 1"), [])
    with pytest.raises(EvalError):
        eval_replay(src("weight true; 1"), [])


@pytest.mark.parametrize("model", ["aircraft", "geometric", "motivating", "fig6b"])
def test_checkpoint_composition(model):
    """Running segment by segment gives the same value and total weight."""
    t = term(model)
    suspend = frozenset(weight_binders(t))
    for seed in range(4):
        whole = Machine(t, rng=Stream.from_path(seed)).run()
        cp = checkpoint(t, Stream.from_path(seed))
        total, segs = 0.0, 0
        while cp.status != TERMINATED:
            run_until_checkpoint(cp, suspend)
            total += cp.log_w
            segs += 1
            if cp.status == SUSPENDED:
                assert cp.at in suspend
        assert cp.value == whole.value
        assert total == pytest.approx(whole.log_lik, abs=1e-9)
        assert segs >= 1


def test_checkpoint_clone_is_independent():
    t = term("geometric")
    cp = checkpoint(t, 5)
    run_until_checkpoint(cp, frozenset(weight_binders(t)))
    if cp.status == TERMINATED:
        pytest.skip("first flip ended the run")
    twin = cp.clone()
    run_until_checkpoint(cp, frozenset())
    run_until_checkpoint(twin, frozenset())
    assert cp.value == twin.value
    assert cp.log_lik == twin.log_lik


def test_terminated_checkpoint_unchanged():
    t = src("weight 2.0; 7")
    cp = checkpoint(t, 0)
    run_until_checkpoint(cp, frozenset())
    assert cp.status == TERMINATED
    before = cp.log_lik
    run_until_checkpoint(cp, frozenset())
    assert cp.log_lik == before and cp.value == 7


def test_delta_apply_curries():
    add = intrinsics.prim("add")
    assert delta_apply(delta_apply(add, 2), 3) == 5
    with pytest.raises(EvalError):
        delta_apply(3, 1)


def test_intrinsics_reject_functions():
    with pytest.raises(EvalError):
        eval_replay(src("let f = lam x. x in 1 + f"), [])
    with pytest.raises(EvalError):
        eval_replay(src("let f = lam x. x in [f]; head [f]"), [])


@pytest.mark.parametrize("expr,expected", [
    ("1 + 2", 3), ("7 / 2", 3.5), ("2 * 3.0", 6.0), ("5 - 8", -3), ("1 < 2", True),
    ("2 <= 2", True), ("3 > 4", False), ("[1, 2] == [1, 2]", True), ("1 != 1", False),
    ("length [1, 2, 3]", 3), ("head [4, 5]", 4), ("tail [4, 5]", (5,)),
    ("get [4, 5] 1", 5), ("concat [1] [2]", (1, 2)), ("cons 0 [1]", (0, 1)),
    ("null []", True), ("min 3 4", 3), ("max 3.0 4.0", 4.0), ("abs (0 - 2)", 2),
    ("floor 2.7", 2), ("int2real 3", 3.0), ("pow 2.0 3.0", 8.0), ("sqrt 4.0", 2.0),
    ("exp 0.0", 1.0), ("log 1.0", 0.0), ("true && false", False), ("true || false", True),
])
def test_intrinsics(expr, expected):
    v = eval_replay(src(expr), []).value
    assert v == expected and type(v) is type(expected)


@pytest.mark.parametrize("expr", ["1 / 0", "head []", "get [1] 3", "log (0.0 - 1.0)", "sqrt (0.0 - 1.0)",
                                  "1 + true", "if 1 then 2 else 3", "assume 3", "3 4"])
def test_runtime_errors(expr):
    with pytest.raises(EvalError):
        eval_replay(src(expr), [])


def test_log_zero_is_negative_infinity():
    assert eval_replay(src("log 0.0"), []).value == -math.inf


def test_match_structures():
    v = eval_replay(src("match #Node {age = 2.0, kids = [1, 2]} with "
                        "#Node {age = a, kids = k :: ks} then a + int2real k else 0.0"), []).value
    assert v == 3.0
    v = eval_replay(src("match [] with x :: xs then 1 else 2"), []).value
    assert v == 2
