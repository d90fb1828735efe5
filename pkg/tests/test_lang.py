import pytest

from alignppl.parser import ParseError, parse, tokenize
from alignppl.pretty import anf_to_term, pretty
from alignppl.semantics import eval_sample
from alignppl.syntax import ALet, App, AVar, BApp, BLam, Const, Lam, Let, LetRec, Var
from alignppl.transform import ScopeError, compile_source, letrec_desugar, to_anf, uniquify
from alignppl.values import EvalError

from helpers import DirectEval, ProgramGen, has_function


def front(src):
    return letrec_desugar(uniquify(parse(src)))


def anf_names(t):
    out = []

    def go(t):
        while isinstance(t, ALet):
            out.append(t.name)
            b = t.bound
            for sub in ("body", "then", "els"):
                if hasattr(b, sub):
                    go(getattr(b, sub))
            t = t.body
    go(t)
    return out


# ---------------------------------------------------------------- parsing

def test_parse_let_and_application():
    t = parse("let f = lam x. x + 1 in f 2")
    assert isinstance(t, Let) and t.name == "f"
    assert isinstance(t.bound, Lam)
    assert isinstance(t.body, App)


def test_binary_operators_are_intrinsic_applications():
    t = parse("1 + 2 * 3")
    # (+ 1) (* 2 3)
    assert isinstance(t, App) and isinstance(t.fn, App)
    assert t.fn.fn == Const(t.fn.fn.value)
    assert t.fn.fn.value.name == "add"
    assert t.arg.fn.fn.value.name == "mul"


def test_comments_and_sequencing():
    t = parse("-- a comment\nlet x = 1 in\n-- another\nx; 2")
    assert isinstance(t, Let)


def test_call_sugar_with_commas():
    assert parse("f(1, 2)") == parse("f 1 2")


@pytest.mark.parametrize("src", ["let x = in x", "(1", "lam . x", "match x with then 1 else 2",
                                 "{a = 1, a = 2}", "if true then 1", "1 +"])
def test_parse_errors_carry_positions(src):
    with pytest.raises(ParseError) as e:
        parse(src)
    assert ":" in str(e.value)


def test_tokenizer_positions():
    toks = tokenize("let x =\n  1")
    assert [t.text for t in toks[:4]] == ["let", "x", "=", "1"]
    assert toks[3].pos.line == 2


# ---------------------------------------------------------------- pretty printing

@pytest.mark.parametrize("seed", range(60))
def test_pretty_round_trip_random(seed):
    t = parse(ProgramGen(seed).program())
    assert parse(pretty(t)) == t


@pytest.mark.parametrize("src", [
    "let rec f = lam n. if n == 0 then 1 else n * f (n - 1) in f 5",
    "match [1, 2] with x :: xs then x else 0",
    "match #Some {a = 1.5} with #Some {a = v} then v else 0.0",
    "let r = {x = true, y = [1.0, 2.0]} in r",
    "assume (Normal 0.0 1.0)",
    "weight 0.5; ()",
    "not (true && false) || 1 < 2",
    "-3.25 - -1",
])
def test_pretty_round_trip_examples(src):
    t = parse(src)
    assert parse(pretty(t)) == t


def test_pretty_round_trip_corpus():
    from alignppl.models import corpus
    for e in corpus():
        t = parse(e.source)
        assert parse(pretty(t)) == t, e.id


# ---------------------------------------------------------------- uniquify / letrec

def test_uniquify_renames_shadowed_binders():
    t = uniquify(parse("let x = 1 in let x = x + 1 in x"))
    assert t.name == "x"
    assert t.body.name != "x"
    assert t.body.body == Var(t.body.name)


def test_uniquify_avoids_existing_names():
    t = uniquify(parse("let x = 1 in let x_1 = 2 in let x = 3 in x"))
    names = [t.name, t.body.name, t.body.body.name]
    assert len(set(names)) == 3


def test_uniquify_unbound_variable():
    with pytest.raises(ScopeError):
        uniquify(parse("let x = y in x"))


def test_wildcards_get_distinct_names():
    t = uniquify(parse("let _ = 1 in let _ = 2 in 3"))
    assert t.name != t.body.name


def test_letrec_must_bind_lambda():
    with pytest.raises(ScopeError) as e:
        letrec_desugar(uniquify(parse("let rec f = 1 in f")))
    assert "lambda" in str(e.value)


def test_letrec_marks_self_reference():
    t = front("let rec f = lam n. if n == 0 then 0 else f (n - 1) in f 3")
    assert isinstance(t, LetRec) and t.self_ref
    t2 = front("let rec g = lam n. n in g 3")
    assert not t2.self_ref


# ---------------------------------------------------------------- ANF

def test_anf_every_intermediate_is_named():
    a = to_anf(front("(lam x. x) ((lam y. y) 1)"))
    def atomic_apps(t):
        while isinstance(t, ALet):
            if isinstance(t.bound, BApp):
                assert isinstance(t.bound.fn, str) and isinstance(t.bound.arg, str)
            if isinstance(t.bound, BLam):
                atomic_apps(t.bound.body)
            t = t.body
        assert isinstance(t, AVar)
    atomic_apps(a)


def test_anf_names_unique():
    for seed in range(40):
        a = to_anf(front(ProgramGen(seed).program()))
        names = anf_names(a)
        assert len(names) == len(set(names))


def test_anf_keeps_user_names():
    a = compile_source("let rate = assume (Gamma 2.0 2.0) in rate")
    assert "rate" in anf_names(a)


def test_anf_idempotent():
    for seed in range(30):
        a = to_anf(front(ProgramGen(seed).program()))
        assert to_anf(anf_to_term(a)) == a


@pytest.mark.parametrize("seed", range(100))
def test_anf_semantic_equivalence(seed):
    """ANF + machine agree with direct evaluation of the surface term."""
    src = ProgramGen(1000 + seed).program()
    t = front(src)
    a = to_anf(t)
    try:
        out = eval_sample(a, seed)
    except EvalError:
        with pytest.raises(EvalError):
            DirectEval([]).run(t)
        return
    d = DirectEval(out.trace)
    v = d.run(t)
    assert d.i == len(out.trace)
    if has_function(v):
        assert has_function(out.value)
    else:
        assert v == out.value
    assert d.log_lik == out.log_likelihood
    assert d.log_prior == out.log_prior
