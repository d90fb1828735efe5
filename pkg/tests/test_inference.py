import dataclasses
import math
from collections import Counter

import numpy as np
import pytest

from alignppl.analysis import analyze_align
from alignppl.inference import (InferenceError, InvariantViolation, acceptance_ratio,
                                log_mean_exp, log_z_from_generations, resample,
                                run_aligned_lightweight_mcmc, run_lightweight_mcmc, run_mcmc,
                                run_smc)
from alignppl.models import term
from alignppl.oracle import compare_distributions, enumerate_posterior
from alignppl.rng import Stream
from alignppl.transform import compile_source

# Three aligned draws; the weight couples two of them.
TRIPLE = """
let a = assume (Bernoulli 0.3) in
let b = assume (Categorical [0.2, 0.5, 0.3]) in
let c = assume (Bernoulli 0.6) in
let w = weight (if a then 3.0 else 1.0) in
let v = weight (if c then int2real (b + 1) else 1.0) in
[if a then 1 else 0, b, if c then 1 else 0]
"""

SMALL = """
let a = assume (Bernoulli 0.3) in
let w = weight (if a then 4.0 else 1.0) in
let b = assume (Bernoulli 0.5) in
let v = weight (if b then 2.0 else 1.0) in
[a, b]
"""


def triple():
    return compile_source(TRIPLE)


# ---------------------------------------------------------------- shared pieces

def test_log_mean_exp():
    assert log_mean_exp([0.0, 0.0]) == 0.0
    assert log_mean_exp([math.log(1.0), math.log(3.0)]) == pytest.approx(math.log(2.0))
    assert log_mean_exp([-math.inf, -math.inf]) == -math.inf
    assert log_z_from_generations([[0.0, math.log(3.0)], [math.log(2.0)]]) == \
        pytest.approx(2 * math.log(2.0))


def test_resample_frequencies():
    w = np.array([0.1, 0.4, 0.2, 0.3])
    n = 1000
    idx = resample(np.log(np.repeat(w, 250)), Stream.from_path(3))
    counts = np.bincount(idx // 250, minlength=4) / n
    assert np.abs(counts - w).max() <= 1.0 / n + 1e-12
    # systematic resampling: each ancestor appears floor or ceil of n * w_i times
    lw = np.log(np.array([0.05, 0.5, 0.15, 0.3]))
    for seed in range(50):
        c = np.bincount(resample(lw, Stream.from_path(seed)), minlength=4)
        expect = 4 * np.exp(lw)
        assert np.all(c >= np.floor(expect)) and np.all(c <= np.ceil(expect))


def test_resample_mean_frequencies_unbiased():
    lw = np.log(np.array([0.07, 0.13, 0.8]))
    total = np.zeros(3)
    for seed in range(4000):
        total += np.bincount(resample(lw, Stream.from_path(seed)), minlength=3)
    assert np.abs(total / total.sum() - np.exp(lw)).max() < 0.01


def test_resample_degenerate():
    with pytest.raises(InferenceError):
        resample([-math.inf, -math.inf], Stream.from_path(0))


def test_acceptance_ratio_forms():
    la, lb = math.log(0.2), math.log(0.5)
    assert acceptance_ratio("aligned", lb, la, 0.0, 0.0) == pytest.approx(1.0)
    assert acceptance_ratio("aligned", la, lb, 0.0, 0.0) == pytest.approx(0.4)
    assert acceptance_ratio("aligned", la, lb, math.log(2.0), math.log(4.0)) == \
        pytest.approx(0.2)
    assert acceptance_ratio("stack-trace", la, lb, 0.0, 0.0, dom_prev=3, dom_cur=4) == \
        pytest.approx(0.4 * 0.75)
    assert acceptance_ratio("aligned", la, -math.inf, 0.0, 0.0) == 1.0
    assert acceptance_ratio("aligned", -math.inf, la, 0.0, 0.0) == 0.0
    with pytest.raises(ValueError):
        acceptance_ratio("other", 0.0, 0.0, 0.0, 0.0)


# ---------------------------------------------------------------- SMC

@pytest.mark.parametrize("aligned", [True, False])
def test_smc_seed_determinism(aligned):
    t = term("motivating")
    a = run_smc(t, 300, seed=4, aligned=aligned)
    b = run_smc(t, 300, seed=4, aligned=aligned)
    c = run_smc(t, 300, seed=5, aligned=aligned)
    assert a.log_z == b.log_z and a.samples == b.samples and a.log_weights == b.log_weights
    assert a.log_z != c.log_z


@pytest.mark.parametrize("aligned", [True, False])
def test_smc_threads_identical(aligned):
    t = term("aircraft")
    a = run_smc(t, 200, seed=2, aligned=aligned, threads=1)
    b = run_smc(t, 200, seed=2, aligned=aligned, threads=4)
    assert a.log_z == b.log_z and a.samples == b.samples


def test_smc_fig6a_aligned_is_exact():
    t = term("fig6a")
    for seed in range(5):
        out = run_smc(t, 500, seed=seed)
        assert out.log_z == pytest.approx(math.log(10.0), abs=1e-12)


@pytest.mark.parametrize("aligned", [True, False])
def test_smc_small_program_exact_posterior(aligned):
    t = compile_source(SMALL)
    exact = enumerate_posterior(t)
    out = run_smc(t, 20000, seed=1, aligned=aligned)
    assert compare_distributions(out, exact) < 0.02
    assert out.log_z == pytest.approx(exact.log_z, abs=0.03)


def test_smc_unbiased_evidence_geometric():
    t = term("geometric")
    zs = [math.exp(run_smc(t, 500, seed=s).log_z) for s in range(20)]
    assert np.mean(zs) == pytest.approx(2.0, rel=0.05)


def test_smc_bogus_analysis_detected():
    t = term("fig6a")
    res = analyze_align(t)
    bogus = dataclasses.replace(res, aligned=res.aligned | {"w1", "w3"},
                                unaligned=res.unaligned - {"w1", "w3"})
    with pytest.raises(InvariantViolation):
        run_smc(t, 200, seed=0, analysis=bogus)
    t2 = term("fig6b")
    res2 = analyze_align(t2)
    bogus2 = dataclasses.replace(res2, aligned=res2.aligned | {"w1"})
    with pytest.raises(InvariantViolation):
        run_smc(t2, 200, seed=0, analysis=bogus2)


@pytest.mark.parametrize("aligned", [True, False])
def test_smc_degenerate_population(aligned):
    t = compile_source("let w = weight 0 in 1")
    with pytest.raises(InferenceError):
        run_smc(t, 10, seed=0, aligned=aligned)


def test_smc_needs_two_particles():
    with pytest.raises(ValueError):
        run_smc(term("geometric"), 1)


# ---------------------------------------------------------------- MCMC

@pytest.mark.parametrize("aligned", [True, False])
def test_mcmc_seed_determinism(aligned):
    t = term("motivating")
    a = run_mcmc(t, 500, seed=3, aligned=aligned)
    b = run_mcmc(t, 500, seed=3, aligned=aligned)
    assert a.samples == b.samples and a.accepts == b.accepts


@pytest.mark.parametrize("aligned", [True, False])
def test_mcmc_stationary_distribution(aligned):
    t = triple()
    exact = enumerate_posterior(t)
    out = run_mcmc(t, 60000, seed=7, aligned=aligned)
    assert compare_distributions(out, exact) < 0.02


@pytest.mark.parametrize("aligned", [True, False])
def test_mcmc_pair_symmetry(aligned):
    """Reversibility: P(x_t = a, x_t+1 = b) matches P(x_t = b, x_t+1 = a)."""
    t = compile_source(SMALL)
    out = run_mcmc(t, 80000, seed=11, aligned=aligned, burn=0.0)
    xs = out.samples
    pairs = Counter(zip(xs, xs[1:]))
    n = len(xs) - 1
    states = sorted(set(xs))
    for a in states:
        for b in states:
            if a < b:
                pab, pba = pairs[(a, b)] / n, pairs[(b, a)] / n
                se = math.sqrt((pab + pba) / n) + 1e-9
                assert abs(pab - pba) < 5 * se, (a, b, pab, pba)


@pytest.mark.parametrize("aligned", [True, False])
def test_mcmc_local_steps_change_one_draw(aligned):
    """With (almost) no global steps each move changes at most one draw."""
    t = compile_source("let a = assume (Normal 0.0 1.0) in let b = assume (Normal 0.0 1.0) in "
                       "let c = assume (Normal 0.0 1.0) in let w = weight (exp (0.0 - a * b)) in "
                       "[a, b, c]")
    out = run_mcmc(t, 3000, seed=2, g=1e-12, burn=0.0, aligned=aligned)
    xs = out.samples
    moves = 0
    for u, v in zip(xs, xs[1:]):
        changed = sum(1 for p, q in zip(u, v) if p != q)
        assert changed <= 1
        moves += changed
    assert moves > 500


def test_aligned_mcmc_reuses_unaligned_draws_by_name():
    """The unaligned draw is kept when the aligned proposal leaves its branch alone."""
    t = compile_source("let a = assume (Normal 0.0 1.0) in "
                       "let b = assume (Normal 0.0 1.0) in "
                       "let r = if b > 0.0 then let x = assume (Normal 5.0 1.0) in x else 0.0 in "
                       "[a, b, r]")
    out = run_aligned_lightweight_mcmc(t, 3000, seed=1, g=1e-12, burn=0.0)
    xs = out.samples
    kept = 0
    for u, v in zip(xs, xs[1:]):
        if u[0] != v[0] and u[1] == v[1]:
            assert u[2] == v[2]
            kept += 1
    assert kept > 200


def test_aligned_and_trace_mcmc_agree_on_fully_aligned_program():
    t = triple()
    a = run_aligned_lightweight_mcmc(t, 3000, seed=5)
    b = run_lightweight_mcmc(t, 3000, seed=5)
    assert a.accepts == b.accepts
    assert a.samples == b.samples


@pytest.mark.parametrize("model", ["geometric", "fig6a", "fig6b"])
@pytest.mark.parametrize("aligned", [True, False])
def test_mcmc_discrete_corpus(model, aligned):
    t = term(model)
    exact = enumerate_posterior(t, max_trace_len=60, truncate=True)
    out = run_mcmc(t, 40000, seed=2, aligned=aligned)
    # a smoke-level bound; the long geometric tail makes short chains noisy
    assert compare_distributions(out, exact) < 0.05


def test_mcmc_bogus_analysis_detected():
    t = term("geometric")
    res = analyze_align(t)
    bogus = dataclasses.replace(res, aligned=res.aligned | {"x"},
                                unaligned=res.unaligned - {"x"})
    with pytest.raises(InvariantViolation):
        run_aligned_lightweight_mcmc(t, 2000, seed=0, g=0.01, analysis=bogus)


def test_mcmc_rejects_bad_g():
    with pytest.raises(ValueError):
        run_mcmc(term("geometric"), 10, g=0.0)


def test_mcmc_burn_in_and_rate():
    out = run_mcmc(term("geometric"), 1000, seed=0, burn=0.25)
    assert len(out.samples) == 750
    assert 0.0 < out.acceptance_rate <= 1.0
    assert len(out.accepts) == 999
