import math

import numpy as np
import pytest
from scipy import integrate, stats

from alignppl.dists import (Bernoulli, Beta, Categorical, Dirichlet, Exponential, Gamma,
                            Normal, Poisson, Uniform)
from alignppl.rng import Stream
from alignppl.values import EvalError

CONTINUOUS = [
    (Normal(1.5, 0.7), stats.norm(1.5, 0.7), (-math.inf, math.inf)),
    (Uniform(-2.0, 3.0), stats.uniform(-2.0, 5.0), (-2.0, 3.0)),
    (Exponential(2.5), stats.expon(scale=1 / 2.5), (0.0, math.inf)),
    (Gamma(2.0, 2.0), stats.gamma(2.0, scale=2.0), (0.0, math.inf)),
    (Gamma(0.5, 1.0), stats.gamma(0.5, scale=1.0), (0.0, math.inf)),
    (Gamma(1.0, 0.5), stats.gamma(1.0, scale=0.5), (0.0, math.inf)),
    (Beta(2.0, 5.0), stats.beta(2.0, 5.0), (0.0, 1.0)),
    (Beta(0.5, 0.5), stats.beta(0.5, 0.5), (0.0, 1.0)),
]


@pytest.mark.parametrize("d,ref,support", CONTINUOUS, ids=lambda x: getattr(x, "kind", ""))
def test_density_integrates_to_one(d, ref, support):
    total, _ = integrate.quad(lambda x: math.exp(d.log_density(x)), *support, limit=200)
    assert abs(total - 1.0) < 1e-6


@pytest.mark.parametrize("d,ref,support", CONTINUOUS, ids=lambda x: getattr(x, "kind", ""))
def test_density_matches_reference(d, ref, support):
    for q in (0.1, 0.3, 0.5, 0.9):
        x = float(ref.ppf(q))
        assert d.log_density(x) == pytest.approx(ref.logpdf(x), rel=1e-9, abs=1e-12)


@pytest.mark.parametrize("d,ref,support", CONTINUOUS, ids=lambda x: getattr(x, "kind", ""))
def test_sampler_kolmogorov_smirnov(d, ref, support):
    rng = Stream.from_path(2024, hash(d.kind) & 0xFFFF)
    xs = [d.sample(rng) for _ in range(4000)]
    assert stats.kstest(xs, ref.cdf).pvalue > 0.001


def test_dirichlet_integrates_to_one():
    d = Dirichlet((2.0, 3.0))
    total, _ = integrate.quad(lambda x: math.exp(d.log_density((x, 1.0 - x))), 0, 1)
    assert abs(total - 1.0) < 1e-6
    d3 = Dirichlet((1.5, 2.0, 2.5))
    total, _ = integrate.dblquad(
        lambda y, x: math.exp(d3.log_density((x, y, 1.0 - x - y))) if x + y < 1 else 0.0,
        0, 1, 0, lambda x: 1 - x, epsabs=1e-10)
    assert abs(total - 1.0) < 1e-6


def test_dirichlet_marginal_ks():
    rng = Stream.from_path(11)
    d = Dirichlet((2.0, 3.0, 1.0))
    xs = [d.sample(rng) for _ in range(4000)]
    assert all(abs(sum(x) - 1.0) < 1e-12 for x in xs)
    # the first component is Beta(2, 4)
    assert stats.kstest([x[0] for x in xs], stats.beta(2.0, 4.0).cdf).pvalue > 0.001


@pytest.mark.parametrize("d,n", [(Bernoulli(0.3), 2), (Categorical((0.2, 0.5, 0.3)), 3)])
def test_discrete_mass_sums_to_one(d, n):
    total = math.fsum(math.exp(d.log_density(v)) for v in d.support())
    assert abs(total - 1.0) < 1e-12
    assert len(d.support()) == n


def test_poisson_mass_sums_to_one():
    d = Poisson(3.5)
    total = math.fsum(math.exp(d.log_density(k)) for k in range(200))
    assert abs(total - 1.0) < 1e-6
    assert d.log_density(4) == pytest.approx(stats.poisson(3.5).logpmf(4))


@pytest.mark.parametrize("d,ref", [
    (Bernoulli(0.3), {True: 0.3, False: 0.7}),
    (Categorical((0.2, 0.5, 0.3)), {0: 0.2, 1: 0.5, 2: 0.3}),
])
def test_discrete_sampler_frequencies(d, ref):
    rng = Stream.from_path(5)
    n = 60000
    counts = {}
    for _ in range(n):
        v = d.sample(rng)
        counts[v] = counts.get(v, 0) + 1
    keys = sorted(ref, key=repr)
    obs = [counts.get(k, 0) for k in keys]
    exp = [ref[k] * n for k in keys]
    assert stats.chisquare(obs, exp).pvalue > 0.001


def test_poisson_sampler():
    rng = Stream.from_path(6)
    for lam in (0.5, 4.0, 40.0):
        xs = np.array([Poisson(lam).sample(rng) for _ in range(20000)])
        assert abs(xs.mean() - lam) < 4 * math.sqrt(lam / len(xs))


def test_out_of_support_is_zero_density():
    assert Uniform(0.0, 1.0).log_density(2.0) == -math.inf
    assert Exponential(1.0).log_density(-1.0) == -math.inf
    assert Beta(2.0, 2.0).log_density(1.5) == -math.inf
    assert Categorical((0.5, 0.5)).log_density(2) == -math.inf
    assert Poisson(1.0).log_density(-1) == -math.inf


@pytest.mark.parametrize("make", [
    lambda: Bernoulli(1.5), lambda: Normal(0.0, -1.0), lambda: Uniform(1.0, 0.0),
    lambda: Exponential(0.0), lambda: Gamma(-1.0, 1.0), lambda: Beta(0.0, 1.0),
    lambda: Categorical((0.5, 0.6)), lambda: Dirichlet((1.0, -1.0)), lambda: Poisson(-2.0),
    lambda: Normal(True, 1.0),
])
def test_invalid_parameters(make):
    with pytest.raises(EvalError):
        make()


def test_dists_from_programs():
    from alignppl.semantics import eval_replay
    from alignppl.transform import compile_source
    out = eval_replay(compile_source("assume (Normal 0.0 2.0)"), [1.0])
    assert out.log_prior == pytest.approx(stats.norm(0, 2).logpdf(1.0))
    assert eval_replay(compile_source("pdf (Bernoulli 0.25) true"), []).value == pytest.approx(0.25)
