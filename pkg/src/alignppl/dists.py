"""Probability distributions: parameter checks, log densities and samplers.

Samplers take an explicit :class:`alignppl.rng.Stream`. Log densities return
``-inf`` outside the support and raise :class:`EvalError` for values of the
wrong shape (for example a real given to a Bernoulli).
"""

import math

from .values import EvalError

NEG_INF = float("-inf")
_LOG_2PI = math.log(2.0 * math.pi)


def _num(x, what):
    t = x.__class__
    if t is float:
        return x
    if t is int:
        return float(x)
    raise EvalError(f"{what}: expected a number, got {x!r}")


def _as_int(v, what):
    if type(v) is int:
        return v
    if type(v) is float and v.is_integer():
        return int(v)
    if type(v) is float or type(v) is bool or not isinstance(v, int):
        raise EvalError(f"{what}: expected an integer, got {v!r}")
    return v


def _vec(xs, what):
    if not isinstance(xs, tuple) or not xs:
        raise EvalError(f"{what}: expected a non-empty sequence, got {xs!r}")
    for x in xs:
        if x.__class__ is not float:
            return tuple(_num(x, what) for x in xs)
    return xs


class Dist:
    """Base class; subclasses set ``kind`` and ``params``."""

    kind = "?"
    params = ()
    discrete = False

    def __eq__(self, other):
        return type(self) is type(other) and self.params == other.params

    def __hash__(self):
        return hash((self.kind, self.params))

    def __repr__(self):
        return f"{self.kind}({', '.join(repr(p) for p in self.params)})"

    def log_density(self, v):
        raise NotImplementedError

    def sample(self, rng):
        raise NotImplementedError


class Bernoulli(Dist):
    kind = "Bernoulli"
    discrete = True

    def __init__(self, p):
        p = _num(p, "Bernoulli")
        if not 0.0 <= p <= 1.0:
            raise EvalError(f"Bernoulli: p must be in [0, 1], got {p}")
        self.p = p
        self.params = (p,)

    def log_density(self, v):
        if type(v) is not bool:
            raise EvalError(f"Bernoulli: expected a boolean, got {v!r}")
        q = self.p if v else 1.0 - self.p
        return math.log(q) if q > 0.0 else NEG_INF

    def sample(self, rng):
        return rng.random() < self.p

    def support(self):
        return (True, False)


class Categorical(Dist):
    kind = "Categorical"
    discrete = True

    def __init__(self, ws):
        ws = _vec(ws, "Categorical")
        if any(w < 0.0 for w in ws) or abs(sum(ws) - 1.0) > 1e-9:
            raise EvalError("Categorical: weights must be >= 0 and sum to 1")
        self.ws = ws
        self.params = (ws,)
        cum, acc = [], 0.0
        for w in ws:
            acc += w
            cum.append(acc)
        self._cum = cum

    def log_density(self, v):
        if type(v) is bool or not isinstance(v, (int, float)):
            raise EvalError(f"Categorical: expected an index, got {v!r}")
        if v != int(v) or not 0 <= v < len(self.ws):
            return NEG_INF
        w = self.ws[int(v)]
        return math.log(w) if w > 0.0 else NEG_INF

    def sample(self, rng):
        u = rng.random() * self._cum[-1]
        for i, c in enumerate(self._cum):
            if u < c:
                return i
        return len(self.ws) - 1

    def support(self):
        return tuple(range(len(self.ws)))


class Poisson(Dist):
    kind = "Poisson"
    discrete = True

    def __init__(self, rate):
        rate = _num(rate, "Poisson")
        if not rate > 0.0:
            raise EvalError(f"Poisson: rate must be > 0, got {rate}")
        self.rate = rate
        self.params = (rate,)

    def log_density(self, v):
        k = _as_int(v, "Poisson")
        if k < 0:
            return NEG_INF
        lam = self.rate
        return k * math.log(lam) - lam - math.lgamma(k + 1)

    def sample(self, rng):
        lam = self.rate
        if lam < 30.0:
            # Knuth: multiply uniforms until the product drops below e^-lam
            limit = math.exp(-lam)
            k, prod = 0, rng.random()
            while prod > limit:
                k += 1
                prod *= rng.random()
            return k
        return _poisson_ptrs(lam, rng)


def _poisson_ptrs(lam, rng):
    # Hormann's transformed rejection with squeeze
    slam = math.sqrt(lam)
    loglam = math.log(lam)
    b = 0.931 + 2.53 * slam
    a = -0.059 + 0.02483 * b
    invalpha = 1.1239 + 1.1328 / (b - 3.4)
    vr = 0.9277 - 3.6224 / (b - 2)
    while True:
        u = rng.random() - 0.5
        v = rng.random()
        us = 0.5 - abs(u)
        k = int(math.floor((2 * a / us + b) * u + lam + 0.43))
        if us >= 0.07 and v <= vr:
            return k
        if k < 0 or (us < 0.013 and v > us):
            continue
        if (math.log(v) + math.log(invalpha) - math.log(a / (us * us) + b)
                <= -lam + k * loglam - math.lgamma(k + 1)):
            return k


class Normal(Dist):
    """Normal with mean ``mu`` and standard deviation ``sigma``."""

    kind = "Normal"

    def __init__(self, mu, sigma):
        mu = _num(mu, "Normal")
        sigma = _num(sigma, "Normal")
        if not sigma > 0.0:
            raise EvalError(f"Normal: sigma must be > 0, got {sigma}")
        self.mu = mu
        self.sigma = sigma
        self.params = (mu, sigma)

    def log_density(self, v):
        x = _num(v, "Normal")
        z = (x - self.mu) / self.sigma
        return -0.5 * z * z - math.log(self.sigma) - 0.5 * _LOG_2PI

    def sample(self, rng):
        return self.mu + self.sigma * rng.normal()


class Uniform(Dist):
    kind = "Uniform"

    def __init__(self, lo, hi):
        lo = _num(lo, "Uniform")
        hi = _num(hi, "Uniform")
        if not hi > lo:
            raise EvalError(f"Uniform: need hi > lo, got ({lo}, {hi})")
        self.lo = lo
        self.hi = hi
        self.params = (lo, hi)

    def log_density(self, v):
        x = _num(v, "Uniform")
        if self.lo <= x < self.hi:
            return -math.log(self.hi - self.lo)
        return NEG_INF

    def sample(self, rng):
        return self.lo + (self.hi - self.lo) * rng.random()


class Exponential(Dist):
    kind = "Exponential"

    def __init__(self, rate):
        rate = _num(rate, "Exponential")
        if not rate > 0.0:
            raise EvalError(f"Exponential: rate must be > 0, got {rate}")
        self.rate = rate
        self.params = (rate,)

    def log_density(self, v):
        x = _num(v, "Exponential")
        if x < 0.0:
            return NEG_INF
        return math.log(self.rate) - self.rate * x

    def sample(self, rng):
        return -math.log(1.0 - rng.random()) / self.rate


def _gamma_sample(shape, rng):
    """Standard gamma draw (scale 1), Marsaglia and Tsang."""
    boost = 1.0
    if shape < 1.0:
        boost = (1.0 - rng.random()) ** (1.0 / shape)
        shape += 1.0
    d = shape - 1.0 / 3.0
    c = 1.0 / math.sqrt(9.0 * d)
    while True:
        x = rng.normal()
        v = 1.0 + c * x
        if v <= 0.0:
            continue
        v = v * v * v
        u = 1.0 - rng.random()
        if u < 1.0 - 0.0331 * x ** 4:
            return d * v * boost
        if math.log(u) < 0.5 * x * x + d * (1.0 - v + math.log(v)):
            return d * v * boost


class Gamma(Dist):
    """Gamma with ``shape`` k and ``scale`` theta (mean k * theta)."""

    kind = "Gamma"

    def __init__(self, shape, scale):
        shape = _num(shape, "Gamma")
        scale = _num(scale, "Gamma")
        if not (shape > 0.0 and scale > 0.0):
            raise EvalError(f"Gamma: shape and scale must be > 0, got ({shape}, {scale})")
        self.shape = shape
        self.scale = scale
        self.params = (shape, scale)
        self._norm = math.lgamma(shape) + shape * math.log(scale)

    def log_density(self, v):
        x = _num(v, "Gamma")
        if x < 0.0:
            return NEG_INF
        if x == 0.0:
            if self.shape == 1.0:
                return -self._norm
            return NEG_INF if self.shape > 1.0 else float("inf")
        return (self.shape - 1.0) * math.log(x) - x / self.scale - self._norm

    def sample(self, rng):
        return _gamma_sample(self.shape, rng) * self.scale


class Beta(Dist):
    kind = "Beta"

    def __init__(self, a, b):
        a = _num(a, "Beta")
        b = _num(b, "Beta")
        if not (a > 0.0 and b > 0.0):
            raise EvalError(f"Beta: parameters must be > 0, got ({a}, {b})")
        self.a = a
        self.b = b
        self.params = (a, b)
        self._lbeta = math.lgamma(a) + math.lgamma(b) - math.lgamma(a + b)

    def log_density(self, v):
        x = _num(v, "Beta")
        if x < 0.0 or x > 1.0:
            return NEG_INF
        a, b = self.a, self.b
        if x == 0.0:
            return NEG_INF if a > 1.0 else (-self._lbeta if a == 1.0 else float("inf"))
        if x == 1.0:
            return NEG_INF if b > 1.0 else (-self._lbeta if b == 1.0 else float("inf"))
        return (a - 1.0) * math.log(x) + (b - 1.0) * math.log1p(-x) - self._lbeta

    def sample(self, rng):
        x = _gamma_sample(self.a, rng)
        y = _gamma_sample(self.b, rng)
        return x / (x + y)


class Dirichlet(Dist):
    kind = "Dirichlet"

    def __init__(self, alphas):
        alphas = _vec(alphas, "Dirichlet")
        if any(not a > 0.0 for a in alphas):
            raise EvalError("Dirichlet: concentrations must be > 0")
        self.alphas = alphas
        self.params = (alphas,)
        self._norm = sum(math.lgamma(a) for a in alphas) - math.lgamma(sum(alphas))

    def log_density(self, v):
        if not isinstance(v, tuple):
            raise EvalError(f"Dirichlet: expected a sequence, got {v!r}")
        if len(v) != len(self.alphas):
            return NEG_INF
        xs = [_num(x, "Dirichlet") for x in v]
        if any(x < 0.0 for x in xs) or abs(sum(xs) - 1.0) > 1e-9:
            return NEG_INF
        acc = -self._norm
        for a, x in zip(self.alphas, xs):
            if x == 0.0:
                if a > 1.0:
                    return NEG_INF
                if a < 1.0:
                    return float("inf")
                continue
            acc += (a - 1.0) * math.log(x)
        return acc

    def sample(self, rng):
        gs = [_gamma_sample(a, rng) for a in self.alphas]
        tot = sum(gs)
        if tot == 0.0:
            # every gamma underflowed; fall back to the mode of the largest alpha
            i = max(range(len(gs)), key=lambda j: self.alphas[j])
            return tuple(1.0 if j == i else 0.0 for j in range(len(gs)))
        return tuple(g / tot for g in gs)


CONSTRUCTORS = {
    "Bernoulli": (Bernoulli, 1),
    "Beta": (Beta, 2),
    "Gamma": (Gamma, 2),
    "Exponential": (Exponential, 1),
    "Poisson": (Poisson, 1),
    "Normal": (Normal, 2),
    "Uniform": (Uniform, 2),
    "Dirichlet": (Dirichlet, 1),
    "Categorical": (Categorical, 1),
}


def log_density(d, v):
    if not isinstance(d, Dist):
        raise EvalError(f"expected a distribution, got {d!r}")
    return d.log_density(v)


def sample(d, rng):
    if not isinstance(d, Dist):
        raise EvalError(f"expected a distribution, got {d!r}")
    return d.sample(rng)
