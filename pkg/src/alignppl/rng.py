"""Counter-based splittable random streams.

A stream is a 64-bit key plus a counter; the n-th output is a SplitMix64
finalizer applied to ``key + n * GAMMA``. Substreams are keyed by hashing
their path (for example master seed, particle index, generation), so the
values a particle sees do not depend on the order particles are executed.
"""

import math

_MASK = (1 << 64) - 1
_GAMMA = 0x9E3779B97F4A7C15
_TWO53 = 1.0 / (1 << 53)
_TAU = 2.0 * math.pi


def _mix(z):
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK
    return z ^ (z >> 31)


def derive_key(*path) -> int:
    key = 0x243F6A8885A308D3
    for p in path:
        key = _mix((key ^ (int(p) & _MASK)) * _GAMMA & _MASK)
        key = _mix((key + _GAMMA) & _MASK)
    return key


def family(*path):
    """Indexed streams: ``family(*path)(k)`` is the k-th member's stream.

    Cheaper than deriving each member's key from the full path.
    """
    base = derive_key(*path)

    def member(k):
        return Stream(_mix((base + (k + 1) * _GAMMA) & _MASK))
    return member


class Stream:
    __slots__ = ("key", "counter")

    def __init__(self, key=0, counter=0):
        self.key = key & _MASK
        self.counter = counter

    @classmethod
    def from_path(cls, *path):
        return cls(derive_key(*path))

    def split(self, *path):
        return Stream(derive_key(self.key, *path))

    def copy(self):
        return Stream(self.key, self.counter)

    def bits(self) -> int:
        self.counter += 1
        z = (self.key + self.counter * _GAMMA) & _MASK
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK
        return z ^ (z >> 31)

    def random(self) -> float:
        """Uniform on [0, 1)."""
        self.counter += 1
        z = (self.key + self.counter * _GAMMA) & _MASK
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK
        return ((z ^ (z >> 31)) >> 11) * _TWO53

    def randbelow(self, n: int) -> int:
        return min(int(self.random() * n), n - 1)

    def normal(self) -> float:
        u1 = 1.0 - self.random()
        u2 = self.random()
        return math.sqrt(-2.0 * math.log(u1)) * math.cos(_TAU * u2)
