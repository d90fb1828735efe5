"""Runtime values.

Arity-0 intrinsics are plain Python values: ``bool``, ``int``, ``float`` and
``None`` for unit. Sequences are tuples. Records, variants and closures get
small classes below; intrinsic functions live in :mod:`alignppl.intrinsics`.
"""

from __future__ import annotations

import math


class EvalError(Exception):
    """Runtime error raised while evaluating a program."""

    def __init__(self, msg, name=None):
        super().__init__(msg if name is None else f"{msg} (at {name})")
        self.name = name


class Closure:
    __slots__ = ("param", "binds", "ret", "env", "lam_name")

    def __init__(self, param, binds, ret, env, lam_name):
        self.param = param
        self.binds = binds
        self.ret = ret
        self.env = env
        self.lam_name = lam_name

    def __repr__(self):
        return f"<closure {self.lam_name}: lam {self.param}>"


class RecordV:
    __slots__ = ("fields",)

    def __init__(self, fields):
        self.fields = dict(fields)

    def __eq__(self, other):
        return isinstance(other, RecordV) and self.fields == other.fields

    def __hash__(self):
        return hash(tuple(sorted(self.fields.items())))

    def __repr__(self):
        inner = ", ".join(f"{k} = {show(v)}" for k, v in self.fields.items())
        return "{" + inner + "}"


class VariantV:
    __slots__ = ("tag", "value")

    def __init__(self, tag, value):
        self.tag = tag
        self.value = value

    def __eq__(self, other):
        return (isinstance(other, VariantV) and self.tag == other.tag
                and self.value == other.value)

    def __hash__(self):
        return hash((self.tag, self.value))

    def __repr__(self):
        return f"#{self.tag} {show(self.value)}"


def show(v) -> str:
    if v is None:
        return "()"
    if v is True:
        return "true"
    if v is False:
        return "false"
    if isinstance(v, float):
        return repr(v)
    if isinstance(v, tuple):
        return "[" + ", ".join(show(x) for x in v) + "]"
    return repr(v)


def to_json(v):
    """Convert a value to something ``json.dumps`` accepts."""
    if v is None or isinstance(v, (bool, int, str)):
        return v
    if isinstance(v, float):
        if math.isfinite(v):
            return v
        return str(v)
    if isinstance(v, tuple):
        return [to_json(x) for x in v]
    if isinstance(v, RecordV):
        return {k: to_json(x) for k, x in v.fields.items()}
    if isinstance(v, VariantV):
        return {"tag": v.tag, "value": to_json(v.value)}
    return repr(v)


def is_number(v) -> bool:
    t = type(v)
    return t is float or t is int
