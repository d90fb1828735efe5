"""Intrinsic functions with arities and the delta function.

A :class:`Prim` is a curried intrinsic: a name, the remaining arity and the
arguments supplied so far. Applying one to an argument (``delta``) either
returns a new ``Prim`` with arity one less or, when the last argument
arrives, the result of the operation.
"""

import math

from . import dists
from .values import Closure, EvalError, RecordV, VariantV, is_number


class Prim:
    __slots__ = ("name", "arity", "args", "fn")

    def __init__(self, name, arity, fn, args=()):
        self.name = name
        self.arity = arity
        self.fn = fn
        self.args = args

    def __eq__(self, other):
        return (isinstance(other, Prim) and self.name == other.name
                and self.args == other.args)

    def __hash__(self):
        return hash((self.name, self.args))

    def __repr__(self):
        if not self.args:
            return self.name
        return f"({self.name} {' '.join(repr(a) for a in self.args)})"


def _n(x, op):
    if type(x) is int or type(x) is float:
        return x
    raise EvalError(f"{op}: expected a number, got {_show(x)}")


def _b(x, op):
    if type(x) is bool:
        return x
    raise EvalError(f"{op}: expected a boolean, got {_show(x)}")


def _s(x, op):
    if type(x) is tuple:
        return x
    raise EvalError(f"{op}: expected a sequence, got {_show(x)}")


def _show(x):
    from .values import show
    return show(x)


def _first_order(v):
    """True if `v` holds no functions anywhere (closures or intrinsics)."""
    t = type(v)
    if t is tuple:
        return all(_first_order(x) for x in v)
    if t is RecordV:
        return all(_first_order(x) for x in v.fields.values())
    if t is VariantV:
        return _first_order(v.value)
    return not (t is Closure or t is Prim)


_SCALARS = frozenset((int, float, bool, str, type(None)))


def _data(v, op):
    t = v.__class__
    if t in _SCALARS:
        return v
    if t is tuple and all(x.__class__ is float for x in v):
        return v
    if not _first_order(v):
        raise EvalError(f"{op}: intrinsics may not return functions")
    return v


_NUM = (int, float)


def _arith(op, f):
    def go(a, b):
        if a.__class__ in _NUM and b.__class__ in _NUM:
            return f(a, b)
        _n(a, op)
        _n(b, op)
    go.__name__ = "_" + op
    return go


def _bad(op, a, b):
    _n(a, op)
    _n(b, op)


def _add(a, b):
    if a.__class__ in _NUM and b.__class__ in _NUM:
        return a + b
    _bad("add", a, b)


def _sub(a, b):
    if a.__class__ in _NUM and b.__class__ in _NUM:
        return a - b
    _bad("sub", a, b)


def _mul(a, b):
    if a.__class__ in _NUM and b.__class__ in _NUM:
        return a * b
    _bad("mul", a, b)


def _lt(a, b):
    if a.__class__ in _NUM and b.__class__ in _NUM:
        return a < b
    _bad("lt", a, b)


def _gt(a, b):
    if a.__class__ in _NUM and b.__class__ in _NUM:
        return a > b
    _bad("gt", a, b)


def _div(a, b):
    if a.__class__ not in _NUM or b.__class__ not in _NUM:
        _n(a, "div")
        _n(b, "div")
    if b == 0:
        raise EvalError("div: division by zero")
    return a / b


def _cmp(op, f):
    return _arith(op, f)


def _eq(a, b):
    if type(a) is Closure or type(b) is Closure:
        raise EvalError("eq: cannot compare functions")
    if is_number(a) and is_number(b):
        return a == b
    if type(a) is not type(b) and not (a is None or b is None):
        return False
    return a == b


def _log(x):
    x = _n(x, "log")
    if x < 0:
        raise EvalError(f"log: negative argument {x}")
    return math.log(x) if x > 0 else float("-inf")


def _sqrt(x):
    x = _n(x, "sqrt")
    if x < 0:
        raise EvalError(f"sqrt: negative argument {x}")
    return math.sqrt(x)


def _pow(a, b):
    try:
        r = _n(a, "pow") ** _n(b, "pow")
    except (OverflowError, ZeroDivisionError) as e:
        raise EvalError(f"pow: {e}")
    if isinstance(r, complex):
        raise EvalError("pow: complex result")
    return r


def _exp(x):
    try:
        return math.exp(_n(x, "exp"))
    except OverflowError:
        return float("inf")


def _floor(x):
    return int(math.floor(_n(x, "floor")))


def _head(xs):
    xs = _s(xs, "head")
    if not xs:
        raise EvalError("head: empty sequence")
    return _data(xs[0], "head")


def _tail(xs):
    xs = _s(xs, "tail")
    if not xs:
        raise EvalError("tail: empty sequence")
    return _data(xs[1:], "tail")


def _get(xs, i):
    xs = _s(xs, "get")
    if type(i) is not int:
        if type(i) is float and i.is_integer():
            i = int(i)
        else:
            raise EvalError(f"get: expected an integer index, got {_show(i)}")
    if not 0 <= i < len(xs):
        raise EvalError(f"get: index {i} out of range for length {len(xs)}")
    return _data(xs[i], "get")


def _cons(x, xs):
    return _data((x,) + _s(xs, "cons"), "cons")


def _concat(xs, ys):
    return _data(_s(xs, "concat") + _s(ys, "concat"), "concat")


def _pdf(d, v):
    return math.exp(dists.log_density(d, v))


def _logpdf(d, v):
    return dists.log_density(d, v)


def _int2real(x):
    return float(_n(x, "int2real"))


# name -> (arity, implementation)
TABLE = {
    "add": (2, _add),
    "sub": (2, _sub),
    "mul": (2, _mul),
    "div": (2, _div),
    "neg": (1, lambda x: -_n(x, "neg")),
    "eq": (2, _eq),
    "neq": (2, lambda a, b: not _eq(a, b)),
    "lt": (2, _lt),
    "le": (2, _cmp("le", lambda a, b: a <= b)),
    "gt": (2, _gt),
    "ge": (2, _cmp("ge", lambda a, b: a >= b)),
    "and": (2, lambda a, b: _b(a, "and") and _b(b, "and")),
    "or": (2, lambda a, b: _b(a, "or") or _b(b, "or")),
    "not": (1, lambda a: not _b(a, "not")),
    "min": (2, _arith("min", lambda a, b: b if b < a else a)),
    "max": (2, _arith("max", lambda a, b: b if b > a else a)),
    "abs": (1, lambda x: abs(_n(x, "abs"))),
    "exp": (1, _exp),
    "log": (1, _log),
    "sqrt": (1, _sqrt),
    "pow": (2, _pow),
    "floor": (1, _floor),
    "int2real": (1, _int2real),
    "head": (1, _head),
    "tail": (1, _tail),
    "length": (1, lambda xs: len(_s(xs, "length"))),
    "get": (2, _get),
    "cons": (2, _cons),
    "concat": (2, _concat),
    "null": (1, lambda xs: len(_s(xs, "null")) == 0),
    "pdf": (2, _pdf),
    "logPdf": (2, _logpdf),
}

for _name, (_cls, _arity) in dists.CONSTRUCTORS.items():
    TABLE[_name] = (_arity, _cls)

# surface operators and the intrinsic each one denotes
BINOPS = {
    "+": "add", "-": "sub", "*": "mul", "/": "div",
    "==": "eq", "!=": "neq", "<": "lt", "<=": "le", ">": "gt", ">=": "ge",
    "&&": "and", "||": "or",
}

_PRIMS = {name: Prim(name, arity, fn) for name, (arity, fn) in TABLE.items()}


def prim(name):
    """The unapplied intrinsic called `name`."""
    return _PRIMS[name]


def is_intrinsic_name(name):
    return name in _PRIMS


def arity(c):
    """Arity of an intrinsic constant; plain data has arity 0."""
    return c.arity if type(c) is Prim else 0


def delta(c, arg):
    """Apply intrinsic `c` to one argument."""
    if type(c) is not Prim:
        raise EvalError(f"cannot apply {_show(c)}: arity 0")
    if type(arg) is Closure:
        raise EvalError(f"{c.name}: intrinsics cannot take functions as arguments")
    if c.arity == 1:
        return c.fn(*c.args, arg)
    return Prim(c.name, c.arity - 1, c.fn, c.args + (arg,))
