"""Command-line entry point: `alignppl <subcommand> ...`."""

import argparse
import json
import os
import sys

import numpy as np

from . import models
from .analysis import analyze_align, generate_constraints
from .bench import BenchSpec, bench, report_csv
from .inference import InferenceError, InvariantViolation, run_mcmc, run_smc
from .oracle import EnumerationError, check_alignment_empirically, enumerate_posterior
from .parser import ParseError
from .transform import ScopeError, compile_source
from .values import EvalError, to_json

DEFAULT_SEED = 1
SCHEMA_VERSION = 1

EXIT_OK, EXIT_USAGE, EXIT_RUNTIME, EXIT_INVARIANT = 0, 1, 2, 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _default_seed():
    env = os.environ.get("ALIGNPPL_SEED")
    if env is None or env == "":
        return DEFAULT_SEED
    try:
        return int(env)
    except ValueError:
        raise UsageError(f"ALIGNPPL_SEED must be an integer, got {env!r}") from None


def _positive(kind):
    def parse(s):
        try:
            v = kind(s)
        except ValueError:
            raise argparse.ArgumentTypeError(f"invalid value {s!r}") from None
        if not v > 0:
            raise argparse.ArgumentTypeError(f"must be > 0, got {s}")
        return v
    return parse


def _fraction(s):
    try:
        v = float(s)
    except ValueError:
        raise argparse.ArgumentTypeError(f"invalid value {s!r}") from None
    if not 0.0 <= v < 1.0:
        raise argparse.ArgumentTypeError(f"must be in [0, 1), got {s}")
    return v


def build_parser():
    p = _Parser(prog="alignppl", description="Alignment analysis and aligned inference.")
    sub = p.add_subparsers(dest="command", metavar="COMMAND")
    sub.required = True

    def common(sp, method=True):
        sp.add_argument("--model", required=True,
                        help="corpus id or path to a source file")
        sp.add_argument("--seed", type=int, default=None)
        sp.add_argument("--out", help="write output here instead of stdout")
        sp.add_argument("--format", choices=("json", "csv"), default=None)
        if method:
            g = sp.add_mutually_exclusive_group()
            g.add_argument("--aligned", dest="aligned", action="store_true", default=True)
            g.add_argument("--unaligned", dest="aligned", action="store_false")

    a = sub.add_parser("analyze", help="run the alignment analysis")
    common(a, method=False)
    a.add_argument("--dump-constraints", action="store_true")
    a.add_argument("--order", choices=("lifo", "fifo"), default="lifo")

    s = sub.add_parser("smc", help="aligned or unaligned SMC")
    common(s)
    s.add_argument("-n", "--particles", type=_positive(int), default=1000)
    s.add_argument("--threads", type=_positive(int), default=1)

    m = sub.add_parser("mcmc", help="aligned or standard lightweight MCMC")
    common(m)
    m.add_argument("--steps", type=_positive(int), default=10000)
    m.add_argument("--g", type=float, default=0.1)
    m.add_argument("--burn", type=_fraction, default=0.1)

    c = sub.add_parser("check-align", help="empirical alignment check")
    common(c, method=False)
    c.add_argument("--runs", type=int, default=1000)
    c.add_argument("--names", help="comma-separated names (default: the aligned set)")

    o = sub.add_parser("oracle", help="exact posterior by enumeration")
    common(o, method=False)
    o.add_argument("--max-trace-len", type=_positive(int), default=64)
    o.add_argument("--truncate", action="store_true",
                   help="drop paths longer than --max-trace-len and report their mass")

    b = sub.add_parser("bench", help="repeated timing of both variants")
    common(b, method=False)
    b.add_argument("--kind", choices=("smc", "mcmc"), default="smc")
    b.add_argument("--reps", type=_positive(int), default=10)
    b.add_argument("--warmup", type=int, default=1)
    b.add_argument("-n", "--particles", type=_positive(int), default=1000)
    b.add_argument("--steps", type=_positive(int), default=10000)
    b.add_argument("--g", type=float, default=0.1)
    b.add_argument("--burn", type=_fraction, default=0.1)
    b.add_argument("--threads", type=_positive(int), default=1)
    return p


def load_model(name):
    """Compile a corpus id or a source file path."""
    if name in models.ids():
        return models.term(name)
    if os.path.exists(name):
        with open(name, encoding="utf-8") as fh:
            return compile_source(fh.read())
    raise UsageError(f"unknown model {name!r}: not a corpus id ({', '.join(models.ids())}) "
                     "or an existing file")


# ---------------------------------------------------------------- output

def _json(obj):
    return json.dumps(obj, indent=2, ensure_ascii=False, allow_nan=False) + "\n"


def _numeric(v):
    return isinstance(v, float) or (isinstance(v, int) and not isinstance(v, bool))


def _hist_rows(values, weights, bins=30):
    """(component, lo, hi, mass) rows; categorical values use lo = hi = value.

    Tuples of numbers get one histogram per component; real-valued samples
    are binned; anything else is counted per distinct value.
    """
    if values and all(isinstance(v, tuple) and v and all(_numeric(x) for x in v)
                      for v in values):
        width = len(values[0])
        if all(len(v) == width for v in values):
            rows = []
            for k in range(width):
                rows += [(k,) + r[1:] for r in _hist_rows([v[k] for v in values], weights, bins)]
            return rows
    if values and all(_numeric(v) for v in values) and any(isinstance(v, float) for v in values):
        counts, edges = np.histogram(np.asarray(values, dtype=float), bins=bins, weights=weights)
        return [(0, float(edges[i]), float(edges[i + 1]), float(counts[i]))
                for i in range(len(counts))]
    mass, order = {}, {}
    for v, w in zip(values, weights):
        key = json.dumps(to_json(v), sort_keys=True)
        mass[key] = mass.get(key, 0.0) + float(w)
        order[key] = (0, v, "") if _numeric(v) else (1, 0, key)
    return [(0, k, k, mass[k]) for k in sorted(mass, key=order.__getitem__)]


def histogram_csv(out, bins=30):
    """Plot-ready histogram of the (weighted) samples."""
    rows = _hist_rows(list(out.samples), out.normalized_weights(), bins)
    lines = ["component,lo,hi,mass"]
    for comp, lo, hi, mass in rows:
        lines.append(",".join(_csv(x) for x in (comp, lo, hi, mass)))
    return "\n".join(lines) + "\n"


def _csv(x):
    if isinstance(x, float):
        return repr(x)
    s = str(x)
    if "," in s or '"' in s:
        s = '"' + s.replace('"', '""') + '"'
    return s


def _emit(text, args):
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _inference_json(out):
    obj = {"schemaVersion": SCHEMA_VERSION}
    obj.update(out.to_json())
    return obj


# ---------------------------------------------------------------- commands

def _cmd_analyze(args, seed):
    t = load_model(args.model)
    res = analyze_align(t, order=args.order)
    if args.format == "json":
        obj = {"schemaVersion": SCHEMA_VERSION, "model": args.model,
               "aligned": sorted(res.aligned), "unaligned": sorted(res.unaligned),
               "names": res.to_json()}
        if args.dump_constraints:
            obj["constraints"] = [str(c) for c in generate_constraints(t)]
        return _json(obj), EXIT_OK
    if args.format == "csv":
        raise UsageError("analyze supports --format json or the default table")
    text = res.table() + "\n"
    if args.dump_constraints:
        text += "\nconstraints:\n" + "".join(f"  {c}\n" for c in generate_constraints(t))
    return text, EXIT_OK


def _cmd_smc(args, seed):
    t = load_model(args.model)
    if args.particles < 2:
        raise UsageError("SMC needs at least 2 particles")
    out = run_smc(t, args.particles, seed, aligned=args.aligned, threads=args.threads)
    if args.format == "csv":
        return histogram_csv(out), EXIT_OK
    return _json(_inference_json(out)), EXIT_OK


def _cmd_mcmc(args, seed):
    t = load_model(args.model)
    if not args.g > 0 or args.g > 1:
        raise UsageError("--g must be in (0, 1]")
    out = run_mcmc(t, args.steps, seed, args.g, args.burn, aligned=args.aligned)
    if args.format == "csv":
        return histogram_csv(out), EXIT_OK
    return _json(_inference_json(out)), EXIT_OK


def _cmd_check_align(args, seed):
    if args.runs < 2:
        raise UsageError("--runs must be at least 2")
    t = load_model(args.model)
    names = None
    if args.names is not None:
        names = [n for n in (x.strip() for x in args.names.split(",")) if n]
    rep = check_alignment_empirically(t, names, args.runs, seed, program_id=args.model)
    obj = {"schemaVersion": SCHEMA_VERSION, "seed": seed}
    obj.update(rep.to_json())
    return _json(obj), EXIT_OK if rep.consistent else EXIT_INVARIANT


def _cmd_oracle(args, seed):
    t = load_model(args.model)
    post = enumerate_posterior(t, args.max_trace_len, truncate=args.truncate)
    if args.format == "csv":
        lines = ["value,probability"]
        for item in post.to_json()["posterior"]:
            lines.append(f"{_csv(json.dumps(item['value']))},{item['probability']!r}")
        return "\n".join(lines) + "\n", EXIT_OK
    obj = {"schemaVersion": SCHEMA_VERSION, "model": args.model}
    obj.update(post.to_json())
    return _json(obj), EXIT_OK


def _cmd_bench(args, seed):
    t = load_model(args.model)
    spec = BenchSpec(term=t, model=args.model, kind=args.kind, reps=args.reps,
                     warmup=args.warmup, particles=args.particles, steps=args.steps,
                     g=args.g, burn=args.burn, seed=seed, threads=args.threads)
    rep = bench(spec)
    if args.format == "csv":
        return report_csv(rep), EXIT_OK
    obj = {"schemaVersion": SCHEMA_VERSION}
    obj.update(rep)
    return _json(obj), EXIT_OK


_COMMANDS = {"analyze": _cmd_analyze, "smc": _cmd_smc, "mcmc": _cmd_mcmc,
             "check-align": _cmd_check_align, "oracle": _cmd_oracle, "bench": _cmd_bench}


def main(argv=None):
    """Run the CLI; returns the exit code."""
    try:
        args = build_parser().parse_args(argv)
        seed = args.seed if args.seed is not None else _default_seed()
        text, code = _COMMANDS[args.command](args, seed)
    except UsageError as e:
        sys.stderr.write(f"alignppl: usage error: {e}\n")
        return EXIT_USAGE
    except InvariantViolation as e:
        sys.stderr.write(f"alignppl: invariant violation: {e}\n")
        return EXIT_INVARIANT
    except (ParseError, ScopeError, EvalError, InferenceError, EnumerationError,
            ValueError, OSError) as e:
        sys.stderr.write(f"alignppl: error: {e}\n")
        return EXIT_RUNTIME
    except RecursionError:
        sys.stderr.write("alignppl: error: recursion limit exceeded\n")
        return EXIT_RUNTIME
    try:
        _emit(text, args)
    except OSError as e:
        sys.stderr.write(f"alignppl: error: {e}\n")
        return EXIT_RUNTIME
    return code


def _entry():
    sys.exit(main())


if __name__ == "__main__":
    _entry()
