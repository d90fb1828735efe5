"""alignppl: static alignment analysis for a small probabilistic language, with
aligned sequential Monte Carlo and aligned lightweight MCMC."""

from .analysis import analyze_align, generate_constraints, solve
from .inference import (run_aligned_lightweight_mcmc, run_aligned_smc, run_lightweight_mcmc,
                        run_mcmc, run_smc, run_unaligned_smc)
from .parser import parse
from .semantics import eval_replay, eval_sample
from .transform import compile_source, letrec_desugar, to_anf, uniquify

__version__ = "0.1.0"

__all__ = ["parse", "uniquify", "letrec_desugar", "to_anf", "compile_source",
           "eval_replay", "eval_sample", "analyze_align", "generate_constraints", "solve",
           "run_aligned_smc", "run_unaligned_smc", "run_aligned_lightweight_mcmc",
           "run_lightweight_mcmc", "run_smc", "run_mcmc"]
