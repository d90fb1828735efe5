"""Alignment analysis: a 0-CFA with stochastic values and unalignment flags."""

from .constraints import (STOCH, AbsConst, AbsLam, AbsRecord, AbsSeq, AbsVariant,
                          generate_constraints, match_stochastic)
from .solver import (AnalysisResult, Solver, analyze_align, binder_names,
                     check_minimal, let_names, solve, validate)

__all__ = ["STOCH", "AbsConst", "AbsLam", "AbsRecord", "AbsSeq", "AbsVariant",
           "generate_constraints", "match_stochastic", "AnalysisResult", "Solver",
           "analyze_align", "binder_names", "check_minimal", "let_names", "solve",
           "validate"]
