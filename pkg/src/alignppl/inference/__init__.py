"""Inference: aligned/unaligned SMC and aligned/standard lightweight MCMC."""

from .common import (InferenceError, InferenceOutput, InvariantViolation,
                     acceptance_ratio, log_mean_exp, log_z_from_generations,
                     resample)
from .mcmc import run_aligned_lightweight_mcmc, run_lightweight_mcmc, run_mcmc
from .smc import run_aligned_smc, run_smc, run_unaligned_smc

__all__ = ["InferenceError", "InferenceOutput", "InvariantViolation",
           "acceptance_ratio", "log_mean_exp", "log_z_from_generations", "resample",
           "run_aligned_lightweight_mcmc", "run_lightweight_mcmc", "run_mcmc",
           "run_aligned_smc", "run_smc", "run_unaligned_smc"]
