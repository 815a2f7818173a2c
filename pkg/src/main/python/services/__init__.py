"""Simulation services: channel, spreading, receiver, metrics and the experiment engine."""

from .emitter import emit_results, parse_results, read_results
from .simulator import build_codebook, build_setup, run_experiment, simulate_trial

__all__ = [
    "run_experiment",
    "simulate_trial",
    "build_codebook",
    "build_setup",
    "emit_results",
    "parse_results",
    "read_results",
]
