"""Simulation and exact analysis of QAM(2QCFA) proof systems."""
from .engine import (IterationOutcome, analyze_exact, build_config_graph, expected_runtime, monte_carlo,
                     overall_acceptance, overall_rejection, solve_absorption)
from .languages import PROTOCOLS, reference_decider
from .machine import VerifierSpec, dump_machine, initial_config, load_machine, step, validate_spec
from .protocols import ProtocolParams, build_verifier
from .prover import enumerate_adversaries, honest_prover

__version__ = "0.1.0"

__all__ = [
    "IterationOutcome", "analyze_exact", "build_config_graph", "expected_runtime", "monte_carlo",
    "overall_acceptance", "overall_rejection", "solve_absorption", "PROTOCOLS", "reference_decider",
    "VerifierSpec", "dump_machine", "initial_config", "load_machine", "step", "validate_spec",
    "ProtocolParams", "build_verifier", "enumerate_adversaries", "honest_prover",
]
