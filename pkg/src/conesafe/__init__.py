"""conesafe: actuated automata, backward inference cones and statistical safety demonstrations."""

from __future__ import annotations

from .automaton import Automaton, Frame, Step, Walk, make_consistent_step, transit, walk
from .demonstration import SafetyConstraint, bind_profile_to_edge, run_demonstration
from .ensemble import Basis, Choice, Ensemble
from .errors import ConesafeError
from .inference import StoppingRule, build_cone, check_complete, check_independent, converse, edge, to_test
from .model import Model, bundled_model_path, load_model
from .profile import StepPredicate, UsagePattern, counting_norm, estimate_relative_profile, simulate_orbit
from .risk import indifference_proportion, power_function

__version__ = "0.1.0"

__all__ = [
    "Automaton", "Basis", "Choice", "ConesafeError", "Ensemble", "Frame", "Model", "SafetyConstraint",
    "Step", "StepPredicate", "StoppingRule", "UsagePattern", "Walk", "bind_profile_to_edge",
    "build_cone", "bundled_model_path", "check_complete", "check_independent", "converse",
    "counting_norm", "edge", "estimate_relative_profile", "indifference_proportion",
    "load_model", "make_consistent_step", "power_function", "run_demonstration",
    "simulate_orbit", "to_test", "transit", "walk",
]
