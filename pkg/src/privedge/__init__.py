"""Private coded edge computing: secret sharing, cyclic assignments and latency simulation."""
from .assignment import AssignmentPlan, CyclicPermutation, coverage_check, make_plan
from .baseline import BaselineConfig, baseline_total_latency, baseline_upload_latency
from .engine import run_trial, simulate
from .exceptions import EmptySpace, InfeasibleConfig, InvalidParams, PrivEdgeError
from .field import GF
from .latency import SetupTimes, SystemConfig, TrialOutcome, setup_matrix
from .optimizer import SchemeOptimizer, SearchSpace, deadline_profile, optimize
from .reed_solomon import RSCode
from .schemes import PrivateCodingScheme
from .secret_sharing import SecretSharer

__all__ = [
    "AssignmentPlan", "BaselineConfig", "CyclicPermutation", "EmptySpace", "GF",
    "InfeasibleConfig", "InvalidParams", "PrivEdgeError", "PrivateCodingScheme", "RSCode",
    "SchemeOptimizer", "SearchSpace", "SecretSharer", "SetupTimes", "SystemConfig",
    "TrialOutcome", "baseline_total_latency", "baseline_upload_latency", "coverage_check",
    "deadline_profile", "make_plan", "optimize", "run_trial", "setup_matrix", "simulate",
]
