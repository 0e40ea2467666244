"""Completion-time scheduling for D2D-aided fog radio access networks with
instantly decodable network coding."""

from .model import NetworkInstance, ScenarioConfig, SideState, fixed_instance, generate_scenario
from .schedulers import SCHEMES, check_decision, make_scheduler
from .sim import EpisodeResult, Summary, monte_carlo, run_episode

__all__ = [
    "NetworkInstance", "ScenarioConfig", "SideState", "fixed_instance", "generate_scenario",
    "SCHEMES", "check_decision", "make_scheduler",
    "EpisodeResult", "Summary", "monte_carlo", "run_episode",
]
