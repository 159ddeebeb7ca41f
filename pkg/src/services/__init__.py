"""Servicios del arnés de experimentos de Config Count."""

from .acceptance_service import AcceptanceReport, AcceptanceService, CriterionResult
from .experiment_service import ExperimentService, RunOutcome
from .generators import SetGenerator, make_rng
from .run_registry_service import RunRegistryService
from .scenario import load_scenario, parse_scenario, scenario_from_dict, scenario_hash

__all__ = [
    "AcceptanceReport",
    "AcceptanceService",
    "CriterionResult",
    "ExperimentService",
    "RunOutcome",
    "SetGenerator",
    "make_rng",
    "RunRegistryService",
    "load_scenario",
    "parse_scenario",
    "scenario_from_dict",
    "scenario_hash",
]
