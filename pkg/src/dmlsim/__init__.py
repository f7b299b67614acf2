"""Monte Carlo lab contrasting ML forecasting with causal inference for planning."""

from .config import load_preset, parse_config, serialize_config
from .dgp import ScenarioConfig, SimDataset, generate, paper_scenario, with_overrides
from .montecarlo import AggregateReport, run_study

__all__ = [
    "AggregateReport",
    "ScenarioConfig",
    "SimDataset",
    "generate",
    "load_preset",
    "paper_scenario",
    "parse_config",
    "run_study",
    "serialize_config",
    "with_overrides",
]

__version__ = "0.1.0"
