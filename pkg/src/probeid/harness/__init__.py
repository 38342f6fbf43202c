"""Run configuration, the robustness experiment and the command-line surface."""
from .config import ConfigError, RunConfig, load_config, parse_config
from .robustness import RobustnessCell, RobustnessSummary, run_robustness

__all__ = ["ConfigError", "RunConfig", "load_config", "parse_config", "RobustnessCell", "RobustnessSummary", "run_robustness"]
