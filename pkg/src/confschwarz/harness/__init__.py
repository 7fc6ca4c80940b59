"""Scenario loading, the check registry, report emission and the CLI."""

from .checks import REGISTRY, CheckSpec, Context
from .cli import main
from .report import CheckRecord, Report, emit_report, render, run_checks
from .scenario import Scenario, ScenarioError, load_scenario, parse_scenario

__all__ = ["REGISTRY", "CheckSpec", "Context", "main", "CheckRecord", "Report", "emit_report",
           "render", "run_checks", "Scenario", "ScenarioError", "load_scenario", "parse_scenario"]
