"""Scenario catalog, runner and comparison statistics."""

from .catalog import CATALOG, Scenario
from .runner import RunSettings, StatEntry, TestReport, UnknownScenario, run_scenario, run_suite

__all__ = ["CATALOG", "Scenario", "RunSettings", "StatEntry", "TestReport", "UnknownScenario",
           "run_scenario", "run_suite"]
