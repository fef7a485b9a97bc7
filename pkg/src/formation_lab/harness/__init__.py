"""Scenario files, experiment drivers, CSV/SVG output and the CLI."""
from .experiments import (
    BIAS_AXES,
    ComparisonRow,
    CostRelationRecord,
    ExperimentRecord,
    SweepRow,
    comparison_summary,
    run_bias_sweep,
    run_conversion,
    run_cost_comparison,
    run_cost_relations,
    run_demo,
    sample_positions,
)
from .scenario import Scenario, load_scenario, parse_scenario

__all__ = [
    "BIAS_AXES", "ComparisonRow", "CostRelationRecord", "ExperimentRecord", "SweepRow",
    "comparison_summary", "run_bias_sweep", "run_conversion", "run_cost_comparison",
    "run_cost_relations", "run_demo", "sample_positions", "Scenario", "load_scenario",
    "parse_scenario",
]
