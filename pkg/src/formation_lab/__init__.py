"""Optimal robot-to-slot assignment, polar-partition formation control and a
lower bound on the formation bias under quantized noisy ranging."""
from .assignment import assign_with_center, assign_with_leader, hungarian, hungarian_solve
from .bounds import BoundParams, bayes_lower_bound
from .core import Assignment, Formation, RngStream, SimConfig, Vec2
from .formations import FormationSpec, Shape, leading_slot, optimal_center
from .motion import convert_formation, run_to_formation
from .sensing import QuantizerSpec, SensorModel

__version__ = "0.1.0"
