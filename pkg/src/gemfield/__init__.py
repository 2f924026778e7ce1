"""2D TE Maxwell solver with a Yee FDTD reference and a graph message-passing backend."""

from .analysis import compare, compute_sar
from .errors import DivergenceError, ScenarioError, ScenarioSemanticError, ScenarioSyntaxError
from .fdtd import FieldState, run
from .gem import HiddenState, gem_step, run_gem
from .graph import FieldGraph, FieldKind, build_graph, node_index, validate_graph
from .grid import Material, MaterialGrid, ScenarioSpec, ShapeSpec, compute_coefficients, rasterize
from .pml import PmlSpec
from .scenario_io import (format_scenario, generate_random_scenario, load_scenario, parse_scenario,
                          scenario_hash)
from .simulation import prepare
from .sources import SourceSpec

__version__ = "0.1.0"

__all__ = [
    "DivergenceError", "FieldGraph", "FieldKind", "FieldState", "HiddenState", "Material",
    "MaterialGrid", "PmlSpec", "ScenarioError", "ScenarioSemanticError", "ScenarioSpec",
    "ScenarioSyntaxError", "ShapeSpec", "SourceSpec", "build_graph", "compare", "compute_coefficients",
    "compute_sar", "format_scenario", "gem_step", "generate_random_scenario", "load_scenario", "node_index", "parse_scenario", "prepare",
    "rasterize", "run", "run_gem", "scenario_hash", "validate_graph",
]
