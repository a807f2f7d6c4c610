"""hydresim: coupled flow / geomechanics / porosity simulation of
methane-hydrate-bearing porous media."""

__version__ = "0.1.0"

from .grid import StructuredGrid, build_grid
from .state import SimulationState, partition_state, assemble_state
from .materials import MaterialParameters

__all__ = [
    "StructuredGrid", "build_grid",
    "SimulationState", "partition_state", "assemble_state",
    "MaterialParameters",
    "__version__",
]
