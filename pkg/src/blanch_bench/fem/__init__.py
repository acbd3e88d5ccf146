"""Plane-strain contact model of a layered fingertip section."""

from .assembly import StiffnessSystem, assemble_system
from .contact import (
    ConvergenceError,
    IndentationSolution,
    PressureSummary,
    SolveConfig,
    contact_pressure_summary,
    pressure_from_reaction,
    solve_indentation,
)
from .geometry import FingerSectionGeometry, IndenterSpec, protocol_conditions
from .grid import VmGrid, interpolate_nodal, resample_vm_grid
from .materials import Material, MaterialTable
from .mesh import Mesh, build_finger_mesh
from .stress import StressField, recover_stress_field, von_mises

__all__ = [
    "ConvergenceError",
    "FingerSectionGeometry",
    "IndentationSolution",
    "IndenterSpec",
    "Material",
    "MaterialTable",
    "Mesh",
    "PressureSummary",
    "SolveConfig",
    "StiffnessSystem",
    "StressField",
    "VmGrid",
    "assemble_system",
    "build_finger_mesh",
    "contact_pressure_summary",
    "interpolate_nodal",
    "protocol_conditions",
    "pressure_from_reaction",
    "recover_stress_field",
    "resample_vm_grid",
    "solve_indentation",
    "von_mises",
]
