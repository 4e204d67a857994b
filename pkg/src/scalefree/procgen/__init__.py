"""Operation-based procedural mesh generation."""

from .mesh import TriangleMesh, emit_mesh, write_obj
from .ops import REGISTRY, inset_polygon
from .primitives import Path, Point, Surface, store_from_json, store_to_json
from .program import load_program, parse_program, run_program

__all__ = [
    "REGISTRY", "Path", "Point", "Surface", "TriangleMesh", "emit_mesh", "inset_polygon",
    "load_program", "parse_program", "run_program", "store_from_json", "store_to_json", "write_obj",
]
