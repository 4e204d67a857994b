"""Scale-free hierarchical worlds: nested frames, orbits, horizon transfers,
procedural generation and an atmosphere model."""

from .scene import Node, attach, detach, scene_from_json, scene_to_json
from .transform import Placement, TransformChain, hierarchical_matrix, local_world_matrix

__version__ = "0.1.0"

__all__ = [
    "Node", "attach", "detach", "scene_from_json", "scene_to_json",
    "Placement", "TransformChain", "hierarchical_matrix", "local_world_matrix",
]
