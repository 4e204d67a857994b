"""Frame-of-reference transfer between nodes.

A transferable node is tested, by its origin point, against the bounds of
its siblings and of its parent. Entering a sibling's bounds moves it under
that sibling; leaving the parent's bounds moves it up to the grandparent.
Its kinematic state is re-expressed in the new frame so that position and
velocity measured in meters in the world frame do not change.

Frames are treated as instantaneously static: a node captured by an orbiting
planet keeps its world velocity, it does not inherit the planet's motion.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import StructureError
from .orbit import apply_orbits
from .scene import Node, attach, contains_point, detach
from .transform import (
    axis_angle_quaternion,
    local_world_matrix,
    matrix3_quaternion,
    normalize_quaternion,
    quaternion_matrix3,
    relative_rotation,
    transform_point,
    transform_vector,
)


@dataclass(frozen=True)
class KinematicState:
    position: np.ndarray
    rotation: np.ndarray
    velocity: np.ndarray
    angular_velocity: np.ndarray

    @classmethod
    def of(cls, node: Node) -> "KinematicState":
        return cls(node.position.copy(), node.rotation.copy(), node.velocity.copy(), node.angular_velocity.copy())


@dataclass(frozen=True)
class TransferEvent:
    node_id: int
    old_parent: int
    new_parent: int
    kind: str = "transfer"  # or "warning" when a node escapes its world

    def line(self) -> str:
        return f"{self.kind} {self.node_id} {self.old_parent} {self.new_parent}"


def reexpress_state(state: KinematicState, from_node: Node, to_node: Node) -> KinematicState:
    """Express a state given in ``from_node``'s frame in ``to_node``'s frame."""
    if from_node is to_node:
        return state
    m = local_world_matrix(to_node, from_node)
    rel = relative_rotation(to_node, from_node)
    rot = matrix3_quaternion(quaternion_matrix3(state.rotation) @ rel)
    return KinematicState(
        position=transform_point(state.position, m),
        rotation=rot,
        velocity=transform_vector(state.velocity, m),
        angular_velocity=np.asarray(state.angular_velocity, dtype=np.float64) @ rel,
    )


def _point_in(node_frame: Node, parent: Node, p) -> bool:
    """Is point ``p`` (in ``parent`` units) inside ``node_frame``'s bounds?"""
    if node_frame.bounds is None:
        return False
    q = transform_point(p, local_world_matrix(node_frame, parent))
    return contains_point(node_frame.bounds, q)


def _move(node: Node, new_parent: Node) -> None:
    old = node.parent
    st = reexpress_state(KinematicState.of(node), old, new_parent)
    detach(node)
    attach(new_parent, node)
    node.position = st.position
    node.rotation = st.rotation
    node.velocity = st.velocity
    node.angular_velocity = st.angular_velocity


def horizon_step(world: Node, transferable=None) -> list:
    """One transfer pass; at most one move per node, events ordered by node id."""
    if world.parent is not None:
        raise StructureError(f"{world!r} is not a world node")
    if transferable is None:
        transferable = [n for n in world.walk() if n.transferable]
    events = []
    for node in sorted(transferable, key=lambda n: n.id):
        parent = node.parent
        if parent is None:
            continue
        if node.world is not world:
            raise StructureError(f"{node!r} does not belong to {world!r}")
        captor = None
        for sib in sorted(parent.children, key=lambda n: n.id):
            if sib is not node and _point_in(sib, parent, node.position):
                captor = sib
                break
        if captor is not None:
            _move(node, captor)
            events.append(TransferEvent(node.id, parent.id, captor.id))
        elif not contains_point(parent.bounds, node.position):
            if parent.parent is None:
                events.append(TransferEvent(node.id, parent.id, parent.id, kind="warning"))
                continue
            grand = parent.parent
            _move(node, grand)
            events.append(TransferEvent(node.id, parent.id, grand.id))
    return events


def integrate_motion(world: Node, dt: float) -> None:
    """Advance free (non-orbiting) nodes by their velocity and spin."""
    for node in world.walk():
        if node.parent is None or node.component("orbit") is not None:
            continue
        if np.any(node.velocity):
            node.position = node.position + node.velocity * dt
        w = float(np.linalg.norm(node.angular_velocity))
        if w > 0.0:
            dq = axis_angle_quaternion(node.angular_velocity / w, w * dt)
            m = quaternion_matrix3(node.rotation) @ quaternion_matrix3(dq)
            node.rotation = normalize_quaternion(matrix3_quaternion(m))


def simulate(world: Node, steps: int, dt: float, t0: float = 0.0) -> list:
    """Run ``steps`` ticks of orbit update, free motion and horizon transfer.

    Returns ``(step, TransferEvent)`` pairs; ``step`` counts from 1.
    """
    if steps < 0 or not math.isfinite(dt):
        raise ValueError("steps must be >= 0 and dt finite")
    log = []
    for k in range(1, steps + 1):
        t = t0 + k * dt
        apply_orbits(world, t)
        integrate_motion(world, dt)
        log.extend((k, ev) for ev in horizon_step(world))
    return log
