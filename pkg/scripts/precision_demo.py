"""Relative transforms vs naive single-precision world coordinates.

Generates a full-depth world and, for camera / surface pairs, reports the
separation computed by local_world_matrix and by chaining float32 world
matrices from the root.

    python scripts/precision_demo.py --seed 42 --pairs 10
"""

import argparse

import numpy as np

from scalefree.transform import local_world_matrix, quaternion_matrix3
from scalefree.universe import generate_tree


def world32(node):
    """Row-vector node -> world-meters matrix, every product in float32."""
    m = np.eye(4, dtype=np.float32)
    n = node
    while n.parent is not None:
        h = np.eye(4, dtype=np.float32)
        r = np.float32(n.absolute_size) / np.float32(n.parent.absolute_size)
        h[:3, :3] = (n.scale[:, None] * quaternion_matrix3(n.rotation)).astype(np.float32) * r
        h[3, :3] = n.position.astype(np.float32)
        m = m @ h
        n = n.parent
    return m @ np.diag([n.absolute_size] * 3 + [1.0]).astype(np.float32)


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--seed", type=int, default=42)
    ap.add_argument("--pairs", type=int, default=10)
    args = ap.parse_args()

    world = generate_tree(args.seed, 8)
    cams = [n for n in world.walk() if n.type_name == "camera"]
    print(f"{len(list(world.walk()))} nodes, {len(cams)} cameras")
    print(f"{'pair':<34}{'float64 LW [m]':>18}{'float32 chain [m]':>20}")
    for cam in cams[: args.pairs]:
        for other in (cam.parent, cam.parent.parent):
            m = local_world_matrix(cam, other)
            sep = float(np.linalg.norm(m[3, :3])) * cam.absolute_size
            naive = float(np.linalg.norm(world32(other)[3, :3] - world32(cam)[3, :3]))
            print(f"{cam.type_name}#{cam.id % 10000:<5} -> {other.type_name:<20}{sep:>18.6g}{naive:>20.6g}")


if __name__ == "__main__":
    main()
