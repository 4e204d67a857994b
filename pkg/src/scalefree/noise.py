"""Seeded 3D gradient noise and fractal sums.

Improved-Perlin style lattice noise with a per-seed permutation table. All
arithmetic is elementwise IEEE float64 (no transcendental functions), so the
output is bit-reproducible across platforms.
"""

from __future__ import annotations

from functools import lru_cache

import numpy as np

from .seeding import permutation

# 12 cube-edge gradients, padded to 16 by repetition.
_GRAD = np.array(
    [
        [1, 1, 0], [-1, 1, 0], [1, -1, 0], [-1, -1, 0],
        [1, 0, 1], [-1, 0, 1], [1, 0, -1], [-1, 0, -1],
        [0, 1, 1], [0, -1, 1], [0, 1, -1], [0, -1, -1],
        [1, 1, 0], [0, -1, 1], [-1, 1, 0], [0, -1, -1],
    ],
    dtype=np.float64,
)

# Upper bound on |gradient_noise| used to map raw noise into [-1, 1]; a
# little above the largest value found by dense search (see tests).
NOISE_BOUND = 1.04


@lru_cache(maxsize=64)
def _perm_table(seed: int) -> np.ndarray:
    p = np.array(permutation(seed, "noise-perm", 256), dtype=np.int64)
    return np.concatenate([p, p])


def _fade(t):
    return t * t * t * (t * (t * 6.0 - 15.0) + 10.0)


def _lerp(a, b, t):
    return a + t * (b - a)


def gradient_noise(seed: int, x, y, z) -> np.ndarray:
    """Raw lattice gradient noise; zero at integer lattice points."""
    perm = _perm_table(seed & ((1 << 64) - 1))
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    z = np.asarray(z, dtype=np.float64)
    xf, yf, zf = np.floor(x), np.floor(y), np.floor(z)
    xi = xf.astype(np.int64) & 255
    yi = yf.astype(np.int64) & 255
    zi = zf.astype(np.int64) & 255
    x, y, z = x - xf, y - yf, z - zf
    u, v, w = _fade(x), _fade(y), _fade(z)

    def corner(dx, dy, dz):
        h = perm[perm[perm[xi + dx] + yi + dy] + zi + dz] & 15
        g = _GRAD[h]
        return g[..., 0] * (x - dx) + g[..., 1] * (y - dy) + g[..., 2] * (z - dz)

    x00 = _lerp(corner(0, 0, 0), corner(1, 0, 0), u)
    x10 = _lerp(corner(0, 1, 0), corner(1, 1, 0), u)
    x01 = _lerp(corner(0, 0, 1), corner(1, 0, 1), u)
    x11 = _lerp(corner(0, 1, 1), corner(1, 1, 1), u)
    return _lerp(_lerp(x00, x10, v), _lerp(x01, x11, v), w)


def fbm(seed: int, points, octaves: int = 5, lacunarity: float = 2.0, gain: float = 0.5, frequency: float = 1.0):
    """Normalised fractal sum of ``octaves`` noise layers, in ``[-1, 1]``.

    ``points`` has shape ``(..., 3)``. Each octave uses its own permutation
    (seed offset by the octave index) to avoid lattice alignment artefacts.
    """
    if octaves < 1:
        raise ValueError("octaves must be >= 1")
    p = np.asarray(points, dtype=np.float64)
    total = np.zeros(p.shape[:-1])
    amp, norm, f = 1.0, 0.0, frequency
    for k in range(octaves):
        total = total + amp * gradient_noise(seed + k, p[..., 0] * f, p[..., 1] * f, p[..., 2] * f)
        norm += amp
        amp *= gain
        f *= lacunarity
    return np.clip(total / (norm * NOISE_BOUND), -1.0, 1.0)
