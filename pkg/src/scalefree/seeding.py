"""Seed derivation and counter-based random draws.

Everything here is a pure function of its arguments and is built on BLAKE2b,
so results are identical on every platform and Python version.
"""

import hashlib
import math
import struct

MASK64 = (1 << 64) - 1
_TWO_53 = float(1 << 53)

def _digest64(*parts: bytes) -> int:
    h = hashlib.blake2b(digest_size=8)
    for part in parts:
        h.update(struct.pack("<I", len(part)))
        h.update(part)
    return int.from_bytes(h.digest(), "little")

def child_seed(parent_seed: int, child_index: int, type_tag: str) -> int:
    """64-bit seed of the ``child_index``-th child of type ``type_tag``."""
    return _digest64(
        b"child",
        struct.pack("<QQ", parent_seed & MASK64, child_index & MASK64),
        type_tag.encode("utf-8"),
    )

def derive(seed: int, tag: str, counter: int = 0) -> int:
    """Raw 64-bit draw keyed by ``(seed, tag, counter)``."""
    return _digest64(b"draw", struct.pack("<QQ", seed & MASK64, counter & MASK64), tag.encode("utf-8"))

def uniform(seed: int, tag: str, lo: float = 0.0, hi: float = 1.0, counter: int = 0) -> float:
    u = (derive(seed, tag, counter) >> 11) / _TWO_53
    return lo + (hi - lo) * u

def log_uniform(seed: int, tag: str, lo: float, hi: float, counter: int = 0) -> float:

    return math.exp(uniform(seed, tag, math.log(lo), math.log(hi), counter))

def randint(seed: int, tag: str, lo: int, hi: int, counter: int = 0) -> int:
    """Integer in ``[lo, hi]`` inclusive."""
    span = hi - lo + 1
    return lo + derive(seed, tag, counter) % span

def unit_vector(seed: int, tag: str) -> tuple:
    """Uniformly distributed direction on the unit sphere."""

    z = uniform(seed, tag, -1.0, 1.0, 0)
    phi = uniform(seed, tag, 0.0, 2.0 * math.pi, 1)
    r = math.sqrt(max(0.0, 1.0 - z * z))
    return (r * math.cos(phi), z, r * math.sin(phi))

def permutation(seed: int, tag: str, n: int) -> list:
    """Fisher-Yates shuffle of ``range(n)`` driven by counter draws."""
    perm = list(range(n))
    for i in range(n - 1, 0, -1):
        j = derive(seed, tag, i) % (i + 1)
        perm[i], perm[j] = perm[j], perm[i]
    return perm
