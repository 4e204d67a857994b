"""Keplerian orbit component.

The mean rate, the corrected-anomaly loop and the position update follow the
engine's published formulas literally, including their non-textbook parts:
the rate multiplies the two masses, and the anomaly iteration is
``E <- e*sin(E) - t_hat`` starting from ``E = t_hat``.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ComponentError, DomainError, NonConvergenceError

G_SI = 6.674e-11
ANOMALY_EPSILON = 0.001
ANOMALY_MAX_ITER = 64
TWO_PI = 2.0 * math.pi


def mean_orbital_rate(G: float, m_node: float, m_parent: float, a: float) -> float:
    """``sqrt(G * m_node * m_parent / a**3)``."""
    for name, v in (("G", G), ("m_node", m_node), ("m_parent", m_parent), ("a", a)):
        if not (v > 0.0 and math.isfinite(v)):
            raise DomainError(f"{name} must be finite and > 0, got {v!r}")
    return math.sqrt(G * m_node * m_parent / a**3)


def solve_corrected_anomaly(
    e: float, t_hat: float, epsilon: float = ANOMALY_EPSILON, max_iter: int = ANOMALY_MAX_ITER
) -> float:
    D = 1.0
    E = t_hat
    n = 0
    while D > epsilon:
        if n >= max_iter:
            raise NonConvergenceError(e, t_hat, E, D, n)
        E_next = e * math.sin(E) - t_hat
        D = abs(E_next - E)
        E = E_next
        n += 1
    return E


def orbital_phase(t: float, rate: float) -> float:
    """``mod(t * rate, 2*pi) - pi``, always in ``[-pi, pi)``."""
    phase = math.fmod(t * rate, TWO_PI)
    if phase < 0.0:
        phase += TWO_PI
    if phase >= TWO_PI:  # fmod(-tiny) + 2pi can round up to 2pi
        phase = 0.0
    return phase - math.pi


def _sign(x: float) -> float:
    return (x > 0.0) - (x < 0.0)


def _rot_y(angle: float) -> np.ndarray:
    c, s = math.cos(angle), math.sin(angle)
    return np.array([[c, 0.0, s], [0.0, 1.0, 0.0], [-s, 0.0, c]])


def _rot_x(angle: float) -> np.ndarray:
    c, s = math.cos(angle), math.sin(angle)
    return np.array([[1.0, 0.0, 0.0], [0.0, c, -s], [0.0, s, c]])


def orbit_rotation(p: float, i: float, l: float) -> np.ndarray:
    """Periapsis about Y, then inclination about X, then ascending longitude about Y."""
    return _rot_y(p) @ _rot_x(i) @ _rot_y(l)


@dataclass
class OrbitParams:
    a: float
    b: float
    e: float
    p: float = 0.0
    i: float = 0.0
    l: float = 0.0
    m_node: float = 1.0
    m_parent: float = 1.0
    G: float = G_SI
    epsilon: float = ANOMALY_EPSILON
    v_orbital: float = field(init=False)

    def __post_init__(self):
        if not (0.0 <= self.e < 1.0):
            raise DomainError(f"eccentricity must lie in [0, 1), got {self.e!r}")
        if not (self.b > 0.0 and self.a >= self.b):
            raise DomainError(f"need a >= b > 0, got a={self.a!r}, b={self.b!r}")
        self.v_orbital = mean_orbital_rate(self.G, self.m_node, self.m_parent, self.a)

    @classmethod
    def from_elements(cls, a: float, e: float, **kw) -> "OrbitParams":
        """Derive ``b = a * sqrt(1 - e**2)``."""
        if not (0.0 <= e < 1.0):
            raise DomainError(f"eccentricity must lie in [0, 1), got {e!r}")
        return cls(a=a, b=a * math.sqrt(1.0 - e * e), e=e, **kw)

    @property
    def period(self) -> float:
        return TWO_PI / self.v_orbital

    def to_json(self) -> dict:
        return {
            "a": self.a, "b": self.b, "e": self.e, "p": self.p, "i": self.i, "l": self.l,
            "m_node": self.m_node, "m_parent": self.m_parent, "G": self.G, "epsilon": self.epsilon,
        }

    @classmethod
    def from_json(cls, d: dict) -> "OrbitParams":
        d = dict(d)
        unknown = set(d) - {"a", "b", "e", "p", "i", "l", "m_node", "m_parent", "G", "epsilon"}
        if unknown:
            raise ValueError(f"unknown orbit parameter(s): {sorted(unknown)}")
        kw = {k: float(v) for k, v in d.items() if k not in ("a", "b", "e")}
        a, e = float(d["a"]), float(d["e"])
        if d.get("b") is None:
            return cls.from_elements(a, e, **kw)
        return cls(a=a, b=float(d["b"]), e=e, **kw)

    @classmethod
    def load(cls, path) -> "OrbitParams":
        with open(path, encoding="utf-8") as f:
            return cls.from_json(json.load(f))


def local_orbit_point(params: OrbitParams, t_hat: float) -> np.ndarray:
    """Point on the orbit before the three rotations.

    The radical's ``x`` is the first component, ``-a*cos(E)``.
    """
    a, b = params.a, params.b
    E = solve_corrected_anomaly(params.e, t_hat, params.epsilon)
    x = -a * math.cos(E)
    z = _sign(t_hat) * math.sqrt(max(0.0, (1.0 - (x * x) / (a * a)) * (b * b)))
    return np.array([x, 0.0, z])


def orbital_position(params: OrbitParams, t: float) -> np.ndarray:
    t_hat = orbital_phase(t, params.v_orbital)
    return local_orbit_point(params, t_hat) @ orbit_rotation(params.p, params.i, params.l)


def apply_orbit_component(node, time: float) -> None:
    comp = node.component("orbit")
    if comp is None:
        raise ComponentError(f"{node!r} has no orbit component")
    if node.parent is None:
        raise ComponentError(f"{node!r} has an orbit but no parent")
    node.position = orbital_position(comp.payload, time)


def apply_orbits(world, time: float) -> int:
    """Update every orbiting node in the tree; returns how many moved."""
    n = 0
    for node in world.walk():
        if node.component("orbit") is not None:
            apply_orbit_component(node, time)
            n += 1
    return n
