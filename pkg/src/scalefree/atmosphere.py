"""Atmosphere glow and fog colour, evaluated on the CPU in float64.

``fog_colour`` follows the six shader steps literally, including the
unusual terms (distance fog that fades with depth, the ``max(0, 1 - ...)``
light accumulation). ``render_sky`` drives it once per pixel.
"""

from __future__ import annotations

import json
import math
import re
from dataclasses import dataclass, field, fields
from typing import Optional

import numpy as np

from .errors import DomainError

UNIT_TOL = 1e-9


def saturate(x):
    return np.clip(x, 0.0, 1.0)


def _pow_int(x, n: int):
    """x**n by repeated squaring, so array and scalar paths agree bitwise."""
    result = None
    base = x
    while n:
        if n & 1:
            result = base if result is None else result * base
        n >>= 1
        if n:
            base = base * base
    return result


def glare(d):
    return 0.5 * d + 0.4 * _pow_int(d, 10) + 0.3 * _pow_int(d, 100) + 0.2 * _pow_int(d, 1000)


@dataclass
class Star:
    colour: tuple
    direction: tuple


@dataclass
class AtmosphereInput:
    c_atmosphere: tuple = (0.35, 0.55, 0.95)
    stars: list = field(default_factory=list)
    c_sun: tuple = (1.0, 0.95, 0.85)
    m: float = 1.0
    n: tuple = (0.0, 1.0, 0.0)
    n_planet: tuple = (0.0, -1.0, 0.0)
    h: float = 1000.0
    w_hrz: float = 100000.0
    w_planet: float = 6.4e6
    w_world: float = 0.0
    w_atmosphere: float = 1.0e5
    t_back: tuple = (0.0, 0.0, 0.0)
    c_haze: Optional[tuple] = None   # defaults to c_atmosphere
    n_l: Optional[float] = None      # defaults to -dot(n_planet, first star dir)
    n_h: Optional[float] = None      # defaults to dot(n, first star dir)

    def __post_init__(self):
        self.stars = [s if isinstance(s, Star) else Star(tuple(s["colour"]), tuple(s["direction"])) for s in self.stars]

    def validate(self) -> None:
        for name in ("n", "n_planet"):
            v = np.asarray(getattr(self, name), dtype=np.float64)
            if abs(float(np.linalg.norm(v)) - 1.0) > UNIT_TOL:
                raise DomainError(f"{name} must be a unit vector")
        for k, s in enumerate(self.stars):
            if abs(float(np.linalg.norm(s.direction)) - 1.0) > UNIT_TOL:
                raise DomainError(f"star {k} direction must be a unit vector")
            if min(s.colour) < 0:
                raise DomainError(f"star {k} colour must be non-negative")
        for name in ("h", "w_hrz", "w_planet", "w_world", "w_atmosphere", "m"):
            v = getattr(self, name)
            if not (v >= 0.0 and math.isfinite(v)):
                raise DomainError(f"{name} must be finite and >= 0")
        for name in ("c_atmosphere", "c_sun", "t_back"):
            if min(getattr(self, name)) < 0:
                raise DomainError(f"{name} must be non-negative")
        if self.c_haze is not None and min(self.c_haze) < 0:
            raise DomainError("c_haze must be non-negative")
        if self.w_planet == 0.0:
            raise DomainError("w_planet must be > 0 (divides the horizon term)")
        if self.w_atmosphere == 0.0:
            raise DomainError("w_atmosphere must be > 0 (divides the camera height)")

    @classmethod
    def from_json(cls, d: dict) -> "AtmosphereInput":
        known = {f.name for f in fields(cls)}
        unknown = set(d) - known
        if unknown:
            raise ValueError(f"unknown atmosphere key(s): {sorted(unknown)}")
        kw = {k: (tuple(v) if isinstance(v, list) and k != "stars" else v) for k, v in d.items()}
        return cls(**kw)

    @classmethod
    def load(cls, path) -> "AtmosphereInput":
        with open(path, encoding="utf-8") as f:
            return cls.from_json(json.load(f))


@dataclass
class FogResult:
    rgb: np.ndarray
    t_d: float
    d_top: float
    d_hrz: float
    d_bot: float
    d_world: float
    d_d: float
    d_a: float
    c_light: np.ndarray
    s_glare: np.ndarray
    c_top: np.ndarray
    c_hrz: np.ndarray


def _fog(p: AtmosphereInput, n: np.ndarray) -> dict:
    """Vectorised core; ``n`` has shape ``(..., 3)``. Scalars broadcast."""
    n_planet = np.asarray(p.n_planet, dtype=np.float64)
    c_atm = np.asarray(p.c_atmosphere, dtype=np.float64)
    c_haze = c_atm if p.c_haze is None else np.asarray(p.c_haze, dtype=np.float64)
    c_sun = np.asarray(p.c_sun, dtype=np.float64)
    t_back = np.asarray(p.t_back, dtype=np.float64)

    def dot(a, b):
        return a[..., 0] * b[0] + a[..., 1] * b[1] + a[..., 2] * b[2]

    # 1. horizon line and gradient densities
    t_d = dot(n, n_planet) + p.w_hrz / p.w_planet
    d_top = saturate(t_d)
    d_hrz = 1.0 - np.abs(t_d)
    d_bot = saturate(-t_d)
    # 2. density from view distance
    d_world = 1.0 - saturate(0.01 * p.m * p.w_hrz * p.w_world)
    d_d = max(1.0, p.h / p.w_atmosphere)
    # 3. light colour and glare
    shape = np.shape(t_d) + (3,)
    c_light = np.zeros(shape)
    s = np.zeros(shape)
    for star in p.stars:
        ni = np.asarray(star.direction, dtype=np.float64)
        ci = np.asarray(star.colour, dtype=np.float64)
        dn = dot(n, ni)
        c_light = c_light + np.maximum(0.0, 1.0 - saturate(5.0 * dn)[..., None] * c_atm * ci)
        di = np.maximum(0.0, dn)
        s = s + glare(di)[..., None] * ci
    if p.stars:
        n0 = np.asarray(p.stars[0].direction, dtype=np.float64)
        n_l = -float(n_planet @ n0) if p.n_l is None else p.n_l
        n_h = dot(n, n0) if p.n_h is None else np.full(np.shape(t_d), float(p.n_h))
    else:
        n_l = 0.0 if p.n_l is None else p.n_l
        n_h = np.zeros(np.shape(t_d)) if p.n_h is None else np.full(np.shape(t_d), float(p.n_h))
    # 4. part colours
    c_top = c_atm / d_d
    a = 0.25 * (c_sun + c_light)
    w = saturate(n_l + 0.1)
    lerp = a + (c_light - a) * w
    c_hrz = c_haze * lerp / d_d + (saturate(n_h) / d_d)[..., None]
    # 5. part densities
    d_a = (d_bot + d_top) / max(1.0, d_d) + d_hrz / d_d
    # 6. final colour
    rgb = (0.5 * d_world * d_a)[..., None] * (
        (d_hrz + d_bot)[..., None] * c_hrz + d_top[..., None] * (t_back + c_top) + s
    )
    return dict(
        rgb=rgb, t_d=t_d, d_top=d_top, d_hrz=d_hrz, d_bot=d_bot, d_world=d_world,
        d_d=d_d, d_a=d_a, c_light=c_light, s_glare=s, c_top=np.broadcast_to(c_top, shape), c_hrz=c_hrz,
    )


def fog_colour(p: AtmosphereInput) -> FogResult:
    p.validate()
    r = _fog(p, np.asarray(p.n, dtype=np.float64))
    scalars = ("t_d", "d_top", "d_hrz", "d_bot", "d_world", "d_d", "d_a")
    return FogResult(**{k: (float(v) if k in scalars else np.array(v)) for k, v in r.items()})


@dataclass
class SkyCamera:
    forward: tuple = (0.0, 0.0, 1.0)
    up: tuple = (0.0, 1.0, 0.0)
    right: tuple = (1.0, 0.0, 0.0)
    vfov_deg: float = 90.0


def pixel_directions(camera: SkyCamera, width: int, height: int) -> np.ndarray:
    """Unit view directions, shape ``(height, width, 3)``, row 0 at the top.

    Pixel-centre offsets are formed as ``(2x + 1 - W) / W`` so mirrored
    columns get exactly negated offsets.
    """
    t = math.tan(math.radians(camera.vfov_deg) / 2.0)
    aspect = width / height
    xs = (2.0 * np.arange(width) + 1.0 - width) / width * (t * aspect)
    ys = (height - 2.0 * np.arange(height) - 1.0) / height * t
    f, u, r = (np.asarray(v, dtype=np.float64) for v in (camera.forward, camera.up, camera.right))
    d = f + xs[None, :, None] * r + ys[:, None, None] * u
    nrm = np.sqrt(d[..., 0] * d[..., 0] + d[..., 1] * d[..., 1] + d[..., 2] * d[..., 2])
    return d / nrm[..., None]


def quantize(rgb) -> np.ndarray:
    return np.floor(np.clip(rgb, 0.0, 1.0) * 255.0 + 0.5).astype(np.uint8)


def render_sky(params: AtmosphereInput, camera: SkyCamera | None = None, width: int = 256, height: int = 128,
               jobs: int = 1) -> np.ndarray:
    """8-bit RGB image, shape ``(height, width, 3)``; ``n`` varies per pixel."""
    if width < 1 or height < 1:
        raise ValueError("width and height must be >= 1")
    params.validate()
    dirs = pixel_directions(camera or SkyCamera(), width, height)
    if jobs <= 1 or height < 2:
        return quantize(_fog(params, dirs)["rgb"])
    from concurrent.futures import ThreadPoolExecutor

    bands = np.array_split(np.arange(height), min(jobs, height))
    with ThreadPoolExecutor(max_workers=jobs) as ex:
        parts = list(ex.map(lambda rows: quantize(_fog(params, dirs[rows])["rgb"]), bands))
    return np.concatenate(parts, axis=0)


def write_ppm(image: np.ndarray, fh) -> None:
    h, w, _ = image.shape
    fh.write(f"P6\n{w} {h}\n255\n".encode("ascii"))
    fh.write(np.ascontiguousarray(image, dtype=np.uint8).tobytes())


def read_ppm(fh) -> np.ndarray:
    data = fh.read()
    m = re.match(rb"P6\s+(\d+)\s+(\d+)\s+255\s", data)
    if m is None:
        raise ValueError("not an 8-bit P6 image")
    w, h = int(m.group(1)), int(m.group(2))
    return np.frombuffer(data[m.end(): m.end() + w * h * 3], dtype=np.uint8).reshape(h, w, 3)
