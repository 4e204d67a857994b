"""Render the sky model at several camera heights or star elevations.

    python scripts/render_sky.py --out-dir sky --heights 0 2e5 5e5 1e6
    python scripts/render_sky.py --out-dir sky --elevations -5 0 10 45
"""

import argparse
import math
import pathlib
import time

from scalefree.atmosphere import AtmosphereInput, SkyCamera, Star, render_sky, write_ppm


def params(height, elevation_deg):
    el = math.radians(elevation_deg)
    sun = Star((1.0, 0.95, 0.88), (0.0, math.sin(el), math.cos(el)))
    return AtmosphereInput(
        c_atmosphere=(0.35, 0.55, 0.95), stars=[sun], c_sun=(1.0, 0.9, 0.75), m=1.0,
        n_planet=(0.0, -1.0, 0.0), h=height, w_hrz=160e3, w_planet=6.4e6, w_world=1e-5,
        w_atmosphere=1e5, t_back=(0.02, 0.02, 0.05),
    )


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--out-dir", default="sky")
    ap.add_argument("--width", type=int, default=256)
    ap.add_argument("--height", type=int, default=128)
    ap.add_argument("--heights", type=float, nargs="*", default=[2000.0])
    ap.add_argument("--elevations", type=float, nargs="*", default=[20.0])
    ap.add_argument("--jobs", type=int, default=1)
    args = ap.parse_args()

    out = pathlib.Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    cam = SkyCamera(forward=(0.0, 0.3, 1.0), up=(0.0, 1.0, -0.3), right=(1.0, 0.0, 0.0))
    for h in args.heights:
        for el in args.elevations:
            t0 = time.perf_counter()
            img = render_sky(params(h, el), cam, args.width, args.height, jobs=args.jobs)
            path = out / f"sky_h{h:g}_el{el:g}.ppm"
            with open(path, "wb") as f:
                write_ppm(img, f)
            mean = img.reshape(-1, 3).mean(axis=0)
            print(f"{path}  {time.perf_counter() - t0:.3f} s  mean rgb {mean.round(1).tolist()}")


if __name__ == "__main__":
    main()
