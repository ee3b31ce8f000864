"""Refinement ladders for the sphere, ball and cube against their analytic values.

``param`` is the icosphere subdivision count, the ball grid refinement or
the cube cells per edge.

Prints one row per level with the error and the ratio to the previous
level's error, for lumped and consistent mass. A ratio near 4 is second
order in the mesh size.
"""

import argparse
import math
import time

from eigenratio.mesh import gen_ball_tet, gen_cube_tet, gen_icosphere
from eigenratio.spectra import dirichlet_spectrum, surface_spectrum

def _surface(m, lumped):
    return surface_spectrum(m, 1, lumped=lumped)[1]


def _dirichlet(m, lumped):
    return dirichlet_spectrum(m, 1, lumped=lumped)[1]


# family -> (level parameter for step i, generator, solver, exact value)
LADDERS = {
    "sphere": (lambda i: i + 1, lambda p: gen_icosphere(1.0, p), _surface, 2.0),
    "ball": (lambda i: i + 2, lambda p: gen_ball_tet(1.0, p), _dirichlet, math.pi**2),
    "cube": (lambda i: 4 * 2**i, lambda p: gen_cube_tet(1.0, p), _dirichlet, 3 * math.pi**2),
}


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--levels", type=int, default=3, help="levels per ladder (the fourth ball level takes ~20 s)")
    ap.add_argument("--only", choices=sorted(LADDERS))
    args = ap.parse_args()
    print("family,mass,param,value,error,ratio,seconds")
    for name, (param, make, solve, exact) in LADDERS.items():
        if args.only and name != args.only:
            continue
        for lumped in (True, False):
            prev = None
            for i in range(args.levels):
                t0 = time.perf_counter()
                value = solve(make(param(i)), lumped)
                err = value - exact
                ratio = abs(prev / err) if prev else float("nan")
                print(f"{name},{'lumped' if lumped else 'consistent'},{param(i)},{value:.10f},{err:+.3e},"
                      f"{ratio:.2f},{time.perf_counter() - t0:.2f}", flush=True)
                prev = err


if __name__ == "__main__":
    main()
