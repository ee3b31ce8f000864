"""Write the shipped genus-2 fixture: a 3 x 5 x 1 voxel plate with two holes.

Produces ``genus2_plate.off`` (boundary surface) and ``genus2_plate.node`` /
``genus2_plate.ele`` (solid) in the package data directory.
"""

import argparse
from pathlib import Path

import numpy as np

from eigenratio import meshio
from eigenratio.mesh import genus, voxel_tet

DATA = Path(__file__).resolve().parents[1] / "src" / "eigenratio" / "data"


def plate_mask() -> np.ndarray:
    mask = np.ones((3, 5, 1), dtype=bool)
    mask[1, 1, 0] = mask[1, 3, 0] = False
    return mask


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--refine", type=int, default=3)
    ap.add_argument("--out", type=Path, default=DATA)
    args = ap.parse_args()
    solid = voxel_tet(plate_mask(), cell_size=1.0, refine=args.refine)
    surface = solid.boundary_surface()
    assert genus(surface) == 2
    args.out.mkdir(parents=True, exist_ok=True)
    meshio.save_surface(surface, args.out / "genus2_plate.off")
    meshio.save_tet(solid, args.out / "genus2_plate")
    print(f"genus {genus(surface)}: {surface.n_vertices} surface vertices, "
          f"{len(solid.tets)} tets, volume {solid.volume():g}")


if __name__ == "__main__":
    main()
