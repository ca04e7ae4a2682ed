import sys
import os
sys.path.append(os.path.abspath(".."))

import argparse
import math

import numpy as np

from pq_eigen.loaders.mesh_loader import write_mesh
from pq_eigen.models.mesh import Mesh2D, signed_double_areas


def heart_lower(x: np.ndarray) -> np.ndarray:
    """Lower half-ellipse x^2/4 + y^2/16 < 1, y <= 0."""
    return -4.0 * np.sqrt(np.clip(1.0 - x ** 2 / 4.0, 0.0, None))


def heart_upper(x: np.ndarray) -> np.ndarray:
    """Two upper half-ellipses (|x| - 1)^2 + y^2/4 < 1, y >= 0."""
    return 2.0 * np.sqrt(np.clip(1.0 - (np.abs(x) - 1.0) ** 2, 0.0, None))


def build_heart_mesh(h: float = 1.0 / 16.0) -> Mesh2D:
    """Column-mapped triangulation of the heart-shaped domain.

    Columns sit at uniformly spaced x in [-2, 2] (x = 0 included); each
    column is split into equal vertical steps between the lower and upper
    boundary. The two end columns have zero height and collapse to a single
    node; triangles that degenerate there are dropped.
    """
    nx = 2 * math.ceil(2.0 / h - 1e-9)
    xs = np.linspace(-2.0, 2.0, nx + 1)
    lo, hi = heart_lower(xs), heart_upper(xs)
    ny = math.ceil(float(np.max(hi - lo)) / h - 1e-9)

    coords = []
    index = np.zeros((nx + 1, ny + 1), dtype=np.int64)
    for i, x in enumerate(xs):
        if hi[i] - lo[i] <= 1e-12:
            index[i, :] = len(coords)
            coords.append((x, 0.0))
            continue
        for j in range(ny + 1):
            index[i, j] = len(coords)
            coords.append((x, lo[i] + (hi[i] - lo[i]) * j / ny))

    tris = []
    for i in range(nx):
        for j in range(ny):
            a, b = index[i, j], index[i + 1, j]
            c, d = index[i + 1, j + 1], index[i, j + 1]
            tris.extend([(a, b, c), (a, c, d)])
    tris = np.array(tris, dtype=np.int64)
    nodes = np.array(coords)

    distinct = (tris[:, 0] != tris[:, 1]) & (tris[:, 1] != tris[:, 2]) & (tris[:, 0] != tris[:, 2])
    tris = tris[distinct]
    tris = tris[np.abs(signed_double_areas(nodes, tris)) > 1e-14]
    return Mesh2D(nodes, tris)


def main():
    parser = argparse.ArgumentParser(description="Write the heart-shaped domain mesh file")
    parser.add_argument("--h", type=float, default=1.0 / 16.0, help="Column spacing / target cell size")
    parser.add_argument("--output", default="heart.mesh", help="Mesh file to write")
    args = parser.parse_args()

    mesh = build_heart_mesh(args.h)
    write_mesh(mesh, args.output)
    print(f"✓ Wrote {mesh.n_nodes} nodes, {mesh.n_elements} triangles to {args.output}")


if __name__ == "__main__":
    main()
