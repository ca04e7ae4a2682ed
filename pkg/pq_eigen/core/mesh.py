"""Mesh generation and geometric queries.

Structured generators cover the interval, the radial disc reduction, the
rectangle, the L-shape and the isosceles triangle. Every other domain is
ingested from a mesh file (see ``pq_eigen.loaders.mesh_loader``).
"""

import logging
import math

import numpy as np

from pq_eigen.core.errors import MeshError
from pq_eigen.models.mesh import Mesh1D, Mesh2D, signed_double_areas
from pq_eigen.models.params import DomainSpec

logger = logging.getLogger(__name__)

# Guards ceil() against h values that divide a length up to round-off.
_CEIL_SLACK = 1e-9


def _cells(length: float, h: float) -> int:
    return max(1, math.ceil(length / h - _CEIL_SLACK))


def generate_interval(a: float, b: float, n: int, left_bc: str = "dirichlet",
                      right_bc: str = "dirichlet") -> Mesh1D:
    """Uniform mesh of [a, b] with n elements."""
    if n < 1:
        raise MeshError(f"element count must be positive, got {n}")
    if a >= b:
        raise MeshError(f"interval endpoints must satisfy a < b, got [{a}, {b}]")
    return Mesh1D(np.linspace(a, b, n + 1), left_bc=left_bc, right_bc=right_bc)


def generate_radial(n: int, radius: float = 1.0) -> Mesh1D:
    """Radial mesh of [0, radius] carrying the weight r (natural centre, Dirichlet rim)."""
    if n < 2:
        raise MeshError(f"radial meshes need at least two elements, got {n}")
    return Mesh1D(np.linspace(0.0, radius, n + 1), weight_kind="radial",
                  left_bc="natural", right_bc="dirichlet")


def _grid_triangles(nx: int, ny: int, keep=None) -> np.ndarray:
    """Split each grid cell along its lower-left to upper-right diagonal."""
    i, j = np.meshgrid(np.arange(nx), np.arange(ny), indexing="xy")
    i, j = i.ravel(), j.ravel()
    if keep is not None:
        mask = keep(i, j)
        i, j = i[mask], j[mask]
    a = j * (nx + 1) + i
    b = a + 1
    c = b + nx + 1
    d = a + nx + 1
    lower = np.stack([a, b, c], axis=1)
    upper = np.stack([a, c, d], axis=1)
    return np.stack([lower, upper], axis=1).reshape(-1, 3)


def _grid_nodes(nx: int, ny: int, dx: float, dy: float, origin) -> np.ndarray:
    xs = origin[0] + dx * np.arange(nx + 1)
    ys = origin[1] + dy * np.arange(ny + 1)
    gx, gy = np.meshgrid(xs, ys, indexing="xy")
    return np.stack([gx.ravel(), gy.ravel()], axis=1)


def _compact(nodes: np.ndarray, tris: np.ndarray):
    used = np.unique(tris)
    relabel = np.full(nodes.shape[0], -1, dtype=np.int64)
    relabel[used] = np.arange(used.size)
    return nodes[used], relabel[tris]


def _rectangle(spec: DomainSpec) -> Mesh2D:
    nx, ny = _cells(spec.width, spec.h), _cells(spec.height, spec.h)
    nodes = _grid_nodes(nx, ny, spec.width / nx, spec.height / ny, spec.origin)
    return Mesh2D(nodes, _grid_triangles(nx, ny))


def _lshape(spec: DomainSpec) -> Mesh2D:
    m = _cells(spec.arm, spec.h)
    cell = spec.arm / m
    n = round(spec.outer / cell)
    if abs(n * cell - spec.outer) > 1e-9 * spec.outer:
        raise MeshError(
            f"L-shape side {spec.outer} is not a multiple of the cell size {cell:.6g}"
        )
    nodes = _grid_nodes(n, n, cell, cell, spec.origin)
    tris = _grid_triangles(n, n, keep=lambda i, j: (i < m) | (j < m))
    nodes, tris = _compact(nodes, tris)
    return Mesh2D(nodes, tris)


def _isosceles_triangle(spec: DomainSpec) -> Mesh2D:
    m = _cells(spec.base, spec.h)
    ox, oy = spec.origin
    a = np.array([ox, oy])
    ab = np.array([spec.base, 0.0]) / m
    ac = np.array([spec.base / 2.0, spec.altitude]) / m

    index = -np.ones((m + 1, m + 1), dtype=np.int64)
    coords = []
    for j in range(m + 1):
        for i in range(m + 1 - j):
            index[i, j] = len(coords)
            coords.append(a + i * ab + j * ac)

    tris = []
    for j in range(m):
        for i in range(m - j):
            tris.append((index[i, j], index[i + 1, j], index[i, j + 1]))
            if i + j <= m - 2:
                tris.append((index[i + 1, j], index[i + 1, j + 1], index[i, j + 1]))
    return Mesh2D(np.array(coords), np.array(tris, dtype=np.int64))


_GENERATORS = {
    "rectangle": _rectangle,
    "lshape": _lshape,
    "isosceles_triangle": _isosceles_triangle,
}


def generate_structured_2d(spec: DomainSpec) -> Mesh2D:
    """Structured triangulation of a rectangle, L-shape or isosceles triangle.

    ``spec.h`` is the cell side (rectangle, L-shape) or the base subdivision
    length (triangle), so halving h exactly quadruples the triangle count.
    """
    generator = _GENERATORS.get(spec.kind)
    if generator is None:
        raise MeshError(f"no structured generator for domain kind '{spec.kind}'")
    if spec.h > spec.diameter:
        raise MeshError(f"mesh size h={spec.h} exceeds the domain diameter {spec.diameter:.6g}")
    mesh = generator(spec)
    logger.debug("generated %s mesh: %d nodes, %d triangles",
                 spec.kind, mesh.n_nodes, mesh.n_elements)
    return mesh


def domain_area(mesh: Mesh2D) -> float:
    """Total area of a triangulation."""
    return float(0.5 * np.sum(np.abs(signed_double_areas(mesh.nodes, mesh.triangles))))


def boundary_distance(mesh: Mesh2D, points: np.ndarray, chunk: int = 4096) -> np.ndarray:
    """Euclidean distance from each point to the boundary polyline of a mesh."""
    edges = mesh.boundary_edges
    seg_a = mesh.nodes[edges[:, 0]]
    seg_d = mesh.nodes[edges[:, 1]] - seg_a
    seg_len2 = np.sum(seg_d ** 2, axis=1)

    points = np.asarray(points, dtype=float).reshape(-1, 2)
    out = np.empty(points.shape[0])
    for start in range(0, points.shape[0], chunk):
        pts = points[start:start + chunk]
        rel = pts[:, None, :] - seg_a[None, :, :]
        t = np.clip(np.einsum("psd,sd->ps", rel, seg_d) / seg_len2, 0.0, 1.0)
        diff = rel - t[:, :, None] * seg_d[None, :, :]
        out[start:start + chunk] = np.sqrt(np.min(np.sum(diff ** 2, axis=2), axis=1))
    return out


def _lattice(order: int) -> np.ndarray:
    """Barycentric coordinates of the order-n lattice of a triangle."""
    pts = [(i, j, order - i - j) for i in range(order + 1) for j in range(order + 1 - i)]
    return np.array(pts, dtype=float) / order


def inscribed_radius(mesh: Mesh2D, refine: int = 8, order: int = 4) -> float:
    """Radius of the largest disc inside the meshed domain.

    Samples nodes and barycenters, then refines with a barycentric lattice
    inside the ``refine`` best triangles. The result is exact up to O(h).
    """
    nodes, tris = mesh.nodes, mesh.triangles
    centroids = nodes[tris].mean(axis=1)
    best = float(np.max(boundary_distance(mesh, nodes)))
    dist_c = boundary_distance(mesh, centroids)
    best = max(best, float(np.max(dist_c)))

    top = np.argsort(dist_c)[::-1][:refine]
    lattice = _lattice(order)
    samples = np.einsum("lk,mkd->mld", lattice, nodes[tris[top]])
    best = max(best, float(np.max(boundary_distance(mesh, samples))))
    return best
