"""Mesh and nodal field records.

Meshes are immutable after construction: coordinate and connectivity arrays
are stored read-only so a mesh can be shared between solver instances.
"""

from dataclasses import dataclass, field
from typing import Any, Dict, FrozenSet, Literal, Union

import numpy as np

from pq_eigen.core.errors import MeshError

BoundaryKind = Literal["dirichlet", "natural"]
WeightKind = Literal["none", "radial"]


def _frozen(array: np.ndarray) -> np.ndarray:
    array.setflags(write=False)
    return array


@dataclass(eq=False)
class Mesh1D:
    """Interval mesh with nodes in increasing order.

    A radial mesh represents the unit disc through its radial coordinate:
    integrals carry the weight r, the centre r = 0 is a natural (Neumann)
    end and the rim is Dirichlet.
    """
    node_coords: np.ndarray
    weight_kind: WeightKind = "none"
    left_bc: BoundaryKind = "dirichlet"
    right_bc: BoundaryKind = "dirichlet"

    def __post_init__(self):
        coords = np.array(self.node_coords, dtype=float).ravel()
        if coords.size < 2:
            raise MeshError("an interval mesh needs at least two nodes")
        if np.any(np.diff(coords) <= 0.0):
            raise MeshError("node coordinates must be strictly increasing")
        if self.weight_kind == "radial":
            if coords[0] != 0.0:
                raise MeshError("radial meshes must start at r = 0")
            if self.left_bc != "natural" or self.right_bc != "dirichlet":
                raise MeshError("radial meshes need a natural centre and a Dirichlet rim")
        self.node_coords = _frozen(coords)

    dim = 1

    @property
    def n_nodes(self) -> int:
        return self.node_coords.size

    @property
    def n_elements(self) -> int:
        return self.node_coords.size - 1

    @property
    def points(self) -> np.ndarray:
        return self.node_coords[:, None]

    @property
    def cells(self) -> np.ndarray:
        idx = np.arange(self.n_elements)
        return np.stack([idx, idx + 1], axis=1)

    @property
    def is_radial(self) -> bool:
        return self.weight_kind == "radial"

    @property
    def dirichlet_nodes(self) -> np.ndarray:
        nodes = []
        if self.left_bc == "dirichlet":
            nodes.append(0)
        if self.right_bc == "dirichlet":
            nodes.append(self.n_nodes - 1)
        return np.array(nodes, dtype=int)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "node_coords": self.node_coords.tolist(),
            "weight_kind": self.weight_kind,
            "left_bc": self.left_bc,
            "right_bc": self.right_bc,
        }


@dataclass(eq=False)
class Mesh2D:
    """Conforming P1 triangulation.

    Triangles are reoriented counter-clockwise on construction and the
    boundary node set is derived from connectivity (nodes on edges that
    belong to exactly one triangle).
    """
    nodes: np.ndarray
    triangles: np.ndarray
    boundary_nodes: FrozenSet[int] = field(init=False)

    def __post_init__(self):
        nodes = np.array(self.nodes, dtype=float)
        tris = np.array(self.triangles, dtype=np.int64)
        if nodes.ndim != 2 or nodes.shape[1] != 2:
            raise MeshError(f"nodes must have shape (n, 2), got {nodes.shape}")
        if tris.ndim != 2 or tris.shape[1] != 3 or tris.shape[0] == 0:
            raise MeshError(f"triangles must have shape (m, 3), got {tris.shape}")
        if tris.min() < 0 or tris.max() >= nodes.shape[0]:
            bad = int(np.nonzero((tris < 0) | (tris >= nodes.shape[0]))[0][0])
            raise MeshError(f"triangle {bad}: node index out of range")

        area2 = signed_double_areas(nodes, tris)
        scale = max(np.ptp(nodes[:, 0]), np.ptp(nodes[:, 1]), 1e-300) ** 2
        degenerate = np.nonzero(np.abs(area2) <= 1e-14 * scale)[0]
        if degenerate.size:
            raise MeshError(f"triangle {int(degenerate[0])} is degenerate (zero area)")
        flip = area2 < 0.0
        tris[flip] = tris[flip][:, [0, 2, 1]]

        edges, counts = _edge_counts(tris)
        if np.any(counts > 2):
            raise MeshError("non-conforming mesh: an edge is shared by more than two triangles")
        boundary = edges[counts == 1]

        self.nodes = _frozen(nodes)
        self.triangles = _frozen(tris)
        self.boundary_nodes = frozenset(int(i) for i in np.unique(boundary))
        self._boundary_edges = _frozen(boundary)

    dim = 2

    @property
    def n_nodes(self) -> int:
        return self.nodes.shape[0]

    @property
    def n_elements(self) -> int:
        return self.triangles.shape[0]

    @property
    def points(self) -> np.ndarray:
        return self.nodes

    @property
    def cells(self) -> np.ndarray:
        return self.triangles

    @property
    def is_radial(self) -> bool:
        return False

    @property
    def boundary_edges(self) -> np.ndarray:
        """Edges (sorted node pairs) that belong to exactly one triangle."""
        return self._boundary_edges

    @property
    def dirichlet_nodes(self) -> np.ndarray:
        return np.array(sorted(self.boundary_nodes), dtype=int)

    def edge_counts(self):
        """Unique edges and the number of triangles sharing each."""
        return _edge_counts(self.triangles)

    def to_dict(self) -> Dict[str, Any]:
        return {"nodes": self.nodes.tolist(), "triangles": self.triangles.tolist()}


def signed_double_areas(nodes: np.ndarray, tris: np.ndarray) -> np.ndarray:
    a, b, c = nodes[tris[:, 0]], nodes[tris[:, 1]], nodes[tris[:, 2]]
    return (b[:, 0] - a[:, 0]) * (c[:, 1] - a[:, 1]) - (b[:, 1] - a[:, 1]) * (c[:, 0] - a[:, 0])


def _edge_counts(tris: np.ndarray):
    all_edges = np.concatenate([tris[:, [0, 1]], tris[:, [1, 2]], tris[:, [2, 0]]])
    all_edges.sort(axis=1)
    return np.unique(all_edges, axis=0, return_counts=True)


Mesh = Union[Mesh1D, Mesh2D]


@dataclass(eq=False)
class FemFunction:
    """Continuous piecewise-linear field given by its nodal values."""
    mesh: Mesh
    coefficients: np.ndarray

    def __post_init__(self):
        coefficients = np.asarray(self.coefficients, dtype=float).ravel()
        if coefficients.size != self.mesh.n_nodes:
            raise ValueError(
                f"expected {self.mesh.n_nodes} nodal values, got {coefficients.size}"
            )
        self.coefficients = coefficients

    def scaled(self, factor: float) -> "FemFunction":
        return FemFunction(self.mesh, factor * self.coefficients)

    def max_norm(self) -> float:
        return float(np.max(np.abs(self.coefficients)))

    def distance_to(self, other: "FemFunction") -> float:
        """Nodal sup-norm distance to another field on the same mesh."""
        if other.mesh is not self.mesh:
            raise ValueError("fields live on different meshes")
        return float(np.max(np.abs(self.coefficients - other.coefficients)))
