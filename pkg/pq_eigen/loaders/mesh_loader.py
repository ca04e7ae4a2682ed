"""Plain-text mesh and nodal-value files.

Mesh format::

    NODES n
    x y            (n lines)
    ELEMENTS m
    i j k          (m lines, 0-based node indices)

Anything after ``#`` on a line is a comment; blank lines are ignored.
"""

from pathlib import Path
from typing import Iterator, List, Tuple

import numpy as np

from pq_eigen.core.errors import MeshError
from pq_eigen.models.mesh import Mesh2D, signed_double_areas


def _content_lines(path: Path) -> Iterator[Tuple[int, List[str]]]:
    with open(path, "r", encoding="utf-8") as f:
        for number, raw in enumerate(f, start=1):
            text = raw.split("#", 1)[0].strip()
            if text:
                yield number, text.split()


def _header(lines, keyword: str) -> int:
    try:
        number, tokens = next(lines)
    except StopIteration:
        raise MeshError(f"missing '{keyword}' header")
    if len(tokens) != 2 or tokens[0].upper() != keyword:
        raise MeshError(f"expected '{keyword} <count>', got '{' '.join(tokens)}'", number)
    try:
        count = int(tokens[1])
    except ValueError:
        raise MeshError(f"malformed {keyword} count '{tokens[1]}'", number)
    if count <= 0:
        raise MeshError(f"{keyword} count must be positive, got {count}", number)
    return count


def _rows(lines, count: int, width: int, kind: str, convert) -> Tuple[list, List[int]]:
    rows, numbers = [], []
    for _ in range(count):
        try:
            number, tokens = next(lines)
        except StopIteration:
            raise MeshError(f"file ends after {len(rows)} of {count} {kind}")
        if len(tokens) != width:
            raise MeshError(f"expected {width} values per {kind[:-1]} line, got {len(tokens)}", number)
        try:
            rows.append([convert(t) for t in tokens])
        except ValueError:
            raise MeshError(f"malformed {kind[:-1]} entry '{' '.join(tokens)}'", number)
        numbers.append(number)
    return rows, numbers


class MeshLoader:
    """Reads and writes 2D triangulations and nodal-value files."""

    @staticmethod
    def read_mesh(file_path: str) -> Mesh2D:
        """Load a mesh file; boundary nodes are recomputed from connectivity."""
        path = Path(file_path)
        if not path.exists():
            raise FileNotFoundError(f"Mesh file not found: {file_path}")

        lines = _content_lines(path)
        n_nodes = _header(lines, "NODES")
        nodes, _ = _rows(lines, n_nodes, 2, "nodes", float)
        n_elements = _header(lines, "ELEMENTS")
        tris, numbers = _rows(lines, n_elements, 3, "elements", int)
        extra = next(lines, None)
        if extra is not None:
            raise MeshError("unexpected content after the element block", extra[0])

        nodes = np.array(nodes, dtype=float)
        tris = np.array(tris, dtype=np.int64)
        bad = np.nonzero(np.any((tris < 0) | (tris >= n_nodes), axis=1))[0]
        if bad.size:
            raise MeshError(f"node index out of range (mesh has {n_nodes} nodes)", numbers[bad[0]])

        area2 = np.abs(signed_double_areas(nodes, tris))
        scale = max(np.ptp(nodes[:, 0]), np.ptp(nodes[:, 1]), 1e-300) ** 2
        degenerate = np.nonzero(area2 <= 1e-14 * scale)[0]
        if degenerate.size:
            raise MeshError("degenerate (zero-area) triangle", numbers[degenerate[0]])

        return Mesh2D(nodes, tris)

    @staticmethod
    def write_mesh(mesh: Mesh2D, file_path: str) -> None:
        """Write a mesh with 17 significant digits per coordinate."""
        path = Path(file_path)
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, "w", encoding="utf-8") as f:
            f.write(f"NODES {mesh.n_nodes}\n")
            for x, y in mesh.nodes:
                f.write(f"{x:.17g} {y:.17g}\n")
            f.write(f"ELEMENTS {mesh.n_elements}\n")
            for i, j, k in mesh.triangles:
                f.write(f"{i} {j} {k}\n")

    @staticmethod
    def read_nodal_values(file_path: str, n_nodes: int) -> np.ndarray:
        """Load one value per node (one per line, ``#`` comments allowed)."""
        path = Path(file_path)
        if not path.exists():
            raise FileNotFoundError(f"Nodal value file not found: {file_path}")
        values = []
        for number, tokens in _content_lines(path):
            if len(tokens) != 1:
                raise MeshError(f"expected one value per line, got {len(tokens)}", number)
            try:
                values.append(float(tokens[0]))
            except ValueError:
                raise MeshError(f"malformed value '{tokens[0]}'", number)
        if len(values) != n_nodes:
            raise MeshError(f"expected {n_nodes} nodal values, got {len(values)}")
        return np.array(values)


read_mesh = MeshLoader.read_mesh
write_mesh = MeshLoader.write_mesh
read_nodal_values = MeshLoader.read_nodal_values
