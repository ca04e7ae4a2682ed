"""Shared fixtures: small meshes used across the suite."""

import os
import sys

import numpy as np
import pytest

sys.path.insert(0, os.path.join(os.path.dirname(__file__), "..", "scripts"))

from pq_eigen.core.mesh import generate_interval, generate_radial, generate_structured_2d
from pq_eigen.models.mesh import FemFunction
from pq_eigen.models.params import DomainSpec


@pytest.fixture
def unit_square():
    """Unit square with h = 1/8."""
    return generate_structured_2d(DomainSpec(kind="rectangle", width=1.0, height=1.0, h=0.125))


@pytest.fixture
def coarse_square():
    """The (0,2)^2 square with h = 1/4."""
    return generate_structured_2d(DomainSpec(kind="rectangle", h=0.25))


@pytest.fixture
def interval():
    return generate_interval(0.0, 1.0, 64)


@pytest.fixture
def radial():
    return generate_radial(500)


def bump(mesh, power=1.0, tilt=0.0):
    """Positive interior field vanishing on the Dirichlet boundary."""
    pts = mesh.points
    lo, hi = pts.min(axis=0), pts.max(axis=0)
    values = np.prod((pts - lo) * (hi - pts), axis=1) ** power * (1.0 + tilt * pts[:, 0])
    values[mesh.dirichlet_nodes] = 0.0
    return FemFunction(mesh, values)
