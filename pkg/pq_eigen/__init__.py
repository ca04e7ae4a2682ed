"""Principal eigenpairs of coupled p-Laplacian systems."""

__version__ = "0.1.0"
