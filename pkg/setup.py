"""Setup script for the pq-eigen CLI."""

from setuptools import setup, find_packages

setup(
    name="pq-eigen",
    version="0.1.0",
    packages=find_packages(exclude=["tests", "tests.*", "examples", "examples.*"]),
    install_requires=[
        "numpy>=1.24.0",
        "scipy>=1.12.0",
        "typer[all]>=0.9.0",
        "rich>=13.0.0",
        "pydantic>=2.0.0",
    ],
    entry_points={
        "console_scripts": [
            "pq-eigen=pq_eigen.cli.main:app",
        ],
    },
)
