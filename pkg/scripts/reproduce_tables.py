import sys
import os
sys.path.append(os.path.abspath(".."))

import argparse
import logging
from pathlib import Path

from heart_mesh import build_heart_mesh
from pq_eigen.core import analysis
from pq_eigen.core.eigensolver import (
    GradientNonlinearity,
    bessel_mode,
    initial_pair,
    radial_cosine,
    solve_eigenpair,
    solve_gradient_system,
    solve_scalar,
    solve_weighted_scalar,
    step2_weight,
)
from pq_eigen.core.fem import quadrature_values
from pq_eigen.core.mesh import generate_radial, generate_structured_2d
from pq_eigen.models.params import DomainSpec, SystemParams
from pq_eigen.services import repository


def table1(out: Path, n: int):
    """Disc Laplacian trajectory from (1 - r)^2."""
    mesh = generate_radial(n)
    guess = initial_pair(mesh, "radial_quadratic")
    result = solve_eigenpair(mesh, SystemParams(p=2, q=2, alpha=1), initial=guess)
    gap = analysis.eigenfunction_gap(result.u, bessel_mode(mesh))
    rows = [[r.k, r.lam, r.delta] for r in result.history]
    print(f"Table 1: lambda = {result.lam:.6f}, gap to Bessel mode = {gap:.4g}")
    return repository.save_rows(out, "table1", ["k", "lambda", "delta"], rows)


def table2(out: Path, n: int):
    """Scalar disc eigenvalues for large p and distance to the distance function."""
    mesh = generate_radial(n)
    rows = []
    for p in (1.3, 6.0, 18.0, 30.0, 100.0, 400.0):
        guess = radial_cosine(mesh)[0]
        result = solve_scalar(mesh, p, initial=guess)
        rows.append([p, result.lam, result.lam ** (1.0 / p), analysis.distance_gap(result.u, p)])
        print(f"Table 2: p={p:g} lambda^(1/p) = {rows[-1][2]:.4f}")
    return repository.save_rows(out, "table2", ["p", "lambda", "lambda_root", "distance_gap"], rows)


def table3(out: Path, n: int):
    """Mixed exponents on the disc with p = 30, started from the Bessel mode."""
    mesh = generate_radial(n)
    guess = initial_pair(mesh, "bessel")
    rows = []
    for q in (1.5, 2.0, 5.0, 10.0, 25.0):
        params = SystemParams(p=30, q=q, alpha=1)
        result = solve_eigenpair(mesh, params, initial=guess)
        rows.append([q, params.beta, result.lam])
        print(f"Table 3: q={q:g} lambda = {result.lam:.5g}")
    return repository.save_rows(out, "table3", ["q", "beta", "lambda"], rows)


def table4(out: Path, h: float):
    mesh = generate_structured_2d(DomainSpec(kind="rectangle", h=h))
    rows = []
    for q in (1.5, 2.0, 3.0, 4.0, 5.0, 6.0, 7.0, 8.0, 9.0, 10.0):
        params = SystemParams(p=10, q=q, alpha=1)
        result = solve_eigenpair(mesh, params)
        rows.append([q, params.beta, result.lam])
        print(f"Table 4: q={q:g} lambda = {result.lam:.5g}")
    return repository.save_rows(out, "table4", ["q", "beta", "lambda"], rows)


def table5(out: Path, levels: int):
    rows = []
    columns = {}
    h_values = [2.0 ** -k for k in range(levels)]
    for q in (1.5, 5.0, 10.0):
        params = SystemParams(p=10, q=q, alpha=1)
        columns[q] = [solve_eigenpair(generate_structured_2d(DomainSpec(kind="rectangle", h=h)), params).lam
                      for h in h_values]
    orders = {q: analysis.eoc_column(values) for q, values in columns.items()}
    for i, h in enumerate(h_values):
        row = [h]
        for q in columns:
            row.extend([columns[q][i], orders[q][i]])
        rows.append(row)
    header = ["h", "lambda_1.5", "eoc_1.5", "lambda_5", "eoc_5", "lambda_10", "eoc_10"]
    return repository.save_rows(out, "table5", header, rows)


def table6(out: Path, h: float):
    meshes = {
        "triangle": generate_structured_2d(DomainSpec(kind="isosceles_triangle", h=h)),
        "lshape": generate_structured_2d(DomainSpec(kind="lshape", h=h)),
        "heart": build_heart_mesh(h),
    }
    rows = []
    for q in (2.0, 3.0, 4.0, 5.0, 6.0, 7.0, 8.0, 9.0, 10.0):
        params = SystemParams(p=3, q=q, alpha=1)
        row = [q, params.beta]
        for name, mesh in meshes.items():
            row.append(solve_eigenpair(mesh, params).lam)
        rows.append(row)
        print(f"Table 6: q={q:g} " + " ".join(f"{v:.5g}" for v in row[2:]))
    return repository.save_rows(out, "table6", ["q", "beta", "triangle", "lshape", "heart"], rows)


def table7(out: Path, h: float):
    mesh = generate_structured_2d(DomainSpec(kind="rectangle", h=h))
    r = quadrature_values(mesh, step2_weight)
    big_lam = solve_weighted_scalar(mesh, 10.0, step2_weight).lam
    rows = []
    for q in (2.0, 3.0, 4.0, 5.0, 6.0, 7.0, 8.0, 9.0, 10.0):
        params = SystemParams(p=10, q=q, alpha=1)
        nl = GradientNonlinearity.resonant(params.alpha, params.beta, r)
        value = solve_gradient_system(mesh, 10.0, q, nl).lam
        bound = analysis.resonant_upper_bound(10.0, q, 1.0, big_lam) if q < 10.0 else None
        rows.append([q, params.beta, value, bound])
        print(f"Table 7: q={q:g} Lambda = {value:.5g}")
    return repository.save_rows(out, "table7", ["q", "beta", "Lambda", "upper_bound"], rows)


def figure1(out: Path, n: int):
    grid = [1.0 + 0.1 * i for i in range(1, 41)] + [1.0, float("inf")]
    curve = analysis.f_curve(sorted(grid), n)
    return repository.save_rows(out, "figure1", ["p", "f"], [[p, f] for p, f in curve])


def main():
    parser = argparse.ArgumentParser(description="Reproduce the published eigenvalue tables as CSV")
    parser.add_argument("--tables", default="1,2,3,4,5,6,7,fig1",
                        help="Comma-separated list of tables (1-7, fig1)")
    parser.add_argument("--output-dir", default="./tables", help="Directory for CSV files")
    parser.add_argument("--n", type=int, default=500, help="Elements for 1D runs")
    parser.add_argument("--h", type=float, default=1.0 / 16.0, help="Mesh size for 2D runs")
    parser.add_argument("--levels", type=int, default=5, help="Refinement levels for Table 5")
    parser.add_argument("--verbose", action="store_true", help="Verbose output")
    args = parser.parse_args()

    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING)
    out = Path(args.output_dir)
    jobs = {
        "1": lambda: table1(out, args.n),
        "2": lambda: table2(out, args.n),
        "3": lambda: table3(out, args.n),
        "4": lambda: table4(out, args.h),
        "5": lambda: table5(out, args.levels),
        "6": lambda: table6(out, args.h),
        "7": lambda: table7(out, args.h),
        "fig1": lambda: figure1(out, args.n),
    }
    for name in [t.strip() for t in args.tables.split(",") if t.strip()]:
        if name not in jobs:
            print(f"Error: unknown table '{name}'")
            sys.exit(1)
        path = jobs[name]()
        print(f"✓ Wrote {path}")


if __name__ == "__main__":
    main()
