"""Business logic behind each CLI command."""

import logging
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Callable, Dict, List, Optional, Tuple

import numpy as np

from pq_eigen.core import analysis
from pq_eigen.core.eigensolver import (
    NAMED_WEIGHTS,
    GradientNonlinearity,
    bessel_mode,
    solve_eigenpair,
    solve_gradient_system,
    solve_scalar,
    solve_weighted_scalar,
)
from pq_eigen.core.errors import NewtonConvergenceError, SingularJacobianError
from pq_eigen.core.fem import quadrature_values
from pq_eigen.core.mesh import (
    domain_area,
    generate_interval,
    generate_radial,
    generate_structured_2d,
    inscribed_radius,
)
from pq_eigen.loaders.mesh_loader import read_mesh, read_nodal_values
from pq_eigen.models.config import RunConfig
from pq_eigen.models.mesh import Mesh, Mesh2D
from pq_eigen.models.params import DomainSpec, SystemParams
from pq_eigen.models.results import EigenResult

from . import repository

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_NOT_CONVERGED = 2
EXIT_IO = 3


@dataclass
class RunOutcome:
    """Exit status, summary record and the files a command wrote."""
    status: int
    summary: Dict[str, Any]
    artifacts: List[Path] = field(default_factory=list)
    table: Optional[Tuple[List[str], List[List[Any]]]] = None


def build_mesh(domain: DomainSpec, n: int = 500) -> Mesh:
    """Mesh for a domain: generated, or read from file for external domains."""
    if domain.kind == "interval":
        return generate_interval(0.0, domain.length, n)
    if domain.kind == "disc_radial":
        return generate_radial(n, domain.radius)
    if domain.kind == "external_file":
        return read_mesh(domain.path)
    return generate_structured_2d(domain)


def resolve_weight(name: Optional[str], mesh: Mesh):
    """Named weight function or nodal values from a file (None for no weight)."""
    if name is None:
        return None
    if name in NAMED_WEIGHTS:
        return NAMED_WEIGHTS[name]
    return read_nodal_values(name, mesh.n_nodes)


def _geometry(domain: DomainSpec, mesh: Mesh) -> Tuple[Optional[float], Optional[float]]:
    if isinstance(mesh, Mesh2D):
        return domain_area(mesh), inscribed_radius(mesh)
    return None, None


def scalar_pair(config: RunConfig, mesh: Mesh, params: SystemParams) -> Tuple[float, float]:
    """lambda(p) and lambda(q) on the same mesh (solved once when p == q)."""
    lam_p = solve_scalar(mesh, params.p, newton=config.newton,
                         outer=config.outer.model_copy(update={"initial_guess": "default_bump"})).lam
    if params.q == params.p:
        return lam_p, lam_p
    lam_q = solve_scalar(mesh, params.q, newton=config.newton,
                         outer=config.outer.model_copy(update={"initial_guess": "default_bump"})).lam
    return lam_p, lam_q


def _bounds(config: RunConfig, mesh: Mesh, params: SystemParams) -> Dict[str, Any]:
    lam_p, lam_q = scalar_pair(config, mesh, params)
    area, rho = _geometry(config.domain, mesh)
    return analysis.bound_report(params, lam_p, lam_q, config.domain.kind, area, rho,
                                 length=config.domain.length).to_dict()


def _finish(config: RunConfig, result: EigenResult, extra: Dict[str, Any]) -> RunOutcome:
    out = Path(config.out)
    summary = repository.summary_of(result, extra)
    artifacts = [repository.save_summary(out, summary, config.format),
                 repository.save_history(out, result.history, config.format)]
    if config.export_field:
        artifacts.append(repository.save_field(out, result))
    status = EXIT_OK if result.converged else EXIT_NOT_CONVERGED
    return RunOutcome(status, summary, artifacts)


def run_solve(config: RunConfig, with_bounds: bool = False) -> RunOutcome:
    mesh = build_mesh(config.domain, config.n)
    params = config.system_params()
    weight = resolve_weight(config.weight, mesh)
    result = solve_eigenpair(mesh, params, config.outer, config.newton, weight=weight,
                             threads=config.threads)
    extra: Dict[str, Any] = {"params": params.model_dump(), "domain": config.domain.kind,
                             "nodes": mesh.n_nodes, "elements": mesh.n_elements}
    if config.domain.kind == "disc_radial" and params.p == params.q == 2.0:
        extra["bessel_gap"] = analysis.eigenfunction_gap(result.u, bessel_mode(mesh))
    if with_bounds and weight is None:
        report = _bounds(config, mesh, params)
        extra["bounds"] = report
    outcome = _finish(config, result, extra)
    if with_bounds and "bounds" in extra:
        report = extra["bounds"]
        rows = [["lower", report["lower"]], [report["upper_kind"], report["upper"]],
                ["lambda", result.lam]]
        outcome.artifacts.append(repository.save_rows(Path(config.out), "bounds", ["bound", "value"],
                                                      rows, config.format))
    return outcome


def run_scalar(config: RunConfig) -> RunOutcome:
    mesh = build_mesh(config.domain, config.n)
    weight = resolve_weight(config.weight, mesh)
    if weight is not None:
        result = solve_weighted_scalar(mesh, config.p, weight, config.outer, config.newton)
    else:
        result = solve_scalar(mesh, config.p, config.outer, config.newton)
    extra = {
        "p": config.p,
        "domain": config.domain.kind,
        "lambda_root": result.lam ** (1.0 / config.p),
        "distance_gap": analysis.distance_gap(result.u, config.p),
    }
    return _finish(config, result, extra)


def run_resonant(config: RunConfig) -> RunOutcome:
    mesh = build_mesh(config.domain, config.n)
    params = config.system_params()
    weight = resolve_weight(config.weight or "step2", mesh)
    r = quadrature_values(mesh, weight)
    m = float(np.min(r))
    nl = GradientNonlinearity.resonant(params.alpha, params.beta, r)
    result = solve_gradient_system(mesh, params.p, params.q, nl, config.outer, config.newton,
                                   threads=config.threads)
    extra: Dict[str, Any] = {"params": params.model_dump(), "domain": config.domain.kind, "m": m}
    if params.p > params.q:
        big_lam_p = solve_weighted_scalar(mesh, params.p, weight, newton=config.newton).lam
        big_lam_q = solve_weighted_scalar(mesh, params.q, weight, newton=config.newton).lam
        report = analysis.bound_report(params, big_lam_p, big_lam_q, config.domain.kind,
                                       resonant_m=m, resonant_lam_p=big_lam_p)
        extra["bounds"] = report.to_dict()
    return _finish(config, result, extra)


def run_eoc_study(config: RunConfig) -> RunOutcome:
    params = config.system_params()
    rows: List[List[Any]] = []
    lambdas: List[float] = []
    status = EXIT_OK
    for h in config.h_values:
        domain = config.domain.model_copy(update={"h": h})
        mesh = build_mesh(domain, config.n)
        result = solve_eigenpair(mesh, params, config.outer, config.newton, threads=config.threads)
        if not result.converged:
            status = EXIT_NOT_CONVERGED
        lambdas.append(result.lam)
        rows.append([h, mesh.n_elements, result.lam, result.outer_iters])
        logger.info("h=%g: lambda=%.10g (%d outer iterations)", h, result.lam, result.outer_iters)
    orders = analysis.eoc_column(lambdas)
    for row, order in zip(rows, orders):
        row.append(order)
    header = ["h", "elements", "lambda", "outer_iters", "eoc"]
    out = Path(config.out)
    summary = {"params": params.model_dump(), "domain": config.domain.kind,
               "lambda": lambdas, "eoc": orders}
    artifacts = [repository.save_rows(out, "eoc", header, rows, config.format),
                 repository.save_summary(out, summary, "json")]
    return RunOutcome(status, summary, artifacts, (header, rows))


def run_fp_curve(config: RunConfig) -> RunOutcome:
    curve = analysis.f_curve(config.p_values, config.n, config.outer, config.newton, config.threads)
    rows = [[p, f] for p, f in curve]
    header = ["p", "f"]
    summary = {
        "n": config.n,
        "max_f": max(f for _, f in curve),
        "argmax_p": max(curve, key=lambda item: item[1])[0],
    }
    out = Path(config.out)
    artifacts = [repository.save_rows(out, "fp_curve", header, rows, config.format),
                 repository.save_summary(out, summary, "json")]
    return RunOutcome(EXIT_OK, summary, artifacts, (header, rows))


COMMANDS: Dict[str, Callable[[RunConfig], RunOutcome]] = {
    "solve": run_solve,
    "radial": run_solve,
    "bounds": lambda config: run_solve(config, with_bounds=True),
    "scalar": run_scalar,
    "resonant": run_resonant,
    "eoc-study": run_eoc_study,
    "fp-curve": run_fp_curve,
}


def run(config: RunConfig) -> RunOutcome:
    """Execute a command; solver failures still leave the history on disk."""
    try:
        return COMMANDS[config.command](config)
    except (NewtonConvergenceError, SingularJacobianError) as exc:
        history = getattr(exc, "history", [])
        out = Path(config.out)
        artifacts = [repository.save_history(out, history, config.format)] if history else []
        summary = {"error": str(exc), "converged": False,
                   "lambda": history[-1].lam if history else math.nan}
        artifacts.append(repository.save_summary(out, summary, config.format))
        logger.error("%s", exc)
        return RunOutcome(EXIT_NOT_CONVERGED, summary, artifacts)
