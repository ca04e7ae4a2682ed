"""Eigenvalue bounds, the f(p) diagnostic and convergence-order utilities."""

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np
from scipy.special import betaln

from pq_eigen.core.eigensolver import solve_scalar
from pq_eigen.core.errors import BoundError, EOCUndefinedError
from pq_eigen.core.fem import function_space, lp_norm
from pq_eigen.core.mesh import boundary_distance, generate_interval
from pq_eigen.models.mesh import FemFunction, Mesh1D
from pq_eigen.models.params import CONSTRAINT_TOL, NewtonConfig, OuterConfig, SystemParams
from pq_eigen.models.results import BoundReport

logger = logging.getLogger(__name__)


def beta_fn(r: float, s: float) -> float:
    """Euler beta function B(r, s) through log-gamma."""
    if r <= 0.0 or s <= 0.0:
        raise ValueError(f"beta function arguments must be positive, got ({r}, {s})")
    return math.exp(betaln(r, s))


def lower_bound(lam_p: float, lam_q: float) -> float:
    """min(lambda(p), lambda(q)), a lower bound for lambda(p, q)."""
    if lam_p <= 0.0 or lam_q <= 0.0:
        raise BoundError(f"scalar eigenvalues must be positive, got ({lam_p}, {lam_q})")
    return min(lam_p, lam_q)


def bound_constant(p: float, q: float, alpha: float, beta: float) -> float:
    """C = (1+p)^(a/p) (1+q)^(b/q) B(1+a, 1+b) of the interval upper bound."""
    residual = alpha / p + beta / q - 1.0
    if abs(residual) > CONSTRAINT_TOL:
        raise BoundError(f"alpha/p + beta/q must equal 1; residual {residual:.6g}")
    return (1.0 + p) ** (alpha / p) * (1.0 + q) ** (beta / q) * beta_fn(1.0 + alpha, 1.0 + beta)


def upper_bound_1d(p: float, q: float, alpha: float, beta: float,
                   lam_p: float, lam_q: float) -> float:
    """Upper bound for lambda(p, q) on the unit interval."""
    c = bound_constant(p, q, alpha, beta)
    return (alpha / p * lam_p + beta / q * lam_q) / c


def upper_bound_2d(area: float, rho: float, p: float, q: float,
                   lam_p: float, lam_q: float) -> float:
    """3 |Omega| / |B_rho| (lambda(p)/p + lambda(q)/q), valid for convex domains,
    alpha = beta = 1 and only if the f(p) hypothesis holds."""
    if area <= 0.0 or rho <= 0.0:
        raise BoundError(f"area and inscribed radius must be positive, got ({area}, {rho})")
    return 3.0 * area / (math.pi * rho ** 2) * (lam_p / p + lam_q / q)


def ball_bound(dim: int, p: float, q: float, lam_p: float, lam_q: float) -> float:
    """(N + 1)(lambda(p)/p + lambda(q)/q) on an N-ball (same hypothesis as upper_bound_2d)."""
    if dim < 1:
        raise BoundError(f"dimension must be at least 1, got {dim}")
    return (dim + 1) * (lam_p / p + lam_q / q)


def resonant_upper_bound(p: float, q: float, m: float, lam_p: float) -> float:
    """Upper bound for the resonant system with weight r >= m, valid for p > q."""
    if p <= q:
        raise BoundError(f"bound requires p > q (got p={p}, q={q})")
    if m <= 0.0:
        raise BoundError(f"weight lower bound m must be positive, got {m}")
    return lam_p / p + m ** (-1.0 + q / p) / q * (p / q) ** q * lam_p ** (q / p)


CONVEX_KINDS = ("rectangle", "isosceles_triangle")


def bound_report(params: SystemParams, lam_p: float, lam_q: float, domain: str,
                 area: Optional[float] = None, rho: Optional[float] = None,
                 resonant_m: Optional[float] = None,
                 resonant_lam_p: Optional[float] = None,
                 length: float = 1.0) -> BoundReport:
    """Collect the bounds that apply to a domain and parameter set.

    Resonant systems (``resonant_m`` given) get only their own upper bound:
    min(lambda(p), lambda(q)) does not bound them from below.
    The interval bound holds on the unit interval only; other lengths get
    the lower bound alone.
    """
    inputs: Dict[str, float] = {"lambda_p": lam_p, "lambda_q": lam_q}
    if resonant_m is not None:
        big_lam = resonant_lam_p if resonant_lam_p is not None else lam_p
        inputs.update({"m": resonant_m, "Lambda_p": big_lam})
        if params.p > params.q:
            upper = resonant_upper_bound(params.p, params.q, resonant_m, big_lam)
            return BoundReport(0.0, "resonant", upper, False, inputs)
        return BoundReport(0.0, "none", None, False, inputs)

    lower = lower_bound(lam_p, lam_q)
    unit_pair = params.alpha == 1.0 and params.beta == 1.0
    if domain == "interval" and abs(length - 1.0) <= CONSTRAINT_TOL:
        c = bound_constant(params.p, params.q, params.alpha, params.beta)
        inputs["C"] = c
        upper = upper_bound_1d(params.p, params.q, params.alpha, params.beta, lam_p, lam_q)
        return BoundReport(lower, "one_d", upper, False, inputs)
    if domain == "disc_radial" and unit_pair:
        inputs["N"] = 2
        return BoundReport(lower, "ball", ball_bound(2, params.p, params.q, lam_p, lam_q), True, inputs)
    if domain in CONVEX_KINDS and unit_pair and area is not None and rho is not None:
        inputs.update({"area": area, "rho": rho})
        upper = upper_bound_2d(area, rho, params.p, params.q, lam_p, lam_q)
        return BoundReport(lower, "convex_2d", upper, True, inputs)
    return BoundReport(lower, "none", None, False, inputs)


# f(p) diagnostic on the unit interval

def _conjugate(p: float) -> float:
    if math.isinf(p):
        return 1.0
    if p == 1.0:
        return math.inf
    return p / (p - 1.0)


def limit_field(mesh: Mesh1D, p: float) -> FemFunction:
    """Closed-form limits: the characteristic function (p = 1) and 1 - |2x - 1| (p = inf)."""
    x = mesh.node_coords
    if p == 1.0:
        return FemFunction(mesh, np.ones_like(x))
    if math.isinf(p):
        return FemFunction(mesh, 1.0 - np.abs(2.0 * x - 1.0))
    raise ValueError(f"no closed-form field for p={p}")


def f_value(u: FemFunction, v: FemFunction) -> float:
    """Integral of u * v with the degree-2 rule (exact for P1 products)."""
    space = function_space(u.mesh)
    return space.integrate(space.at_quadrature(u.coefficients) * space.at_quadrature(v.coefficients))


def f_curve(p_values: Iterable[float], n: int = 500, outer: Optional[OuterConfig] = None,
            newton: Optional[NewtonConfig] = None, threads: int = 1) -> List[Tuple[float, float]]:
    """f(p) = integral of u(p) u(p') over (0, 1) with ||u(p)||_{L^p} = 1.

    Each distinct exponent is solved once; conjugate pairs share fields.
    """
    p_values = list(p_values)
    for p in p_values:
        if not (p >= 1.0):
            raise ValueError(f"p must lie in [1, inf], got {p}")
    mesh = generate_interval(0.0, 1.0, n)
    exponents = sorted({e for p in p_values for e in (p, _conjugate(p))})
    solvable = [e for e in exponents if e != 1.0 and not math.isinf(e)]

    def field(e: float) -> FemFunction:
        return solve_scalar(mesh, e, outer, newton).u

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            solved = dict(zip(solvable, pool.map(field, solvable)))
    else:
        solved = {e: field(e) for e in solvable}
    for e in exponents:
        if e not in solved:
            solved[e] = limit_field(mesh, e)

    curve = []
    for p in p_values:
        value = f_value(solved[p], solved[_conjugate(p)])
        logger.info("f(%g) = %.8f", p, value)
        curve.append((p, value))
    return curve


# Convergence orders and eigenfunction diagnostics

def eoc(lam_h: float, lam_h2: float, lam_h4: float) -> float:
    """log2 |(lam_h - lam_h2) / (lam_h2 - lam_h4)| for successive halvings of h."""
    first = lam_h - lam_h2
    second = lam_h2 - lam_h4
    if first == 0.0 or second == 0.0:
        raise EOCUndefinedError()
    return math.log2(abs(first / second))


def eoc_column(values: Sequence[float]) -> List[Optional[float]]:
    """EOC for each entry that has two finer successors (None elsewhere)."""
    column: List[Optional[float]] = []
    for i in range(len(values)):
        if i + 2 < len(values):
            try:
                column.append(eoc(values[i], values[i + 1], values[i + 2]))
            except EOCUndefinedError:
                column.append(None)
        else:
            column.append(None)
    return column


def domain_lp_norm(u: FemFunction, p: float) -> float:
    """L^p norm over the physical domain (radial meshes include the 2*pi factor)."""
    norm = lp_norm(u, p)
    if isinstance(u.mesh, Mesh1D) and u.mesh.is_radial:
        norm *= (2.0 * math.pi) ** (1.0 / p)
    return norm


def distance_field(mesh) -> np.ndarray:
    """Nodal distance to the boundary."""
    if isinstance(mesh, Mesh1D):
        x = mesh.node_coords
        if mesh.is_radial:
            return x[-1] - x
        return np.minimum(x - x[0], x[-1] - x)
    return boundary_distance(mesh, mesh.nodes)


def distance_gap(u: FemFunction, p: float) -> float:
    """Sup-norm distance between u / ||u||_{L^p} and the distance function."""
    d = distance_field(u.mesh)
    return float(np.max(np.abs(u.coefficients / domain_lp_norm(u, p) - d)))


def eigenfunction_gap(u: FemFunction, w: FemFunction, p: float = 2.0) -> float:
    """Sup-norm distance between two fields after normalising both in L^p."""
    if u.mesh is not w.mesh:
        raise ValueError("fields live on different meshes")
    a = u.coefficients / domain_lp_norm(u, p)
    b = w.coefficients / domain_lp_norm(w, p)
    return float(np.max(np.abs(a - b)))
