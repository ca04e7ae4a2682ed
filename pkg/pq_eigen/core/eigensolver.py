"""Inverse-iteration fixed point for principal eigenpairs.

Every variant follows the same loop: normalise the current pair, read the
eigenvalue estimate off the gradient energies, then solve two decoupled
p- and q-Poisson problems whose right-hand sides are frozen at the current
pair. The variants differ only in how they normalise and in the
right-hand sides they build:

- ``CoupledIteration``: the coupled system with exponents (p, q, alpha, beta)
- ``GradientIteration``: gradient systems driven by a nonlinearity F(x, u, v)
- ``ScalarIteration``: the single-field p-Laplacian (optionally weighted)
"""

import logging
from abc import ABC, abstractmethod
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable, List, Optional, Tuple, Union

import numpy as np
from scipy.special import j0, jn_zeros

from pq_eigen.core.errors import (
    InadmissiblePairError,
    NewtonConvergenceError,
    SingularJacobianError,
)
from pq_eigen.core.fem import (
    Source,
    cold_ladder,
    default_ladder,
    function_space,
    grad_energy,
    integrate_coupling,
    lp_norm,
    quadrature_values,
    signed_power,
    solve_with_ladder,
)
from pq_eigen.core.mesh import generate_interval, generate_radial
from pq_eigen.models.mesh import FemFunction, Mesh, Mesh1D
from pq_eigen.models.params import NewtonConfig, OuterConfig, SystemParams
from pq_eigen.models.results import EigenResult, IterationRecord

logger = logging.getLogger(__name__)

Pair = Tuple[FemFunction, FemFunction]


class PairIteration(ABC):
    """Outer loop shared by all eigenpair iterations."""

    two_fields = True

    def __init__(self, mesh: Mesh, outer: Optional[OuterConfig] = None,
                 newton: Optional[NewtonConfig] = None, threads: int = 1):
        self.mesh = mesh
        self.space = function_space(mesh)
        self.outer = outer or OuterConfig()
        self.newton = newton or NewtonConfig()
        self.threads = max(1, threads)

    @property
    @abstractmethod
    def exponents(self) -> Tuple[float, float]:
        """Exponents of the two decoupled operators."""

    @abstractmethod
    def normalize(self, u: FemFunction, v: FemFunction) -> Tuple[FemFunction, FemFunction, float]:
        """Scale the pair onto the constraint set and return the eigenvalue estimate."""

    @abstractmethod
    def right_hand_sides(self, u: FemFunction, v: FemFunction,
                         lam: float) -> Tuple[np.ndarray, np.ndarray]:
        """Frozen sources at quadrature points for the two decoupled solves."""

    def _solve(self, exponent: float, source: np.ndarray, start: FemFunction, k: int):
        load = self.space.load_vector(source)
        rungs = self.newton.continuation or default_ladder(exponent)
        ladder = [e for e in rungs if e < exponent]
        try:
            return solve_with_ladder(self.space, exponent, load, self.newton, ladder,
                                     start.coefficients, outer_index=k)
        except NewtonConvergenceError:
            if exponent == 2.0:
                raise
            logger.info("warm start failed for p=%g at k=%d; restarting from the linear solve",
                        exponent, k)
            return solve_with_ladder(self.space, exponent, load, self.newton,
                                     cold_ladder(exponent, self.newton.continuation), None,
                                     outer_index=k)

    def _decoupled_solves(self, u: FemFunction, v: FemFunction, lam: float, k: int):
        p, q = self.exponents
        fu, fv = self.right_hand_sides(u, v, lam)
        if not self.two_fields:
            out = self._solve(p, fu, u, k)
            return out, None
        if self.threads > 1:
            with ThreadPoolExecutor(max_workers=2) as pool:
                job_u = pool.submit(self._solve, p, fu, u, k)
                job_v = pool.submit(self._solve, q, fv, v, k)
                return job_u.result(), job_v.result()
        return self._solve(p, fu, u, k), self._solve(q, fv, v, k)

    def run(self, u0: FemFunction, v0: Optional[FemFunction] = None, label: str = "") -> EigenResult:
        v0 = u0 if v0 is None else v0
        u, v, lam = self.normalize(u0, v0)
        history: List[IterationRecord] = [IterationRecord(0, lam, None, 0, 0)]
        logger.info("k=0 lambda=%.10g", lam)

        converged = False
        monotone = True
        for k in range(1, self.outer.max_outer + 1):
            try:
                out_u, out_v = self._decoupled_solves(u, v, lam, k)
            except (NewtonConvergenceError, SingularJacobianError) as exc:
                exc.history = list(history)
                raise
            new_v = out_v.u if out_v is not None else out_u.u
            u_next, v_next, lam_next = self.normalize(out_u.u, new_v)
            delta = abs(lam_next - lam)
            if lam_next > lam + self.outer.monotone_tol:
                monotone = False
                logger.warning("lambda increased at k=%d: %.12g -> %.12g", k, lam, lam_next)
            newton_v = out_v.iterations if out_v is not None else 0
            history.append(IterationRecord(k, lam_next, delta, out_u.iterations, newton_v))
            logger.info("k=%d lambda=%.10g delta=%.3e newton=(%d, %d)",
                        k, lam_next, delta, out_u.iterations, newton_v)
            u, v, lam = u_next, v_next, lam_next
            if delta < self.outer.eps:
                converged = True
                break

        if not converged:
            logger.warning("outer iteration stopped after %d steps without meeting eps=%g",
                           self.outer.max_outer, self.outer.eps)
        return EigenResult(lam=lam, u=u, v=v, history=history, converged=converged,
                           outer_iters=len(history) - 1, monotone=monotone, label=label)


class CoupledIteration(PairIteration):
    """Coupled system with signed right-hand sides lambda |u|^(a-1) |v|^(b-1) v and
    lambda |u|^(a-1) |v|^(b-1) u."""

    def __init__(self, mesh: Mesh, params: SystemParams, weight: Optional[Source] = None, **kwargs):
        super().__init__(mesh, **kwargs)
        self.params = params
        self.weight = weight
        self._w = quadrature_values(mesh, weight)

    @property
    def exponents(self):
        return self.params.p, self.params.q

    def normalize(self, u, v):
        return normalize_pair(u, v, self.params, self.weight)

    def right_hand_sides(self, u, v, lam):
        a, b = self.params.alpha, self.params.beta
        uq = self.space.at_quadrature(u.coefficients)
        vq = self.space.at_quadrature(v.coefficients)
        au = np.abs(uq) ** (a - 1.0)
        bv = np.abs(vq) ** (b - 1.0)
        return lam * self._w * au * bv * vq, lam * self._w * au * bv * uq


class ScalarIteration(PairIteration):
    """Single-field iteration with right-hand side lambda w |u|^(p-2) u and
    normalisation in the (weighted) L^p norm."""

    two_fields = False

    def __init__(self, mesh: Mesh, p: float, weight: Optional[Source] = None, **kwargs):
        super().__init__(mesh, **kwargs)
        if p <= 1.0:
            raise ValueError(f"p must exceed 1, got {p}")
        self.p = p
        self.weight = weight
        self._w = quadrature_values(mesh, weight)

    @property
    def exponents(self):
        return self.p, self.p

    def normalize(self, u, v):
        norm = lp_norm(u, self.p, self.weight)
        if not norm > 0.0:
            raise InadmissiblePairError(norm)
        u_k = u.scaled(1.0 / norm)
        return u_k, u_k, grad_energy(u_k, self.p)

    def right_hand_sides(self, u, v, lam):
        uq = self.space.at_quadrature(u.coefficients)
        source = lam * self._w * signed_power(uq, self.p - 1.0)
        return source, source


Callback = Callable[[np.ndarray, np.ndarray, np.ndarray], np.ndarray]


@dataclass(frozen=True)
class GradientNonlinearity:
    """Potential F(x, t, s) of a gradient system and its partial derivatives.

    Callbacks receive quadrature coordinates (elements, points, dim) and the
    values of u and v at those points. ``degrees`` are the homogeneity
    degrees of F in t and s when known. Growth conditions on F are the
    caller's responsibility.
    """
    F: Callback
    F_t: Callback
    F_s: Callback
    degrees: Optional[Tuple[float, float]] = None
    name: str = "custom"

    @classmethod
    def coupling(cls, alpha: float, beta: float) -> "GradientNonlinearity":
        """F = |t|^a |s|^b / a, whose gradient system is the coupled system (needs a = b)."""
        if abs(alpha - beta) > 1e-12:
            raise ValueError(
                f"the coupling potential reproduces the coupled system only for alpha == beta "
                f"(got alpha={alpha}, beta={beta})"
            )

        def F(x, t, s):
            return np.abs(t) ** alpha * np.abs(s) ** beta / alpha

        def F_t(x, t, s):
            return signed_power(t, alpha - 1.0) * np.abs(s) ** beta

        def F_s(x, t, s):
            return (beta / alpha) * np.abs(t) ** alpha * signed_power(s, beta - 1.0)

        return cls(F, F_t, F_s, degrees=(alpha, beta), name="coupling")

    @classmethod
    def resonant(cls, alpha: float, beta: float,
                 weight: Union[Callable[[np.ndarray], np.ndarray], np.ndarray, float] = 1.0
                 ) -> "GradientNonlinearity":
        """F = r(x) |t|^a |s|^b with a strictly positive weight r."""

        def r(x):
            return weight(x) if callable(weight) else weight

        def F(x, t, s):
            return r(x) * np.abs(t) ** alpha * np.abs(s) ** beta

        def F_t(x, t, s):
            return r(x) * alpha * signed_power(t, alpha - 1.0) * np.abs(s) ** beta

        def F_s(x, t, s):
            return r(x) * beta * np.abs(t) ** alpha * signed_power(s, beta - 1.0)

        return cls(F, F_t, F_s, degrees=(alpha, beta), name="resonant")


class GradientIteration(PairIteration):
    """Gradient-system iteration: normalise by (int F)^(1/p) and (int F)^(1/q)."""

    def __init__(self, mesh: Mesh, p: float, q: float, nl: GradientNonlinearity, **kwargs):
        super().__init__(mesh, **kwargs)
        self.p, self.q, self.nl = p, q, nl
        x = self.space.quad_points
        zeros = np.zeros(self.space.quad_weights.shape)
        origin = np.asarray(nl.F(x, zeros, zeros), dtype=float)
        if not np.allclose(origin, 0.0):
            raise ValueError(f"nonlinearity '{nl.name}' must satisfy F(x, 0, 0) = 0")
        if nl.degrees is not None:
            a, b = nl.degrees
            if abs(a / p + b / q - 1.0) > 1e-9:
                logger.warning("F is not (p, q)-homogeneous of total degree one: %g/%g + %g/%g != 1",
                               a, p, b, q)

    @property
    def exponents(self):
        return self.p, self.q

    def potential(self, u: FemFunction, v: FemFunction) -> float:
        uq = self.space.at_quadrature(u.coefficients)
        vq = self.space.at_quadrature(v.coefficients)
        return self.space.integrate(self.nl.F(self.space.quad_points, uq, vq))

    def quotient(self, u: FemFunction, v: FemFunction) -> float:
        """Rayleigh quotient ((1/p) int |grad u|^p + (1/q) int |grad v|^q) / int F."""
        total = self.potential(u, v)
        if not total > 0.0:
            raise InadmissiblePairError(total)
        return (grad_energy(u, self.p) / self.p + grad_energy(v, self.q) / self.q) / total

    def normalize(self, u, v):
        total = self.potential(u, v)
        if not total > 0.0:
            raise InadmissiblePairError(total)
        u_k = u.scaled(total ** (-1.0 / self.p))
        v_k = v.scaled(total ** (-1.0 / self.q))
        return u_k, v_k, self.quotient(u_k, v_k)

    def right_hand_sides(self, u, v, lam):
        x = self.space.quad_points
        uq = self.space.at_quadrature(u.coefficients)
        vq = self.space.at_quadrature(v.coefficients)
        return lam * self.nl.F_t(x, uq, vq), lam * self.nl.F_s(x, uq, vq)


def normalize_pair(u: FemFunction, v: FemFunction, params: SystemParams,
                   weight: Optional[Source] = None) -> Tuple[FemFunction, FemFunction, float]:
    """Scale (u, v) to unit coupling and return the eigenvalue estimate."""
    coupling = integrate_coupling(u, params.alpha, v, params.beta, weight)
    if not coupling > 0.0:
        raise InadmissiblePairError(coupling)
    u_k = u.scaled(coupling ** (-1.0 / params.p))
    v_k = v.scaled(coupling ** (-1.0 / params.q))
    lam = (params.alpha / params.p) * grad_energy(u_k, params.p) \
        + (params.beta / params.q) * grad_energy(v_k, params.q)
    return u_k, v_k, lam


# Initial guesses

def default_bump(mesh: Mesh) -> FemFunction:
    """Product bump over the bounding box, zero on Dirichlet nodes (1 - r^2 on radial meshes)."""
    if isinstance(mesh, Mesh1D):
        x = mesh.node_coords
        if mesh.is_radial:
            values = 1.0 - (x / x[-1]) ** 2
        else:
            a, b = x[0], x[-1]
            values = 4.0 * (x - a) * (b - x) / (b - a) ** 2
            if mesh.left_bc == "natural":
                values = 1.0 - ((x - a) / (b - a)) ** 2
            if mesh.right_bc == "natural":
                values = 1.0 - ((b - x) / (b - a)) ** 2
    else:
        lo, hi = mesh.nodes.min(axis=0), mesh.nodes.max(axis=0)
        half = 0.5 * (hi - lo)
        values = np.prod((mesh.nodes - lo) * (hi - mesh.nodes) / half ** 2, axis=1)
    values = np.clip(values, 0.0, None)
    values[mesh.dirichlet_nodes] = 0.0
    return FemFunction(mesh, values)


def _radius(mesh: Mesh) -> np.ndarray:
    if not (isinstance(mesh, Mesh1D) and mesh.is_radial):
        raise ValueError("this initial guess is defined on radial meshes only")
    return mesh.node_coords / mesh.node_coords[-1]


def radial_quadratic(mesh: Mesh) -> FemFunction:
    return FemFunction(mesh, (1.0 - _radius(mesh)) ** 2)


def radial_cosine(mesh: Mesh) -> Pair:
    r = _radius(mesh)
    return FemFunction(mesh, np.cos(np.pi * r / 2.0)), FemFunction(mesh, np.sin(np.pi * (r + 1.0) / 2.0))


def bessel_mode(mesh: Mesh) -> FemFunction:
    """First Dirichlet eigenfunction of the unit disc, J0(j01 r), unit norm in L^2(disc)."""
    r = _radius(mesh)
    values = j0(jn_zeros(0, 1)[0] * r)
    values[mesh.dirichlet_nodes] = 0.0
    w = FemFunction(mesh, values)
    return w.scaled(1.0 / np.sqrt(2.0 * np.pi * lp_norm(w, 2.0) ** 2))


def initial_pair(mesh: Mesh, kind: str) -> Pair:
    """Named initial guess as a pair of nodal fields."""
    if kind == "default_bump":
        u = default_bump(mesh)
        return u, u
    if kind == "radial_quadratic":
        u = radial_quadratic(mesh)
        return u, u
    if kind == "radial_cosine":
        return radial_cosine(mesh)
    if kind == "bessel":
        w = bessel_mode(mesh)
        return w, w
    raise ValueError(f"initial guess '{kind}' needs explicit fields or solver context")


def _start(mesh: Mesh, outer: OuterConfig, initial: Optional[Pair]) -> Pair:
    if initial is not None:
        u0, v0 = initial
        if u0.mesh is not mesh or v0.mesh is not mesh:
            raise ValueError("initial fields live on a different mesh")
        return u0, v0
    if outer.initial_guess == "supplied":
        raise ValueError("initial_guess='supplied' requires initial fields")
    return initial_pair(mesh, outer.initial_guess)


# Solvers

def solve_eigenpair(mesh: Mesh, params: SystemParams, outer: Optional[OuterConfig] = None,
                    newton: Optional[NewtonConfig] = None, initial: Optional[Pair] = None,
                    weight: Optional[Source] = None, threads: int = 1) -> EigenResult:
    """Principal eigenpair of the coupled system on a mesh."""
    outer = outer or OuterConfig()
    newton = newton or NewtonConfig()
    if initial is None and outer.initial_guess == "scalar":
        scalar_outer = outer.model_copy(update={"initial_guess": "default_bump"})
        u0 = solve_scalar(mesh, params.p, scalar_outer, newton).u
        v0 = u0 if params.q == params.p else solve_scalar(mesh, params.q, scalar_outer, newton).u
        initial = (u0, v0)
    u0, v0 = _start(mesh, outer, initial)
    iteration = CoupledIteration(mesh, params, weight, outer=outer, newton=newton, threads=threads)
    label = f"p={params.p:g} q={params.q:g} alpha={params.alpha:g} beta={params.beta:g}"
    return iteration.run(u0, v0, label)


def solve_radial(n: int, params: SystemParams, outer: Optional[OuterConfig] = None,
                 newton: Optional[NewtonConfig] = None, initial: Optional[Pair] = None,
                 threads: int = 1) -> EigenResult:
    """Coupled system on the unit disc through its radial reduction."""
    return solve_eigenpair(generate_radial(n), params, outer, newton, initial, threads=threads)


def solve_scalar(mesh: Union[Mesh, int], p: float, outer: Optional[OuterConfig] = None,
                 newton: Optional[NewtonConfig] = None, initial: Optional[FemFunction] = None,
                 weight: Optional[Source] = None) -> EigenResult:
    """Principal eigenpair of the (weighted) scalar p-Laplacian, ||u||_{L^p} = 1.

    An integer stands for the unit interval with that many elements. The
    eigen-iteration climbs ``outer.continuation`` (or 2, 4, 8, ... for
    p > 10) and warm-starts each rung from the previous eigenfunction.
    """
    if isinstance(mesh, int):
        mesh = generate_interval(0.0, 1.0, mesh)
    outer = outer or OuterConfig()
    newton = newton or NewtonConfig()
    if initial is None:
        kind = "default_bump" if outer.initial_guess in ("supplied", "scalar") else outer.initial_guess
        u = initial_pair(mesh, kind)[0]
    else:
        u = initial

    ladder = [e for e in (outer.continuation or default_ladder(p)) if e < p]
    for rung in ladder:
        step = ScalarIteration(mesh, rung, weight, outer=outer, newton=newton).run(u, label=f"p={rung:g}")
        logger.info("continuation rung p=%g: lambda=%.10g", rung, step.lam)
        u = step.u
    return ScalarIteration(mesh, p, weight, outer=outer, newton=newton).run(u, label=f"p={p:g}")


def solve_weighted_scalar(mesh: Mesh, p: float, weight: Source,
                          outer: Optional[OuterConfig] = None,
                          newton: Optional[NewtonConfig] = None) -> EigenResult:
    """Principal eigenpair of -Delta_p u = Lambda r |u|^(p-2) u for a weight r >= m > 0."""
    values = quadrature_values(mesh, weight)
    if not np.all(values > 0.0):
        raise ValueError(f"weight must be strictly positive (minimum {values.min():.6g})")
    return solve_scalar(mesh, p, outer, newton, weight=weight)


def solve_gradient_system(mesh: Mesh, p: float, q: float, nl: GradientNonlinearity,
                          outer: Optional[OuterConfig] = None,
                          newton: Optional[NewtonConfig] = None,
                          initial: Optional[Pair] = None, threads: int = 1) -> EigenResult:
    """Principal eigenpair of -Delta_p u = lambda F_u, -Delta_q v = lambda F_v."""
    outer = outer or OuterConfig()
    u0, v0 = _start(mesh, outer, initial)
    iteration = GradientIteration(mesh, p, q, nl, outer=outer, newton=newton, threads=threads)
    return iteration.run(u0, v0, label=f"{nl.name} p={p:g} q={q:g}")


def step2_weight(x: np.ndarray) -> np.ndarray:
    """Piecewise-constant weight equal to 1 for x1 <= 1 and 2 beyond."""
    return np.where(x[..., 0] <= 1.0, 1.0, 2.0)


NAMED_WEIGHTS = {"step2": step2_weight}
