"""Piecewise-linear finite elements and the damped Newton p-Poisson solver.

Stiffness terms are integrated exactly (P1 gradients are constant per
element); sources and coupling terms use degree-2 Gauss rules, 2 points on
intervals and 3 points on triangles. Radial meshes carry the weight r in
both, so all integrals on a radial mesh omit the angular factor 2*pi.
"""

import logging
from functools import lru_cache
from typing import Callable, List, Optional, Sequence, Union

import numpy as np
import scipy.sparse as sp
from scipy.sparse.linalg import cg, spsolve

from pq_eigen.core.errors import (
    InadmissiblePairError,
    NewtonConvergenceError,
    SingularJacobianError,
)
from pq_eigen.models.mesh import FemFunction, Mesh
from pq_eigen.models.params import NewtonConfig, SystemParams
from pq_eigen.models.results import NewtonOutcome

logger = logging.getLogger(__name__)

Source = Union[Callable[[np.ndarray], np.ndarray], np.ndarray, FemFunction, float]

_GAUSS_1D = np.array([0.5 - 0.5 / np.sqrt(3.0), 0.5 + 0.5 / np.sqrt(3.0)])
_GAUSS_TRI = np.array([[1.0 / 6.0, 1.0 / 6.0], [2.0 / 3.0, 1.0 / 6.0], [1.0 / 6.0, 2.0 / 3.0]])
_REF_GRADS_TRI = np.array([[-1.0, -1.0], [1.0, 0.0], [0.0, 1.0]])
_ARMIJO = 1e-4


class P1Space:
    """Element geometry, basis gradients and quadrature for one mesh."""

    def __init__(self, mesh: Mesh):
        self.mesh = mesh
        self.cells = mesh.cells
        if mesh.dim == 1:
            self._init_interval()
        else:
            self._init_triangles()
        dirichlet = mesh.dirichlet_nodes
        free = np.ones(mesh.n_nodes, dtype=bool)
        free[dirichlet] = False
        self.dirichlet = dirichlet
        self.free = np.nonzero(free)[0]

    def _init_interval(self):
        x = self.mesh.node_coords
        xa, xb = x[:-1], x[1:]
        length = xb - xa
        self.measure = length
        self.grads = np.stack([-1.0 / length, 1.0 / length], axis=1)[:, :, None]
        self.quad_phi = np.stack([1.0 - _GAUSS_1D, _GAUSS_1D], axis=1)
        qp = xa[:, None] + length[:, None] * _GAUSS_1D[None, :]
        weights = 0.5 * length[:, None] * np.ones_like(_GAUSS_1D)[None, :]
        if self.mesh.is_radial:
            self.stiff_weight = 0.5 * (xb ** 2 - xa ** 2)
            weights = weights * qp
        else:
            self.stiff_weight = length
        self.quad_points = qp[:, :, None]
        self.quad_weights = weights

    def _init_triangles(self):
        corners = self.mesh.nodes[self.cells]
        jac = np.stack([corners[:, 1] - corners[:, 0], corners[:, 2] - corners[:, 0]], axis=2)
        det = np.linalg.det(jac)
        inv = np.linalg.inv(jac)
        area = 0.5 * np.abs(det)
        self.measure = area
        self.stiff_weight = area
        self.grads = np.einsum("kj,mji->mki", _REF_GRADS_TRI, inv)
        xi, eta = _GAUSS_TRI[:, 0], _GAUSS_TRI[:, 1]
        self.quad_phi = np.stack([1.0 - xi - eta, xi, eta], axis=1)
        self.quad_points = np.einsum("qk,mkd->mqd", self.quad_phi, corners)
        self.quad_weights = np.repeat(area[:, None] / 3.0, 3, axis=1)

    @property
    def n_nodes(self) -> int:
        return self.mesh.n_nodes

    def gradients(self, u: np.ndarray) -> np.ndarray:
        """Element-wise constant gradients, shape (elements, dim)."""
        return np.einsum("mkd,mk->md", self.grads, u[self.cells])

    def at_quadrature(self, u: np.ndarray) -> np.ndarray:
        """Nodal field evaluated at quadrature points, shape (elements, points)."""
        return np.einsum("qk,mk->mq", self.quad_phi, u[self.cells])

    def integrate(self, values: np.ndarray) -> float:
        return float(np.sum(self.quad_weights * values))

    def load_vector(self, values: np.ndarray) -> np.ndarray:
        """Assemble b_i = integral of f * phi_i from quadrature-point values of f."""
        local = np.einsum("mq,qk->mk", self.quad_weights * values, self.quad_phi)
        return np.bincount(self.cells.ravel(), weights=local.ravel(), minlength=self.n_nodes)

    def scatter(self, local: np.ndarray) -> np.ndarray:
        return np.bincount(self.cells.ravel(), weights=local.ravel(), minlength=self.n_nodes)

    def assemble(self, local: np.ndarray) -> sp.csr_matrix:
        """Assemble element matrices (elements, k, k) into a CSR matrix."""
        k = self.cells.shape[1]
        rows = np.repeat(self.cells, k, axis=1).ravel()
        cols = np.tile(self.cells, (1, k)).ravel()
        n = self.n_nodes
        return sp.coo_matrix((local.ravel(), (rows, cols)), shape=(n, n)).tocsr()


@lru_cache(maxsize=32)
def function_space(mesh: Mesh) -> P1Space:
    """Shared P1 space of a mesh (meshes hash by identity)."""
    return P1Space(mesh)


def signed_power(x: np.ndarray, exponent: float) -> np.ndarray:
    """sign(x) * |x|**exponent, i.e. |x|^(e-1) x."""
    return np.sign(x) * np.abs(x) ** exponent


def quadrature_values(mesh: Mesh, source: Optional[Source]) -> np.ndarray:
    """Evaluate a source or weight at the quadrature points of a mesh.

    Accepts a callable of the quadrature coordinates (shape
    (elements, points, dim)), a FemFunction, a nodal array, an array already
    shaped (elements, points) or a scalar. ``None`` means the constant 1.
    """
    space = function_space(mesh)
    shape = space.quad_weights.shape
    if source is None:
        return np.ones(shape)
    if isinstance(source, FemFunction):
        if source.mesh is not mesh:
            raise ValueError("field lives on a different mesh")
        return space.at_quadrature(source.coefficients)
    if callable(source):
        values = np.asarray(source(space.quad_points), dtype=float)
        return np.broadcast_to(values, shape).astype(float)
    values = np.asarray(source, dtype=float)
    if values.ndim == 0:
        return np.full(shape, float(values))
    if values.shape == shape:
        return values
    if values.ndim == 1 and values.size == mesh.n_nodes:
        return space.at_quadrature(values)
    raise ValueError(
        f"cannot interpret source of shape {values.shape} on a mesh with "
        f"{mesh.n_nodes} nodes and quadrature shape {shape}"
    )


def _same_mesh(u: FemFunction, v: FemFunction):
    if u.mesh is not v.mesh:
        raise ValueError("u and v live on different meshes")


def integrate(u: FemFunction, weight: Optional[Source] = None) -> float:
    space = function_space(u.mesh)
    return space.integrate(quadrature_values(u.mesh, weight) * space.at_quadrature(u.coefficients))


def integrate_coupling(u: FemFunction, alpha: float, v: FemFunction, beta: float,
                       weight: Optional[Source] = None) -> float:
    """Signed coupling integral of w |u|^(a-1) |v|^(b-1) u v."""
    _same_mesh(u, v)
    space = function_space(u.mesh)
    uq = space.at_quadrature(u.coefficients)
    vq = space.at_quadrature(v.coefficients)
    w = quadrature_values(u.mesh, weight)
    return space.integrate(w * signed_power(uq, alpha) * signed_power(vq, beta))


def lp_norm(u: FemFunction, p: float, weight: Optional[Source] = None) -> float:
    space = function_space(u.mesh)
    uq = space.at_quadrature(u.coefficients)
    w = quadrature_values(u.mesh, weight)
    return space.integrate(w * np.abs(uq) ** p) ** (1.0 / p)


def grad_energy(u: FemFunction, p: float, weight: Optional[Source] = None) -> float:
    """Integral of |grad u|^p (radial meshes: weighted by r)."""
    space = function_space(u.mesh)
    norms = np.linalg.norm(space.gradients(u.coefficients), axis=1) ** p
    if weight is None:
        return float(np.sum(space.stiff_weight * norms))
    w = quadrature_values(u.mesh, weight)
    return float(np.sum(norms * np.sum(space.quad_weights * w, axis=1)))


def rayleigh(u: FemFunction, v: FemFunction, params: SystemParams,
             weight: Optional[Source] = None) -> float:
    """Rayleigh quotient of the coupled system; rejects pairs outside the admissible set."""
    coupling = integrate_coupling(u, params.alpha, v, params.beta, weight)
    if not coupling > 0.0:
        raise InadmissiblePairError(coupling)
    numerator = (params.alpha / params.p) * grad_energy(u, params.p) \
        + (params.beta / params.q) * grad_energy(v, params.q)
    return numerator / coupling


class PLaplaceProblem:
    """Galerkin residual, Jacobian and energy of -div(|grad u|_eps^(p-2) grad u) = f."""

    def __init__(self, space: P1Space, p: float, load: np.ndarray, regularization: float):
        if p <= 1.0:
            raise ValueError(f"p must exceed 1, got {p}")
        self.space = space
        self.p = p
        self.load = load
        self.eps2 = regularization ** 2

    def _flux_terms(self, u: np.ndarray):
        g = self.space.gradients(u)
        s = np.sum(g * g, axis=1) + self.eps2
        return g, s

    def residual(self, u: np.ndarray) -> np.ndarray:
        with np.errstate(over="ignore", invalid="ignore", divide="ignore"):
            g, s = self._flux_terms(u)
            flux = (s ** ((self.p - 2.0) / 2.0))[:, None] * g
            local = self.space.stiff_weight[:, None] * np.einsum("mkd,md->mk", self.space.grads, flux)
        return self.space.scatter(local) - self.load

    def jacobian(self, u: np.ndarray) -> sp.csr_matrix:
        p = self.p
        with np.errstate(over="ignore", invalid="ignore", divide="ignore"):
            g, s = self._flux_terms(u)
            dim = g.shape[1]
            a = s ** ((p - 2.0) / 2.0)
            # p = 2 has no rank-one term; skipping it avoids 0 * inf at zero gradients.
            b = (p - 2.0) * s ** ((p - 4.0) / 2.0) if p != 2.0 else np.zeros_like(s)
            tangent = a[:, None, None] * np.eye(dim)[None] + b[:, None, None] * np.einsum("md,me->mde", g, g)
            local = self.space.stiff_weight[:, None, None] * np.einsum(
                "mkd,mde,mle->mkl", self.space.grads, tangent, self.space.grads
            )
        return self.space.assemble(local)

    def energy(self, u: np.ndarray) -> float:
        with np.errstate(over="ignore", invalid="ignore"):
            _, s = self._flux_terms(u)
            value = float(np.sum(self.space.stiff_weight * s ** (self.p / 2.0)) / self.p)
        return value - float(self.load @ u)


def _check_diagonal(space: P1Space, jac: sp.csr_matrix):
    diag = jac.diagonal()
    bad = ~np.isfinite(diag) | (diag <= 0.0)
    if np.any(bad):
        node = space.free[np.nonzero(bad)[0][0]]
        element = int(np.nonzero(np.any(space.cells == node, axis=1))[0][0])
        raise SingularJacobianError(element)


def _linear_solve(jac: sp.csr_matrix, rhs: np.ndarray, cfg: NewtonConfig) -> np.ndarray:
    if cfg.linear_solver == "cg":
        x, info = cg(jac, rhs, rtol=1e-12, maxiter=10 * rhs.size)
        if info == 0:
            return x
        logger.warning("cg stopped with info=%d; falling back to a direct solve", info)
    return spsolve(jac.tocsc(), rhs)


def newton_solve(problem: PLaplaceProblem, cfg: NewtonConfig,
                 initial: Optional[np.ndarray] = None,
                 outer_index: Optional[int] = None) -> NewtonOutcome:
    """Damped Newton iteration for one p-Poisson problem.

    Converges when the free-node residual satisfies
    ||R|| <= max(residual_tol, relative_tol * ||b||). For p >= 2 a step is
    accepted once it lowers the residual norm or meets the Armijo decrease
    of the convex energy. For p < 2 the flux is not Lipschitz at vanishing
    gradients and the residual norm is a poor merit function: only the
    Armijo energy test accepts steps, and the iteration also stops once the
    Newton decrement R.J^-1.R falls below decrement_tol * |b.u|. If no step
    is accepted but ||R|| <= stall_tol * ||b||, the iterate is returned as
    converged to round-off.
    """
    space = problem.space
    free = space.free
    u = np.zeros(space.n_nodes) if initial is None else np.array(initial, dtype=float)
    u[space.dirichlet] = 0.0

    load_norm = float(np.linalg.norm(problem.load[free]))
    if load_norm == 0.0:
        return NewtonOutcome(FemFunction(space.mesh, np.zeros(space.n_nodes)), 0, 0.0)
    tol = max(cfg.residual_tol, cfg.relative_tol * load_norm)
    stall = cfg.stall_tol * load_norm
    energy_only = problem.p < 2.0

    res = problem.residual(u)[free]
    res_norm = float(np.linalg.norm(res))
    if not np.isfinite(res_norm):
        u = np.zeros(space.n_nodes)
        res = problem.residual(u)[free]
        res_norm = float(np.linalg.norm(res))

    for it in range(1, cfg.max_iters + 1):
        if res_norm <= tol:
            return NewtonOutcome(FemFunction(space.mesh, u), it - 1, res_norm)

        jac = problem.jacobian(u)[free][:, free]
        _check_diagonal(space, jac)
        step = -_linear_solve(jac, res, cfg)
        if not np.all(np.isfinite(step)):
            raise SingularJacobianError()

        energy0 = problem.energy(u)
        slope = float(res @ step)
        if energy_only:
            scale = abs(float(problem.load @ u))
            if scale > 0.0 and -slope <= cfg.decrement_tol * scale:
                u = u.copy()
                u[free] += step
                res_norm = float(np.linalg.norm(problem.residual(u)[free]))
                logger.debug("Newton p=%g stopped on the decrement %.3e after %d iterations",
                             problem.p, -slope, it)
                return NewtonOutcome(FemFunction(space.mesh, u), it, res_norm)

        t = 1.0
        accepted = False
        halvings = 0 if cfg.damping == "none" else cfg.max_halvings
        for _ in range(halvings + 1):
            trial = u.copy()
            trial[free] += t * step
            trial_res = problem.residual(trial)[free]
            trial_norm = float(np.linalg.norm(trial_res))
            if cfg.damping == "none":
                accepted = np.isfinite(trial_norm)
                break
            if np.isfinite(trial_norm):
                if trial_norm < res_norm and not energy_only:
                    accepted = True
                    break
                trial_energy = problem.energy(trial)
                if np.isfinite(trial_energy) and trial_energy <= energy0 + _ARMIJO * t * slope:
                    accepted = True
                    break
            t *= 0.5

        if not accepted:
            if res_norm <= stall:
                logger.debug("Newton stalled at round-off: |R|=%.3e after %d iterations",
                             res_norm, it - 1)
                return NewtonOutcome(FemFunction(space.mesh, u), it - 1, res_norm)
            raise NewtonConvergenceError(res_norm, it, outer_index)

        u, res, res_norm = trial, trial_res, trial_norm
        logger.debug("Newton p=%g it=%d |R|=%.3e step=%g", problem.p, it, res_norm, t)

    if res_norm <= max(tol, stall):
        return NewtonOutcome(FemFunction(space.mesh, u), cfg.max_iters, res_norm)
    raise NewtonConvergenceError(res_norm, cfg.max_iters, outer_index)


def default_ladder(p: float) -> List[float]:
    """Exponent ladder 2, 4, 8, ... below p (empty for p <= 10)."""
    if p <= 10.0:
        return []
    ladder = []
    e = 2.0
    while e < p:
        ladder.append(e)
        e *= 2.0
    return ladder


def descent_ladder(p: float, spacing: float = 0.1) -> List[float]:
    """Exponents between 2 and p < 2 with 1/(e - 1) evenly spaced.

    Gradients scale like the flux to the power 1/(p - 1), so equal steps in
    that exponent keep each rung close to the next one even where the flux
    is small.
    """
    if p >= 2.0:
        return []
    target = 1.0 / (p - 1.0)
    rungs = []
    k = 1
    while 1.0 + k * spacing < target - 1e-12:
        rungs.append(1.0 + 1.0 / (1.0 + k * spacing))
        k += 1
    return rungs


def cold_ladder(p: float, continuation: Sequence[float] = ()) -> List[float]:
    """Rungs for a solve started from zero: the linear problem first, then
    ``continuation`` (or 2, 4, 8, ... for p > 10) upwards, or the descent
    ladder for p < 2."""
    if p == 2.0:
        return []
    if p < 2.0:
        return [2.0] + descent_ladder(p)
    rungs = continuation or default_ladder(p)
    return [2.0] + [e for e in rungs if 2.0 < e < p]


def solve_with_ladder(space: P1Space, p: float, load: np.ndarray, cfg: NewtonConfig,
                      ladder: Sequence[float], initial: Optional[np.ndarray] = None,
                      outer_index: Optional[int] = None) -> NewtonOutcome:
    """Solve for exponent p after walking the given continuation rungs in order."""
    guess = initial
    iterations = 0
    for exponent in ladder:
        step = newton_solve(PLaplaceProblem(space, exponent, load, cfg.regularization),
                            cfg, guess, outer_index)
        guess = step.u.coefficients
        iterations += step.iterations
    final = newton_solve(PLaplaceProblem(space, p, load, cfg.regularization), cfg, guess, outer_index)
    return NewtonOutcome(final.u, iterations + final.iterations, final.residual)


def solve_p_poisson(mesh: Mesh, p: float, f: Source, cfg: Optional[NewtonConfig] = None,
                    initial: Optional[FemFunction] = None) -> FemFunction:
    """Solve -div(|grad u|^(p-2) grad u) = f with homogeneous Dirichlet data.

    Cold starts (no ``initial``) begin from the linear p = 2 solution. For
    p > 10 they climb 2, 4, 8, ... unless ``cfg.continuation`` names its own
    exponents; for p < 2 they descend through ``descent_ladder(p)``.
    """
    cfg = cfg or NewtonConfig()
    space = function_space(mesh)
    load = space.load_vector(quadrature_values(mesh, f))
    if initial is not None:
        guess = initial.coefficients
        ladder: List[float] = [e for e in cfg.continuation if e < p]
    else:
        guess = None
        ladder = cold_ladder(p, cfg.continuation)
    outcome = solve_with_ladder(space, p, load, cfg, ladder, guess)
    logger.debug("p-Poisson p=%g solved in %d Newton iterations (|R|=%.3e)",
                 p, outcome.iterations, outcome.residual)
    return outcome.u
