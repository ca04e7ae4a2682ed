"""Tests for P1 integrals and the damped Newton p-Poisson solver."""

import numpy as np
import pytest

from conftest import bump
from pq_eigen.core.errors import InadmissiblePairError, NewtonConvergenceError, SingularJacobianError
from pq_eigen.core.fem import (
    PLaplaceProblem,
    cold_ladder,
    default_ladder,
    descent_ladder,
    function_space,
    grad_energy,
    integrate_coupling,
    lp_norm,
    newton_solve,
    quadrature_values,
    rayleigh,
    solve_p_poisson,
)
from pq_eigen.core.mesh import generate_interval
from pq_eigen.models.mesh import FemFunction
from pq_eigen.models.params import NewtonConfig, SystemParams


class TestIntegrals:
    """Test quadrature of couplings, norms and gradient energies."""

    def test_unit_coupling_on_square(self, unit_square):
        """Test the coupling of constants equals the area."""
        one = FemFunction(unit_square, np.ones(unit_square.n_nodes))
        assert integrate_coupling(one, 1.0, one, 1.0) == pytest.approx(1.0, abs=1e-12)

    def test_radial_coupling(self, radial):
        """Test the radial coupling of (1 - r)^2 with itself."""
        u = FemFunction(radial, (1.0 - radial.node_coords) ** 2)
        assert integrate_coupling(u, 1.0, u, 1.0) == pytest.approx(1.0 / 30.0, abs=1e-6)

    def test_coupling_sign(self, unit_square):
        """Test opposite-signed fields have a non-positive coupling."""
        u = bump(unit_square)
        assert integrate_coupling(u, 1.0, u.scaled(-1.0), 1.0) <= 0.0

    @pytest.mark.parametrize("p", [2.0, 10.0])
    def test_linear_field_energy(self, unit_square, p):
        """Test a unit-slope field has unit p-energy on the unit square."""
        u = FemFunction(unit_square, unit_square.nodes[:, 0].copy())
        assert grad_energy(u, p) == pytest.approx(1.0, abs=1e-12)

    def test_radial_energy(self, radial):
        """Test the radial Dirichlet energy of (1 - r)^2."""
        u = FemFunction(radial, (1.0 - radial.node_coords) ** 2)
        assert grad_energy(u, 2.0) == pytest.approx(1.0 / 3.0, abs=1e-6)

    def test_radial_rayleigh(self, radial):
        """Test the Rayleigh quotient of the quadratic profile."""
        u = FemFunction(radial, (1.0 - radial.node_coords) ** 2)
        params = SystemParams(p=2, q=2, alpha=1)
        assert rayleigh(u, u, params) == pytest.approx(10.0, abs=5e-4)

    def test_energy_homogeneity(self, coarse_square):
        """Test the p-energy is p-homogeneous."""
        u = bump(coarse_square, tilt=0.3)
        assert grad_energy(u.scaled(-2.5), 3.0) == pytest.approx(2.5 ** 3 * grad_energy(u, 3.0), rel=1e-12)

    def test_rayleigh_scaling_invariance(self, coarse_square):
        """Test (t^(1/p) u, t^(1/q) v) has the same quotient as (u, v)."""
        params = SystemParams(p=3, q=1.5, alpha=1)
        u, v = bump(coarse_square), bump(coarse_square, power=2.0, tilt=0.5)
        t = 7.0
        scaled = rayleigh(u.scaled(t ** (1 / 3)), v.scaled(t ** (1 / 1.5)), params)
        assert scaled == pytest.approx(rayleigh(u, v, params), rel=1e-12)

    def test_rayleigh_rejects_inadmissible(self, coarse_square):
        """Test a non-positive coupling raises."""
        u = bump(coarse_square)
        with pytest.raises(InadmissiblePairError):
            rayleigh(u, u.scaled(-1.0), SystemParams(p=2, q=2, alpha=1))

    def test_weighted_lp_norm(self, unit_square):
        """Test a constant weight scales the L^p norm."""
        u = bump(unit_square)
        assert lp_norm(u, 3.0, 8.0) == pytest.approx(2.0 * lp_norm(u, 3.0), rel=1e-12)

    def test_load_vector_sums_to_area(self, coarse_square):
        """Test the constant load integrates to the domain area."""
        space = function_space(coarse_square)
        assert space.load_vector(quadrature_values(coarse_square, 1.0)).sum() == pytest.approx(4.0)


class TestQuadratureValues:
    """Test the accepted source forms."""

    def test_forms_agree(self, unit_square):
        """Test callable, nodal and FemFunction sources of a linear field agree."""
        x = unit_square.nodes[:, 0].copy()
        from_callable = quadrature_values(unit_square, lambda pts: pts[..., 0])
        from_nodal = quadrature_values(unit_square, x)
        from_field = quadrature_values(unit_square, FemFunction(unit_square, x))
        assert np.allclose(from_callable, from_nodal)
        assert np.allclose(from_nodal, from_field)

    def test_scalar_and_none(self, unit_square):
        """Test scalars broadcast and None means one."""
        assert np.all(quadrature_values(unit_square, 2.5) == 2.5)
        assert np.all(quadrature_values(unit_square, None) == 1.0)

    def test_bad_shape(self, unit_square):
        """Test arrays of unrelated shape are rejected."""
        with pytest.raises(ValueError):
            quadrature_values(unit_square, np.zeros(7))


class TestPLaplaceProblem:
    """Test residual and Jacobian consistency."""

    @pytest.mark.parametrize("p", [1.5, 2.0, 3.0, 10.0])
    def test_jacobian_matches_finite_differences(self, p):
        """Test the assembled Jacobian against central differences of the residual."""
        mesh = generate_interval(0.0, 1.0, 12)
        space = function_space(mesh)
        rng = np.random.default_rng(11)
        u = np.zeros(mesh.n_nodes)
        u[space.free] = rng.uniform(0.2, 1.0, space.free.size)
        problem = PLaplaceProblem(space, p, np.zeros(mesh.n_nodes), 1e-10)

        jac = problem.jacobian(u).toarray()[np.ix_(space.free, space.free)]
        fd = np.zeros_like(jac)
        delta = 1e-6
        for col, node in enumerate(space.free):
            e = np.zeros(mesh.n_nodes)
            e[node] = delta
            fd[:, col] = (problem.residual(u + e) - problem.residual(u - e))[space.free] / (2 * delta)
        assert np.linalg.norm(jac - fd) <= 1e-5 * np.linalg.norm(jac)

    @pytest.mark.parametrize("p", [2.0, 3.0])
    def test_jacobian_matches_finite_differences_2d(self, coarse_square, p):
        """Test the triangle Jacobian against central differences."""
        space = function_space(coarse_square)
        rng = np.random.default_rng(5)
        u = np.zeros(coarse_square.n_nodes)
        u[space.free] = rng.uniform(0.2, 1.0, space.free.size)
        problem = PLaplaceProblem(space, p, np.zeros(coarse_square.n_nodes), 1e-10)

        jac = problem.jacobian(u).toarray()[np.ix_(space.free, space.free)]
        fd = np.zeros_like(jac)
        delta = 1e-6
        for col, node in enumerate(space.free):
            e = np.zeros(coarse_square.n_nodes)
            e[node] = delta
            fd[:, col] = (problem.residual(u + e) - problem.residual(u - e))[space.free] / (2 * delta)
        assert np.linalg.norm(jac - fd) <= 1e-5 * np.linalg.norm(jac)

    def test_p_must_exceed_one(self, coarse_square):
        """Test p <= 1 is rejected."""
        with pytest.raises(ValueError):
            PLaplaceProblem(function_space(coarse_square), 1.0, np.zeros(coarse_square.n_nodes), 0.0)


class TestNewtonSolve:
    """Test the p-Poisson solver."""

    def test_linear_interval(self):
        """Test the P1 solution of -u'' = 1 is nodally exact."""
        mesh = generate_interval(0.0, 1.0, 100)
        u = solve_p_poisson(mesh, 2.0, 1.0)
        x = mesh.node_coords
        assert np.allclose(u.coefficients, 0.5 * x * (1 - x), atol=1e-10)
        assert u.max_norm() == pytest.approx(0.125, abs=1e-4)

    def test_p4_interval(self):
        """Test the p = 4 torsion profile on the unit interval."""
        mesh = generate_interval(0.0, 1.0, 200)
        u = solve_p_poisson(mesh, 4.0, 1.0)
        expected = 0.75 * 0.5 ** (4.0 / 3.0)
        assert u.coefficients[100] == pytest.approx(expected, abs=1e-3)

    @pytest.mark.parametrize("p", [1.5, 1.3])
    def test_small_p_interval(self, p):
        """Test the torsion profile for exponents below two."""
        mesh = generate_interval(0.0, 1.0, 200)
        u = solve_p_poisson(mesh, p, 1.0)
        expected = (p - 1.0) / p * 0.5 ** (p / (p - 1.0))
        assert u.coefficients[100] == pytest.approx(expected, abs=1e-4)

    def test_zero_source(self, unit_square):
        """Test a zero load returns the zero field."""
        u = solve_p_poisson(unit_square, 3.0, 0.0)
        assert np.all(u.coefficients == 0.0)

    def test_linear_case_single_step(self, unit_square):
        """Test p = 2 without regularisation converges in one Newton step."""
        space = function_space(unit_square)
        load = space.load_vector(quadrature_values(unit_square, 1.0))
        outcome = newton_solve(PLaplaceProblem(space, 2.0, load, 0.0), NewtonConfig(regularization=0.0))
        assert outcome.iterations == 1

    @pytest.mark.parametrize("p", [1.5, 2.0, 4.0])
    def test_maximum_principle(self, unit_square, p):
        """Test a non-negative source gives a non-negative solution."""
        u = solve_p_poisson(unit_square, p, 1.0)
        assert u.coefficients.min() >= -1e-10
        assert np.all(u.coefficients[unit_square.dirichlet_nodes] == 0.0)

    def test_non_convergence(self):
        """Test a one-iteration budget fails for p = 4."""
        mesh = generate_interval(0.0, 1.0, 50)
        with pytest.raises(NewtonConvergenceError):
            solve_p_poisson(mesh, 4.0, 1.0, NewtonConfig(max_iters=1))

    def test_singular_jacobian(self, coarse_square):
        """Test a degenerate Jacobian at u = 0 without regularisation."""
        space = function_space(coarse_square)
        load = space.load_vector(quadrature_values(coarse_square, 1.0))
        with pytest.raises(SingularJacobianError):
            newton_solve(PLaplaceProblem(space, 3.0, load, 0.0), NewtonConfig(regularization=0.0))

    def test_cg_matches_direct(self, unit_square):
        """Test the iterative linear solver reproduces the direct one."""
        direct = solve_p_poisson(unit_square, 3.0, 1.0)
        iterative = solve_p_poisson(unit_square, 3.0, 1.0, NewtonConfig(linear_solver="cg"))
        assert np.allclose(direct.coefficients, iterative.coefficients, atol=1e-8)

    def test_ladders(self):
        """Test cold-start ladders climb above two and descend below it."""
        assert cold_ladder(2.0) == []
        assert cold_ladder(30.0) == [2.0, 4.0, 8.0, 16.0]
        assert cold_ladder(12.0, [3.0, 6.0]) == [2.0, 3.0, 6.0]
        rungs = descent_ladder(1.5)
        assert len(rungs) == 9
        assert rungs[0] == pytest.approx(1.0 + 1.0 / 1.1)
        assert rungs[-1] == pytest.approx(1.0 + 1.0 / 1.9)
        assert cold_ladder(1.5)[0] == 2.0
        rungs = descent_ladder(1.2)
        assert all(a > b > 1.2 for a, b in zip(rungs, rungs[1:]))

    def test_large_p_uses_ladder(self):
        """Test the continuation ladder for large exponents."""
        assert default_ladder(5.0) == []
        assert default_ladder(30.0) == [2.0, 4.0, 8.0, 16.0]
        mesh = generate_interval(0.0, 1.0, 40)
        u = solve_p_poisson(mesh, 30.0, 1.0)
        assert u.coefficients.min() >= -1e-10
        assert u.max_norm() > 0.0
