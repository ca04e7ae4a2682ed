"""Exception types raised by the solver stack."""

from typing import Optional


class MeshError(ValueError):
    """Invalid mesh geometry, connectivity or mesh file content."""

    def __init__(self, message: str, line: Optional[int] = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class InadmissiblePairError(ValueError):
    """The pair left the admissible set (coupling integral not positive)."""

    def __init__(self, coupling: float):
        self.coupling = coupling
        super().__init__(f"inadmissible pair: coupling integral {coupling:.6g} <= 0")


class NewtonConvergenceError(RuntimeError):
    """Damped Newton did not reach the residual tolerance."""

    def __init__(self, residual: float, iterations: int, outer_index: Optional[int] = None):
        self.residual = residual
        self.iterations = iterations
        self.outer_index = outer_index
        where = f" (outer iteration {outer_index})" if outer_index is not None else ""
        super().__init__(
            f"Newton did not converge in {iterations} iterations{where}; "
            f"last residual {residual:.3e}"
        )


class SingularJacobianError(RuntimeError):
    """The Newton Jacobian could not be factorised."""

    def __init__(self, element: Optional[int] = None):
        self.element = element
        where = f" near element {element}" if element is not None else ""
        super().__init__(f"singular Jacobian{where}")


class ConfigError(ValueError):
    """Invalid run configuration."""


class BoundError(ValueError):
    """Preconditions of an eigenvalue bound are not met."""


class EOCUndefinedError(ValueError):
    """Successive eigenvalue differences vanish."""

    def __init__(self):
        super().__init__("EOC undefined at this resolution")
