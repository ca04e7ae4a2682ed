from typing import Dict, List, Any, Optional
from dataclasses import dataclass, field

from pq_eigen.models.mesh import FemFunction


@dataclass(frozen=True)
class IterationRecord:
    """One outer iteration: k, lambda^k and the Newton counts that produced it."""
    k: int
    lam: float
    delta: Optional[float]
    newton_u: int
    newton_v: int

    def to_dict(self) -> Dict[str, Any]:
        return {
            "k": self.k,
            "lambda": self.lam,
            "delta": self.delta,
            "newton_u": self.newton_u,
            "newton_v": self.newton_v,
        }


@dataclass(frozen=True)
class NewtonOutcome:
    """Result of one damped Newton solve."""
    u: FemFunction
    iterations: int
    residual: float


@dataclass(frozen=True)
class EigenResult:
    """Converged (or last) eigenvalue estimate with its normalised eigenpair.

    For scalar problems ``v`` is the same field as ``u``.
    """
    lam: float
    u: FemFunction
    v: FemFunction
    history: List[IterationRecord]
    converged: bool
    outer_iters: int
    monotone: bool = True
    label: str = ""

    def summary(self) -> Dict[str, Any]:
        """Summary record written by the CLI."""
        return {
            "label": self.label,
            "lambda": self.lam,
            "converged": self.converged,
            "outer_iters": self.outer_iters,
            "monotone": self.monotone,
            "newton_total": sum(r.newton_u + r.newton_v for r in self.history),
        }

    def to_dict(self) -> Dict[str, Any]:
        data = self.summary()
        data["history"] = [record.to_dict() for record in self.history]
        return data


@dataclass(frozen=True)
class BoundReport:
    """Lower and upper bounds for a computed principal eigenvalue."""
    lower: float
    upper_kind: str = "none"  # "one_d", "convex_2d", "ball", "resonant" or "none"
    upper: Optional[float] = None
    assumes_hypothesis: bool = False
    inputs: Dict[str, float] = field(default_factory=dict)

    def __post_init__(self):
        if self.upper is not None and self.lower > self.upper:
            raise ValueError(f"lower bound {self.lower} exceeds upper bound {self.upper}")

    def brackets(self, lam: float, tol: float = 1e-6) -> bool:
        """True when lam lies between the bounds (upper only if present)."""
        if lam < self.lower - tol:
            return False
        return self.upper is None or lam <= self.upper + tol

    def to_dict(self) -> Dict[str, Any]:
        return {
            "lower": self.lower,
            "upper_kind": self.upper_kind,
            "upper": self.upper,
            "assumes_hypothesis_1": self.assumes_hypothesis,
            "inputs": dict(self.inputs),
        }
