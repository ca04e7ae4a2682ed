"""Validated parameter and solver configuration models."""

import math
from typing import List, Literal, Optional, Tuple

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

CONSTRAINT_TOL = 1e-9


class SystemParams(BaseModel):
    """Exponents (p, q, alpha, beta) of the coupled system.

    ``beta`` may be omitted and is then derived from alpha/p + beta/q = 1.
    """
    model_config = ConfigDict(frozen=True)

    p: float = Field(gt=1.0)
    q: float = Field(gt=1.0)
    alpha: float = Field(ge=1.0)
    beta: Optional[float] = None

    @model_validator(mode="before")
    @classmethod
    def derive_beta(cls, data):
        if isinstance(data, dict) and data.get("beta") is None:
            p, q, alpha = data.get("p"), data.get("q"), data.get("alpha")
            if p is not None and q is not None and alpha is not None:
                data = dict(data)
                data["beta"] = float(q) * (1.0 - float(alpha) / float(p))
        return data

    @model_validator(mode="after")
    def check_constraint(self):
        if self.beta is None or self.beta < 1.0:
            raise ValueError(f"beta must be >= 1 (got {self.beta})")
        residual = self.constraint_residual
        if abs(residual) > CONSTRAINT_TOL:
            raise ValueError(
                f"alpha/p + beta/q must equal 1; residual {residual:.6g}"
            )
        return self

    @property
    def constraint_residual(self) -> float:
        return self.alpha / self.p + self.beta / self.q - 1.0

    @classmethod
    def scalar(cls, p: float) -> "SystemParams":
        """Parameters of the p = q reduction with alpha = beta = p/2 (p >= 2)."""
        return cls(p=p, q=p, alpha=p / 2.0, beta=p / 2.0)


class NewtonConfig(BaseModel):
    """Damped Newton settings for the nonlinear Dirichlet solves."""
    model_config = ConfigDict(frozen=True)

    residual_tol: float = Field(1e-12, gt=0.0)
    relative_tol: float = Field(1e-10, ge=0.0)
    stall_tol: float = Field(1e-8, ge=0.0)
    decrement_tol: float = Field(1e-14, ge=0.0)
    max_iters: int = Field(50, ge=1)
    regularization: float = Field(1e-10, ge=0.0)
    damping: Literal["none", "backtracking"] = "backtracking"
    max_halvings: int = Field(30, ge=0)
    continuation: List[float] = Field(default_factory=list)
    linear_solver: Literal["direct", "cg"] = "direct"

    @field_validator("continuation")
    @classmethod
    def check_ladder(cls, ladder: List[float]) -> List[float]:
        if any(e <= 1.0 for e in ladder):
            raise ValueError("continuation exponents must exceed 1")
        if any(b <= a for a, b in zip(ladder, ladder[1:])):
            raise ValueError("continuation exponents must be increasing")
        return ladder


GuessKind = Literal[
    "default_bump", "supplied", "scalar", "radial_quadratic", "radial_cosine", "bessel"
]


class OuterConfig(BaseModel):
    """Outer (eigenvalue) iteration settings."""
    model_config = ConfigDict(frozen=True)

    eps: float = Field(5e-5, gt=0.0)
    max_outer: int = Field(100, ge=1)
    initial_guess: GuessKind = "default_bump"
    continuation: List[float] = Field(default_factory=list)
    monotone_tol: float = Field(1e-9, ge=0.0)


DomainKind = Literal[
    "interval", "disc_radial", "rectangle", "lshape", "isosceles_triangle", "external_file"
]


class DomainSpec(BaseModel):
    """Geometric description of a computational domain.

    Defaults reproduce the published domains: the unit interval, the unit
    disc, the square (0,2)^2, the L-shape (0,3)^2 minus [1,3]^2 and the
    isosceles triangle with base 1 and altitude 1.
    """
    model_config = ConfigDict(frozen=True)

    kind: DomainKind
    h: float = Field(1.0 / 16.0, gt=0.0)
    length: float = Field(1.0, gt=0.0)
    width: float = Field(2.0, gt=0.0)
    height: float = Field(2.0, gt=0.0)
    origin: Tuple[float, float] = (0.0, 0.0)
    arm: float = Field(1.0, gt=0.0)
    outer: float = Field(3.0, gt=0.0)
    base: float = Field(1.0, gt=0.0)
    altitude: float = Field(1.0, gt=0.0)
    radius: float = Field(1.0, gt=0.0)
    path: Optional[str] = None

    @model_validator(mode="after")
    def check_kind(self):
        if self.kind == "lshape" and self.arm >= self.outer:
            raise ValueError(f"L-shape arm {self.arm} must be smaller than side {self.outer}")
        if self.kind == "external_file" and not self.path:
            raise ValueError("external_file domains need a mesh path")
        return self

    @property
    def diameter(self) -> float:
        if self.kind == "rectangle":
            return math.hypot(self.width, self.height)
        if self.kind == "lshape":
            return math.sqrt(2.0) * self.outer
        if self.kind == "isosceles_triangle":
            return max(self.base, math.hypot(self.base / 2.0, self.altitude))
        if self.kind == "disc_radial":
            return 2.0 * self.radius
        if self.kind == "interval":
            return self.length
        return math.inf
