"""Resolved configuration of one CLI run."""

from pathlib import Path
from typing import List, Literal, Optional

from pydantic import BaseModel, ConfigDict, Field, ValidationError, model_validator

from pq_eigen.core.eigensolver import NAMED_WEIGHTS
from pq_eigen.models.params import DomainSpec, NewtonConfig, OuterConfig, SystemParams

CommandKind = Literal["solve", "scalar", "radial", "resonant", "bounds", "eoc-study", "fp-curve"]
# Commands that need a full (p, q, alpha, beta) parameter set.
SYSTEM_COMMANDS = ("solve", "radial", "resonant", "bounds", "eoc-study")


class RunConfig(BaseModel):
    """Everything a command needs: domain, exponents, solver knobs and outputs."""
    model_config = ConfigDict(frozen=True)

    command: CommandKind
    domain: DomainSpec = Field(default_factory=lambda: DomainSpec(kind="rectangle"))
    p: float = Field(2.0, gt=1.0)
    q: Optional[float] = None
    alpha: float = 1.0
    beta: Optional[float] = None
    n: int = Field(500, ge=2)
    outer: OuterConfig = Field(default_factory=OuterConfig)
    newton: NewtonConfig = Field(default_factory=NewtonConfig)
    weight: Optional[str] = None
    h_values: List[float] = Field(default_factory=lambda: [1.0, 0.5, 0.25, 0.125, 0.0625])
    p_values: List[float] = Field(default_factory=lambda: [1.0 + 0.2 * i for i in range(20)] + [float("inf")])
    out: Path = Path("results")
    format: Literal["csv", "json"] = "csv"
    threads: int = Field(1, ge=1)
    export_field: bool = True

    @model_validator(mode="after")
    def check_run(self):
        if self.command in SYSTEM_COMMANDS:
            self.system_params()
        if self.domain.kind == "external_file" and not Path(self.domain.path).exists():
            raise ValueError(f"mesh file not found: {self.domain.path}")
        if self.weight is not None and self.weight not in NAMED_WEIGHTS and not Path(self.weight).exists():
            raise ValueError(f"weight must be one of {sorted(NAMED_WEIGHTS)} or an existing file, got '{self.weight}'")
        if self.command == "resonant" and self.domain.kind in ("interval", "disc_radial"):
            raise ValueError("the resonant system is solved on 2D domains only")
        return self

    def system_params(self) -> SystemParams:
        """Parameter set with q defaulting to p and beta derived when omitted."""
        q = self.p if self.q is None else self.q
        try:
            return SystemParams(p=self.p, q=q, alpha=self.alpha, beta=self.beta)
        except ValidationError as exc:
            raise ValueError(exc.errors()[0]["msg"].removeprefix("Value error, "))
