from dataclasses import dataclass
from typing import Literal, Optional

from pydantic import BaseModel, Field

from app.curvature.schema import TensorAtPoint

SolitonType = Literal["shrinking", "steady", "expanding", "non-constant"]


@dataclass(frozen=True, eq=False)
class SolitonAtPoint:
    """Soliton data evaluated at one point. ``V`` is Df for the gradient kind."""

    kind: Literal["vector_field", "gradient"]
    V: TensorAtPoint
    f: Optional[TensorAtPoint] = None
    hessian: Optional[TensorAtPoint] = None
    lam: Optional[TensorAtPoint] = None


class LambdaRecovery(BaseModel):
    values: list[float]
    spread: float
    mean: float


class ClassificationReport(BaseModel):
    # Ricci data
    einstein_residual: float = Field(description="max |S - (r/dim) g| over points")
    einstein: bool
    ricci_flat: bool
    # contact data, only with a [structure] block
    kenmotsu_residual: Optional[float] = Field(default=None, description="max Kenmotsu residual over points")
    kenmotsu: Optional[bool] = None
    kenmotsu_einstein_residual: Optional[float] = Field(default=None, description="max |S + 2n g|")
    eta_einstein_residual: Optional[float] = None
    eta_einstein: Optional[bool] = None
    alpha: Optional[list[float]] = None
    beta: Optional[list[float]] = None
    # sectional curvature over random planes
    planes: int
    # None when no non-degenerate plane could be sampled
    kappa: Optional[float] = None
    curvature_spread: Optional[float] = None
    constant_curvature: bool
    # soliton data
    soliton_residual: Optional[float] = None
    lambda_hat: Optional[list[float]] = None
    lambda_spread: Optional[float] = None
    soliton_type: Optional[SolitonType] = None
    collinearity_defect: Optional[float] = None
    collinear: Optional[bool] = None
    da_residual: Optional[float] = None
    label: str
