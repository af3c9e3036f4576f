from dataclasses import dataclass

from pydantic import BaseModel

from app.curvature.schema import TensorAtPoint


@dataclass(frozen=True, eq=False)
class StructureEval:
    """(phi, xi, eta) at one point; ``phi[i, j]`` is the i-th component of phi(d_j)."""

    phi: TensorAtPoint
    xi: TensorAtPoint
    eta: TensorAtPoint
    n: int


class AlmostContactResiduals(BaseModel):
    phi_squared: float
    eta_xi: float
    phi_xi: float
    eta_phi: float
    compatibility: float
    eta_metric_dual: float

    def worst(self) -> float:
        return max(self.model_dump().values())


class EtaEinsteinFit(BaseModel):
    alpha: float
    beta: float
    residual: float
    # |alpha + beta + 2n|, |alpha - (r/2n + 1)|, |beta + (r/2n + 2n + 1)|
    sum_defect: float
    alpha_defect: float
    beta_defect: float
