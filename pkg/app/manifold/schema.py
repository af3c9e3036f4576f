from typing import Literal, Optional

from pydantic import BaseModel, ConfigDict, Field

from app.expression.schema import Expr


class Domain(BaseModel):
    """Sampling box: one closed interval per chart coordinate, in coordinate order."""

    model_config = ConfigDict(frozen=True)

    bounds: tuple[tuple[float, float], ...]

    @property
    def dim(self) -> int:
        return len(self.bounds)


class StructureSpec(BaseModel):
    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    # phi[i][j] is the i-th component of phi(d_j)
    phi: tuple[tuple[Expr, ...], ...]
    xi: tuple[Expr, ...]
    eta: tuple[Expr, ...]


class SolitonSpec(BaseModel):
    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    kind: Literal["vector_field", "gradient"]
    V: Optional[tuple[Expr, ...]] = None
    f: Optional[Expr] = None
    # None means the soliton function is to be recovered from the data
    lam: Optional[Expr] = Field(default=None)

    @property
    def lambda_known(self) -> bool:
        return self.lam is not None


class ManifoldSpec(BaseModel):
    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    dim: int
    coords: tuple[str, ...]
    params: dict[str, float] = Field(default_factory=dict)
    domain: Domain
    metric: tuple[tuple[Expr, ...], ...]
    structure: Optional[StructureSpec] = None
    soliton: Optional[SolitonSpec] = None
    digest: str = ""

    @property
    def n(self) -> int:
        return (self.dim - 1) // 2
