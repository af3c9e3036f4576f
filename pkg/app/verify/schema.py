from typing import Literal, Optional

from pydantic import BaseModel, ConfigDict, Field

from app.soliton.schema import ClassificationReport

Verdict = Literal["pass", "fail", "no-checks"]


class RunOptions(BaseModel):
    points: Optional[int] = Field(default=None, ge=0)
    seed: Optional[int] = None
    tol: Optional[float] = Field(default=None, gt=0)
    order: Optional[int] = Field(default=None, ge=2)
    checks: Optional[list[str]] = None


class RunRequest(RunOptions):
    config: str = Field(description="manifold config text")


class CheckRecord(BaseModel):
    model_config = ConfigDict(populate_by_name=True)

    name: str
    tag: str
    title: str
    points: int
    max_residual: float
    tolerance: float
    passed: bool = Field(alias="pass")
    asserted: bool
    hypothesis: Optional[str] = None
    value: Optional[float] = None


class SkippedCheck(BaseModel):
    name: str
    reason: str


class CheckReport(BaseModel):
    version: str
    digest: str
    seed: int
    points: int
    tol: float
    order: int
    checks: list[CheckRecord]
    skipped: list[SkippedCheck] = []
    classification: Optional[ClassificationReport] = None
    verdict: Verdict

    @property
    def exit_code(self) -> int:
        return 2 if self.verdict == "fail" else 0
