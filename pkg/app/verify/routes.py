from typing import Optional

from fastapi import APIRouter, status

from app.verify.fixtures import fixture_names
from app.verify.schema import CheckReport, RunOptions, RunRequest
from app.verify.services import VerifyService

verify_services = VerifyService()
verify_router = APIRouter()


@verify_router.post("/run", status_code=status.HTTP_200_OK, response_model=CheckReport, response_model_by_alias=True)
def run_verification(request: RunRequest):
    report = verify_services.run(
        request.config,
        points=request.points,
        seed=request.seed,
        tol=request.tol,
        order=request.order,
        checks=request.checks,
    )
    return report


@verify_router.get("/examples", response_model=list[str])
async def list_examples():
    return fixture_names()


@verify_router.post("/examples/{name}", response_model=CheckReport, response_model_by_alias=True)
def run_example(name: str, options: Optional[RunOptions] = None):
    options = options or RunOptions()
    report = verify_services.run_example(name, **options.model_dump())
    return report
