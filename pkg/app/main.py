from fastapi import FastAPI
from app import __version__
from app.error import register_all_errors
from app.middleware import register_middleware
from app.config import Config
from app.verify.routes import verify_router


version_prefix = Config.VERSION


# Initialize FastAPI app
app = FastAPI(
    title="Kenmotsu *-Ricci Soliton Verifier",
    description="""
Numerical verification service for **Kenmotsu manifolds** and their **\\*-Ricci solitons**.
Every tensor is computed from truncated Taylor jets of the metric, so each check reports
a residual at machine precision rather than a finite-difference estimate.
""",
    version=__version__,
    license_info={
        "name": "MIT License",
        "url": "https://opensource.org/licenses/MIT",
    },
)
# Add middleware
register_middleware(app)

# Add error handling
register_all_errors(app)


# Heath check
@app.get(f"/{version_prefix}/health", tags=["Health"])
async def health_check():
    return {"status": "Kenmotsu verifier is running"}


# Add route
app.include_router(verify_router, prefix=f"/{version_prefix}/verify", tags=["verify"])
