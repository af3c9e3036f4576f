import logging
import time

from fastapi import FastAPI, Request
from fastapi.middleware.cors import CORSMiddleware
from fastapi.middleware.trustedhost import TrustedHostMiddleware


logger = logging.getLogger(__name__)
logging.getLogger("uvicorn.access").disabled = True


def register_middleware(app: FastAPI):

    @app.middleware("http")
    async def custom_logging(request: Request, call_next):
        start_time = time.perf_counter()
        response = await call_next(request)
        processing_time = time.perf_counter() - start_time
        client = request.client
        host, port = (client.host, client.port) if client else ("-", "-")
        logger.info(
            f"{host}:{port} - {request.method} - {request.url.path} - {response.status_code} completed after {processing_time:.4f}s"
        )
        response.headers["X-Process-Time"] = f"{processing_time:.4f}"
        return response

    app.add_middleware(
        CORSMiddleware,
        allow_origins=["*"],
        allow_methods=["*"],
        allow_headers=["*"],
    )

    app.add_middleware(
        TrustedHostMiddleware, allowed_hosts=["0.0.0.0", "localhost", "testserver", "*"]
    )
