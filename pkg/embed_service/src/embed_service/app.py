"""FastAPI application: POST /embed and GET /health.

Error contract: 400 for request-shape validation failures (the body names
the offending field), 413 when any text exceeds the per-text character
limit, 503 while the model is not loaded.
"""

from __future__ import annotations

from fastapi import FastAPI, Request
from fastapi.exceptions import RequestValidationError
from fastapi.responses import JSONResponse
from pydantic import BaseModel, Field

from embed_service.encoder import DEFAULT_DIM, DEFAULT_MODEL, HashEncoder

MAX_TEXTS = 256
MAX_TEXT_CHARS = 8192


class EmbedRequest(BaseModel):
    texts: list[str] = Field(min_length=1, max_length=MAX_TEXTS)


class EmbedResponse(BaseModel):
    model: str
    dim: int
    vectors: list[list[float]]


def create_app(
    model_name: str = DEFAULT_MODEL,
    dim: int = DEFAULT_DIM,
    load_immediately: bool = True,
) -> FastAPI:
    app = FastAPI(title="embed-service")
    app.state.encoder = None

    def load_model() -> None:
        app.state.encoder = HashEncoder(model_name=model_name, dim=dim)

    app.state.load_model = load_model
    if load_immediately:
        load_model()

    @app.exception_handler(RequestValidationError)
    async def validation_handler(request: Request, exc: RequestValidationError):
        first = exc.errors()[0]
        field = ".".join(str(p) for p in first.get("loc", ()) if p != "body")
        return JSONResponse(
            status_code=400,
            content={"error": "validation failed", "field": field or "body",
                     "detail": first.get("msg", "")},
        )

    def not_loaded() -> JSONResponse:
        return JSONResponse(status_code=503, content={"status": "loading"})

    @app.get("/health")
    async def health():
        enc = app.state.encoder
        if enc is None:
            return not_loaded()
        return {"status": "ok", "model": enc.model_name, "dim": enc.dim}

    @app.post("/embed", response_model=EmbedResponse)
    async def embed(req: EmbedRequest):
        enc = app.state.encoder
        if enc is None:
            return not_loaded()
        for i, text in enumerate(req.texts):
            if len(text) > MAX_TEXT_CHARS:
                return JSONResponse(
                    status_code=413,
                    content={"error": "text too large",
                             "field": f"texts.{i}",
                             "limit": MAX_TEXT_CHARS, "got": len(text)},
                )
        vectors = enc.encode(req.texts)
        return {
            "model": enc.model_name,
            "dim": enc.dim,
            "vectors": vectors.tolist(),
        }

    return app
