"""HTTP embedding microservice.

POST /embed with ``{"texts": ["..."]}`` returns
``{"dim": N, "vectors": [[...], ...]}`` with unit-length vectors, the
protocol the retrieval engine's http embedder speaks. GET /health reports
the active backend.
"""

from __future__ import annotations

from fastapi import FastAPI, HTTPException
from pydantic import BaseModel


class EmbedRequest(BaseModel):
    texts: list[str]


def make_app(backend) -> FastAPI:
    app = FastAPI(title="nlp-sidecar embed service")

    @app.get("/health")
    def health():
        return {"status": "ok", "backend": backend.name, "dim": backend.dim}

    @app.post("/embed")
    def embed(request: EmbedRequest):
        if not request.texts:
            return {"dim": backend.dim, "vectors": []}
        for i, text in enumerate(request.texts):
            if not text:
                raise HTTPException(status_code=422,
                                    detail=f"texts[{i}] is empty")
        vectors = backend.encode(request.texts)
        return {"dim": backend.dim,
                "vectors": [[float(x) for x in row] for row in vectors]}

    return app


def serve_embed(backend, host: str = "127.0.0.1", port: int = 8230) -> None:
    import uvicorn

    uvicorn.run(make_app(backend), host=host, port=port, log_level="warning")
