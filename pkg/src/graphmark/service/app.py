"""FastAPI app exposing the pipeline over HTTP."""

from __future__ import annotations

from fastapi import FastAPI, HTTPException

from . import models, ops


def create_app() -> FastAPI:
    app = FastAPI(title="graphmark", version="0.1.0")

    def guarded(handler, req):
        try:
            return handler(req)
        except ValueError as exc:
            raise HTTPException(status_code=400, detail=str(exc))

    @app.get("/health")
    def health() -> dict:
        return {"status": "ok"}

    @app.post("/run", response_model=models.RunResponse)
    def run(req: models.RunRequest):
        return guarded(ops.run, req)

    @app.post("/embed", response_model=models.EmbedResponse)
    def embed(req: models.EmbedRequest):
        return guarded(ops.embed_op, req)

    @app.post("/extract", response_model=models.ExtractResponse)
    def extract(req: models.ExtractRequest):
        return guarded(ops.extract_op, req)

    @app.post("/protect", response_model=models.ProtectResponse)
    def protect(req: models.ProtectRequest):
        return guarded(ops.protect_op, req)

    @app.post("/attack", response_model=models.AttackResponse)
    def attack(req: models.AttackRequest):
        return guarded(ops.attack_op, req)

    @app.post("/bench", response_model=models.BenchResponse)
    def bench(req: models.BenchRequest):
        return guarded(ops.bench_op, req)

    @app.post("/report", response_model=models.ReportResponse)
    def report(req: models.ReportRequest):
        return guarded(ops.report_op, req)

    return app


app = create_app()
