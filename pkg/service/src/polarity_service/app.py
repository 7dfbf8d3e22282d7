"""HTTP surface: score one instance, score a batch, report health.

Handlers are stateless over an immutable scorer, so concurrent requests are
safe and responses never depend on interleaving.
"""

from __future__ import annotations

from typing import Optional

from fastapi import FastAPI, Request
from fastapi.exceptions import RequestValidationError
from fastapi.responses import JSONResponse
from pydantic import BaseModel, Field, ValidationError, model_validator

from .scoring import Scorer


class ScoreRequest(BaseModel):
    text: str
    aspect_term: str
    aspect_start: int = Field(ge=0)
    aspect_end: int
    id: Optional[str] = None

    @model_validator(mode="after")
    def _check_span(self):
        if not (0 <= self.aspect_start < self.aspect_end <= len(self.text)):
            raise ValueError(
                f"aspect_end: span [{self.aspect_start}, {self.aspect_end}) "
                f"out of range for text of length {len(self.text)}"
            )
        got = self.text[self.aspect_start : self.aspect_end]
        if got != self.aspect_term:
            raise ValueError(
                f"aspect_term: text slice {got!r} does not match {self.aspect_term!r}"
            )
        return self


class Scores(BaseModel):
    positive: float
    neutral: float
    negative: float


class ScoreResponse(BaseModel):
    model_id: str
    scores: Scores


def _score_one(scorer: Scorer, req: ScoreRequest) -> ScoreResponse:
    p, n, g = scorer.score(req.text, req.aspect_term, req.aspect_start, req.aspect_end)
    return ScoreResponse(model_id=scorer.model_id,
                         scores=Scores(positive=p, neutral=n, negative=g))


def create_app(scorer: Optional[Scorer] = None) -> FastAPI:
    """Build the app; with ``scorer=None`` every endpoint reports 503 until
    one is attached to ``app.state.scorer`` (models can load slowly)."""
    app = FastAPI(title="polarity-service")
    app.state.scorer = scorer

    @app.exception_handler(RequestValidationError)
    async def _validation_to_400(request: Request, exc: RequestValidationError):
        details = [
            {"loc": [str(p) for p in err.get("loc", [])], "msg": err.get("msg", "")}
            for err in exc.errors()
        ]
        return JSONResponse(status_code=400, content={"detail": details})

    def _not_loaded() -> JSONResponse:
        return JSONResponse(status_code=503, content={"status": "loading"})

    @app.get("/v1/health")
    async def health():
        if app.state.scorer is None:
            return _not_loaded()
        return {"status": "ok", "model_id": app.state.scorer.model_id}

    @app.post("/v1/polarity", response_model=ScoreResponse)
    async def polarity(req: ScoreRequest):
        if app.state.scorer is None:
            return _not_loaded()
        return _score_one(app.state.scorer, req)

    @app.post("/v1/polarity:batch")
    async def polarity_batch(body: dict):
        if app.state.scorer is None:
            return _not_loaded()
        items = body.get("items")
        if not isinstance(items, list):
            return JSONResponse(
                status_code=400,
                content={"detail": [{"loc": ["items"], "msg": "must be a list"}]},
            )
        results = []
        for i, raw in enumerate(items):
            try:
                req = ScoreRequest.model_validate(raw)
            except ValidationError as e:
                first = e.errors()[0]
                results.append(
                    {"error": {"index": i, "message": f"{first.get('loc')}: {first.get('msg')}"}}
                )
                continue
            results.append(_score_one(app.state.scorer, req).model_dump())
        return {"results": results}

    return app
