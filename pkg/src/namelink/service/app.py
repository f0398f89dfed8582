"""FastAPI application factories for the matching service and a wire-protocol scorer."""

from __future__ import annotations

import time
from dataclasses import dataclass
from typing import Optional

from fastapi import FastAPI, Request
from fastapi.exceptions import RequestValidationError
from fastapi.responses import JSONResponse
from pydantic import BaseModel, ConfigDict

from ..curriculum.prompts import PromptTemplate, default_template
from ..errors import EmptyName, NameLinkError
from ..gateway import ANSWER_TOKENS, Backend, MatchDecision, MockBackend, RemoteBackend, decide, score_pairs
from ..normalizer import NormalizedName, normalize
from ..parser import NameLexicon, analyze, default_lexicon, to_schema_text
from ..pipeline import default_calibration, load_calibration
from .config import ServiceConfig
from .stats import LatencyStats

__all__ = ["ServiceState", "create_app", "create_scorer_app", "STATUS_BY_CODE"]

STATUS_BY_CODE = {
    "EMPTY_NAME": 400,
    "UNSUPPORTED_SCRIPT": 400,
    "MALFORMED_REQUEST": 400,
    "BATCH_TOO_LARGE": 400,
    "BACKEND_UNAVAILABLE": 502,
    "PROTOCOL_ERROR": 502,
    "NON_FINITE_SCORE": 502,
    "TIMEOUT": 504,
}


def error_body(code: str, message: str) -> dict:
    return {"error": {"code": code, "message": message}}


class _Strict(BaseModel):
    model_config = ConfigDict(extra="forbid", strict=True)


class MatchRequest(_Strict):
    name1: str
    name2: str


class BatchRequest(_Strict):
    pairs: list[MatchRequest]


class ParseRequest(_Strict):
    name: str


class _BatchTooLarge(NameLinkError):
    code = "BATCH_TOO_LARGE"


@dataclass
class ServiceState:
    """Immutable scoring context plus the one mutable piece, ``stats``."""

    config: ServiceConfig
    lexicon: NameLexicon
    template: PromptTemplate
    backend: Backend
    threshold: float
    stats: LatencyStats

    @classmethod
    def from_config(cls, config: ServiceConfig, backend: Optional[Backend] = None) -> "ServiceState":
        config.validate()
        lexicon = NameLexicon.load(config.lexicon_path) if config.lexicon_path else default_lexicon()
        template = PromptTemplate.load(config.template_path) if config.template_path else default_template()
        template.validate()
        if backend is None:
            if config.backend == "mock":
                backend = MockBackend(lexicon, config.constants(), template)
            else:
                backend = RemoteBackend(
                    config.backend_url,
                    timeout_ms=config.timeout_ms,
                    max_retries=config.max_retries,
                    batch_size=config.batch_size,
                    max_in_flight=config.max_in_flight,
                )
        if config.threshold is not None:
            threshold = config.threshold
        elif config.calibration_path:
            threshold = load_calibration(config.calibration_path).threshold
        else:
            threshold = default_calibration().threshold
        return cls(config, lexicon, template, backend, threshold, LatencyStats())

    def normalized_pair(self, name1: str, name2: str) -> tuple[NormalizedName, NormalizedName]:
        out = []
        for label, raw in (("name1", name1), ("name2", name2)):
            norm = normalize(raw)
            if not norm.text:
                raise EmptyName(f"{label} is empty after normalization")
            out.append(norm)
        return out[0], out[1]

    def match_many(self, pairs: list[tuple[str, str]]) -> list[tuple[MatchDecision, NormalizedName, NormalizedName]]:
        normed = [self.normalized_pair(a, b) for a, b in pairs]
        scores = score_pairs(self.backend, [(a.text, b.text) for a, b in normed], self.template)
        decisions = [decide(s, self.threshold, self.backend.backend_id) for s in scores]
        yes = sum(d.verdict for d in decisions)
        self.stats.record_verdicts(yes, len(decisions) - yes)
        return [(d, a, b) for d, (a, b) in zip(decisions, normed)]


def _match_body(decision: MatchDecision, a: NormalizedName, b: NormalizedName) -> dict:
    return {
        "verdict": decision.answer,
        "probability": decision.probability,
        "threshold": decision.threshold,
        "backend_id": decision.backend_id,
        "normalized": {"name1": a.text, "name2": b.text},
    }


def _install_error_handlers(app: FastAPI) -> None:
    @app.exception_handler(NameLinkError)
    async def _domain_error(request: Request, exc: NameLinkError):
        status = STATUS_BY_CODE.get(exc.code, 500)
        return JSONResponse(error_body(exc.code, str(exc)), status_code=status)

    @app.exception_handler(RequestValidationError)
    async def _malformed(request: Request, exc: RequestValidationError):
        problems = "; ".join(
            f"{'.'.join(str(p) for p in e.get('loc', ()))}: {e.get('msg', '')}" for e in exc.errors()
        )
        return JSONResponse(error_body("MALFORMED_REQUEST", problems or "malformed request"), status_code=400)


def create_app(config: Optional[ServiceConfig] = None, backend: Optional[Backend] = None) -> FastAPI:
    """Build the matching service. ``backend`` overrides the one named in ``config``."""
    state = ServiceState.from_config(config or ServiceConfig(), backend)
    app = FastAPI(title="namelink", version="1")
    app.state.namelink = state
    _install_error_handlers(app)

    @app.middleware("http")
    async def _timing(request: Request, call_next):
        if not request.url.path.startswith("/v1/"):
            return await call_next(request)
        start = time.perf_counter()
        error = True
        try:
            response = await call_next(request)
            error = response.status_code >= 400
            return response
        finally:
            state.stats.record((time.perf_counter() - start) * 1000.0, error)

    # handlers are plain functions so FastAPI runs them on its worker pool
    @app.post("/v1/match")
    def match(req: MatchRequest):
        decision, a, b = state.match_many([(req.name1, req.name2)])[0]
        return _match_body(decision, a, b)

    @app.post("/v1/match/batch")
    def match_batch(req: BatchRequest):
        limit = state.config.batch_size
        if len(req.pairs) > limit:
            raise _BatchTooLarge(f"batch of {len(req.pairs)} exceeds the limit of {limit}")
        results = state.match_many([(p.name1, p.name2) for p in req.pairs])
        return {"results": [_match_body(*r) for r in results]}

    @app.post("/v1/parse")
    def parse(req: ParseRequest):
        info = analyze(req.name, state.lexicon)
        p = info.parsed
        return {
            "normalized": info.normalized.text,
            "schema": to_schema_text(p),
            "parsed": {"first_name": p.first, "middle_name": p.middle, "last_name": p.last},
            "annotations": info.annotations(),
        }

    @app.get("/health")
    def health():
        return {
            "status": "ok",
            "backend_id": state.backend.backend_id,
            "threshold": state.threshold,
            "template_version": state.template.version,
        }

    @app.get("/metrics")
    def metrics():
        return state.stats.snapshot().to_dict()

    return app


def create_scorer_app(backend: Optional[Backend] = None, model_id: Optional[str] = None) -> FastAPI:
    """Expose a backend over the JSON token-scoring protocol that RemoteBackend speaks."""
    backend = backend or MockBackend()
    model_id = model_id or backend.backend_id
    app = FastAPI(title="namelink-scorer", version="1")

    @app.post("/v1/score")
    async def score(request: Request):
        try:
            body = await request.json()
        except ValueError:
            return JSONResponse(error_body("MALFORMED_REQUEST", "body is not JSON"), status_code=400)
        if not isinstance(body, dict) or list(body.get("answer_tokens", ANSWER_TOKENS)) != list(ANSWER_TOKENS):
            return JSONResponse(error_body("MALFORMED_REQUEST", "answer_tokens must be [Yes, No]"), status_code=400)
        single = "prompt" in body
        prompts = [body["prompt"]] if single else body.get("prompts")
        if not isinstance(prompts, list) or not all(isinstance(p, str) for p in prompts):
            return JSONResponse(error_body("MALFORMED_REQUEST", "expected prompt or prompts"), status_code=400)
        try:
            scores = [[s.score_yes, s.score_no] for s in backend.score_prompts(prompts)]
        except NameLinkError as exc:
            return JSONResponse(error_body(exc.code, str(exc)), status_code=400)
        return {"scores": scores[0] if single else scores, "model_id": model_id}

    return app
