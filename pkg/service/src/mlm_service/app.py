"""HTTP surface: POST /v1/score and GET /v1/health.

Error contract: 400 for malformed JSON or invalid fields, 422 when the
token sequence does not contain exactly one mask, 503 while the model is
not loaded yet.
"""

from __future__ import annotations

from dataclasses import dataclass

from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse

from .model import DEFAULT_MODEL, MaskFiller, SequenceTooLongError, WIRE_MASK


@dataclass(frozen=True)
class ServiceConfig:
    model_id: str = DEFAULT_MODEL
    host: str = "127.0.0.1"
    port: int = 8321
    max_batch: int = 128
    device: str = "cpu"

    def __post_init__(self):
        if self.max_batch < 1:
            raise ValueError("max_batch must be >= 1")


def _bad_request(message: str) -> JSONResponse:
    return JSONResponse({"error": message}, status_code=400)


def _validate_body(body, max_batch: int):
    if not isinstance(body, dict):
        return None, _bad_request("body must be a JSON object")
    tokens = body.get("tokens")
    if not isinstance(tokens, list) or not tokens \
            or not all(isinstance(t, str) for t in tokens):
        return None, _bad_request("'tokens' must be a non-empty list of strings")
    mask_index = body.get("mask_index")
    if not isinstance(mask_index, int) or isinstance(mask_index, bool) \
            or not (0 <= mask_index < len(tokens)):
        return None, _bad_request("'mask_index' must be an index into tokens")
    candidates = body.get("candidates")
    if not isinstance(candidates, list) or not candidates \
            or not all(isinstance(c, str) and c for c in candidates):
        return None, _bad_request("'candidates' must be a non-empty list of words")
    if len(set(candidates)) != len(candidates):
        return None, _bad_request("'candidates' must not contain duplicates")
    if len(candidates) > max_batch:
        return None, _bad_request(f"at most {max_batch} candidates per request")

    mask_count = sum(1 for t in tokens if t == WIRE_MASK)
    if mask_count != 1:
        return None, JSONResponse(
            {"error": f"exactly one {WIRE_MASK} token required, found {mask_count}"},
            status_code=422,
        )
    if tokens[mask_index] != WIRE_MASK:
        return None, _bad_request("'mask_index' does not point at the mask token")
    return (tokens, mask_index, candidates), None


def create_app(config: ServiceConfig = ServiceConfig(), preload: bool = True) -> FastAPI:
    app = FastAPI(title="mlm-service")
    app.state.config = config
    app.state.filler = None

    def load_model() -> MaskFiller:
        if app.state.filler is None:
            app.state.filler = MaskFiller(config.model_id, device=config.device)
        return app.state.filler

    app.state.load_model = load_model
    if preload:
        load_model()

    @app.get("/v1/health")
    async def health():
        filler = app.state.filler
        if filler is None:
            return JSONResponse({"status": "loading"}, status_code=503)
        return {
            "status": "ready",
            "model": filler.model_id,
            "vocab_size": filler.vocab_size,
        }

    @app.post("/v1/score")
    async def score(request: Request):
        filler = app.state.filler
        if filler is None:
            return JSONResponse({"error": "model loading"}, status_code=503)
        try:
            body = await request.json()
        except Exception:
            return _bad_request("malformed JSON body")
        parsed, error = _validate_body(body, app.state.config.max_batch)
        if error is not None:
            return error
        tokens, mask_index, candidates = parsed
        try:
            scores = filler.score(tokens, mask_index, candidates)
        except SequenceTooLongError as exc:
            return _bad_request(str(exc))
        return {"scores": scores, "model": filler.model_id}

    return app
