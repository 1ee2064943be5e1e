"""HTTP service exposing the exposure estimator and the predictor.

Endpoints (JSON over POST unless noted):

  GET  /health            liveness + loaded bundle version
  POST /estimate          {profile, K}  -> exposure report
  POST /whatif            {profile, K}  -> ranked hide-subset table
  POST /predict           {profile}     -> current-city prediction

Status codes: 400 malformed body, 422 K outside (0, 1000], 503 when no
bundle is loaded.  Every response carries the bundle version.  The
service holds no mutable state beyond the immutable loaded bundle, so
concurrent requests are safe.
"""

from __future__ import annotations

import json

from fastapi import FastAPI, Request
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse

from .bundle import ModelBundle
from .errors import CityRiskError, ValidationError

MAX_K_KM = 1000.0


def _error(status: int, message: str) -> JSONResponse:
    return JSONResponse(status_code=status, content={"error": message})


async def _body(request: Request) -> dict:
    try:
        obj = json.loads(await request.body())
    except (json.JSONDecodeError, UnicodeDecodeError):
        raise ValueError("body is not valid JSON")
    if not isinstance(obj, dict):
        raise ValueError("body must be a JSON object")
    return obj


def _profile_of(body: dict) -> dict:
    profile = body.get("profile")
    if not isinstance(profile, dict):
        raise ValueError("'profile' must be an object")
    return profile


def _k_of(body: dict, default: float = 100.0) -> float:
    k = body.get("K", default)
    if not isinstance(k, (int, float)) or isinstance(k, bool):
        raise ValueError("'K' must be a number")
    return float(k)


def create_app(bundle: ModelBundle | None = None) -> FastAPI:
    app = FastAPI(
        title="cityrisk service",
        description="Current-city prediction and exposure-risk estimation.",
        version="0.1.0",
    )
    app.add_middleware(
        CORSMiddleware,
        allow_origins=["*"],
        allow_methods=["*"],
        allow_headers=["*"],
    )
    app.state.bundle = bundle

    def loaded() -> ModelBundle | None:
        return app.state.bundle

    @app.get("/health")
    def health():
        b = loaded()
        return {"status": "ok", "bundle": b.version if b else None}

    @app.post("/estimate")
    async def estimate(request: Request):
        b = loaded()
        if b is None:
            return _error(503, "bundle not loaded")
        try:
            body = await _body(request)
            profile = _profile_of(body)
            k = _k_of(body)
        except ValueError as exc:
            return _error(400, str(exc))
        if not 0.0 < k <= MAX_K_KM:
            return _error(422, f"K must be in (0, {MAX_K_KM:g}]")
        try:
            return b.estimate(profile, k)
        except ValidationError as exc:
            return _error(400, str(exc))
        except CityRiskError as exc:
            return _error(422, str(exc))

    @app.post("/whatif")
    async def whatif(request: Request):
        b = loaded()
        if b is None:
            return _error(503, "bundle not loaded")
        try:
            body = await _body(request)
            profile = _profile_of(body)
            k = _k_of(body)
        except ValueError as exc:
            return _error(400, str(exc))
        if not 0.0 < k <= MAX_K_KM:
            return _error(422, f"K must be in (0, {MAX_K_KM:g}]")
        try:
            return b.what_if_map(profile, k)
        except ValidationError as exc:
            return _error(400, str(exc))
        except CityRiskError as exc:
            return _error(422, str(exc))

    @app.post("/predict")
    async def predict(request: Request):
        b = loaded()
        if b is None:
            return _error(503, "bundle not loaded")
        try:
            body = await _body(request)
            profile = _profile_of(body)
        except ValueError as exc:
            return _error(400, str(exc))
        try:
            return b.predict_profile(profile)
        except ValidationError as exc:
            return _error(400, str(exc))
        except CityRiskError as exc:
            return _error(422, str(exc))

    return app
