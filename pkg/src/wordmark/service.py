"""Watermarking proxy: responses fetched from an upstream generator (or a
stub that echoes the input) are watermarked before they reach the caller.
A bearer-token-guarded endpoint lets the owner verify collected text, and
/healthz exposes the lexicon fingerprint for consistency checks.

The lexicon, key, and per-group target assignments are resolved once at
startup and shared read-only, so request handling needs no locking beyond
the aggregate counters. The key is never logged or echoed.
"""
from __future__ import annotations

import os
import threading
from contextlib import asynccontextmanager
from dataclasses import dataclass
from pathlib import Path

import httpx
import uvicorn
from fastapi import FastAPI, HTTPException, Request
from fastapi.exceptions import RequestValidationError
from fastapi.responses import JSONResponse
from pydantic import BaseModel

from . import detector
from .lexicon import Lexicon, lexicon_fingerprint, load_lexicon
from .watermark import (
    DEFAULT_KEY_ENV,
    WatermarkKey,
    _target_index,
    apply_watermark,
    key_from_env,
    key_from_file,
)

DEFAULT_VERIFY_TOKEN_ENV = "WM_VERIFY_TOKEN"


@dataclass
class ServiceConfig:
    listen: str = "127.0.0.1:8377"
    upstream_mode: str = "stub_echo"  # or "http"
    upstream_url: str | None = None
    lexicon_path: str | None = None
    key_env: str = DEFAULT_KEY_ENV
    key_file: str | None = None
    verify_token_env: str = DEFAULT_VERIFY_TOKEN_ENV
    timeout_s: float = 10.0
    max_body_bytes: int = 1_048_576
    tau: float | None = None
    alpha: float = detector.DEFAULT_ALPHA


_CONFIG_FIELDS = {
    "listen": str,
    "upstream_mode": str,
    "upstream_url": str,
    "lexicon_path": str,
    "key_env": str,
    "key_file": str,
    "verify_token_env": str,
    "timeout_s": float,
    "max_body_bytes": int,
    "tau": float,
    "alpha": float,
}


def load_service_config(path: str | Path) -> ServiceConfig:
    """Parse a ``key=value`` config file; blank lines and # comments ignored."""
    config = ServiceConfig()
    for lineno, line in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), 1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ValueError(f"{path}:{lineno}: expected key=value")
        name, _, value = line.partition("=")
        name, value = name.strip(), value.strip()
        if name not in _CONFIG_FIELDS:
            raise ValueError(f"{path}:{lineno}: unknown setting {name!r}")
        if value:
            setattr(config, name, _CONFIG_FIELDS[name](value))
    return config


class GenerateRequest(BaseModel):
    input: str


class VerifyRequest(BaseModel):
    lines: list[str]


def create_app(
    config: ServiceConfig,
    lexicon: Lexicon | None = None,
    key: WatermarkKey | None = None,
) -> FastAPI:
    if lexicon is None:
        if not config.lexicon_path:
            raise ValueError("service config must name a lexicon file")
        lexicon = load_lexicon(config.lexicon_path)
    if key is None:
        key = key_from_file(config.key_file) if config.key_file else key_from_env(config.key_env)
    if config.upstream_mode not in ("stub_echo", "http"):
        raise ValueError(f"unknown upstream mode {config.upstream_mode!r}")
    if config.upstream_mode == "http" and not config.upstream_url:
        raise ValueError("http upstream mode requires upstream_url")

    fingerprint = lexicon_fingerprint(lexicon)
    verify_token = os.environ.get(config.verify_token_env) or None
    _target_index(lexicon, key)  # warm the assignment cache before serving

    counters = {"generate": 0, "verify": 0}
    counters_lock = threading.Lock()

    @asynccontextmanager
    async def lifespan(app: FastAPI):
        app.state.upstream = None
        if config.upstream_mode == "http":
            app.state.upstream = httpx.AsyncClient(timeout=config.timeout_s)
        yield
        if app.state.upstream is not None:
            await app.state.upstream.aclose()

    app = FastAPI(title="wordmark proxy", lifespan=lifespan)

    @app.middleware("http")
    async def limit_body(request: Request, call_next):
        declared = request.headers.get("content-length")
        if declared and declared.isdigit() and int(declared) > config.max_body_bytes:
            return JSONResponse({"error": "request body too large"}, status_code=413)
        body = await request.body()
        if len(body) > config.max_body_bytes:
            return JSONResponse({"error": "request body too large"}, status_code=413)
        return await call_next(request)

    @app.exception_handler(RequestValidationError)
    async def on_bad_request(request: Request, exc: RequestValidationError):
        return JSONResponse({"error": "malformed request body"}, status_code=400)

    @app.exception_handler(HTTPException)
    async def on_http_error(request: Request, exc: HTTPException):
        return JSONResponse({"error": exc.detail}, status_code=exc.status_code)

    async def fetch_upstream(text: str) -> str:
        if config.upstream_mode == "stub_echo":
            return text
        try:
            response = await app.state.upstream.post(config.upstream_url, json={"input": text})
            response.raise_for_status()
            payload = response.json()
        except httpx.TimeoutException:
            raise HTTPException(status_code=504, detail="upstream generator timed out")
        except (httpx.HTTPError, ValueError):
            raise HTTPException(status_code=502, detail="upstream generator failed")
        if not isinstance(payload, dict) or not isinstance(payload.get("text"), str):
            raise HTTPException(status_code=502, detail="upstream returned an unexpected payload")
        return payload["text"]

    @app.post("/v1/generate")
    async def generate(request: GenerateRequest):
        raw = await fetch_upstream(request.input)
        marked, _ = apply_watermark(raw, lexicon, key)
        with counters_lock:
            counters["generate"] += 1
        return {"text": marked}

    @app.post("/v1/verify")
    async def verify_corpus(request: Request, body: VerifyRequest):
        auth = request.headers.get("authorization", "")
        if verify_token is None or auth != f"Bearer {verify_token}":
            raise HTTPException(status_code=401, detail="verification requires a valid bearer token")
        report = detector.verify(body.lines, lexicon, key, tau=config.tau, alpha=config.alpha)
        with counters_lock:
            counters["verify"] += 1
        return report.to_json_dict()

    @app.get("/healthz")
    async def healthz():
        with counters_lock:
            served = dict(counters)
        return {
            "status": "ok",
            "lexicon_fingerprint": fingerprint,
            "groups": len(lexicon),
            "requests_served": served,
        }

    return app


def serve(config: ServiceConfig) -> None:
    """Run the proxy until interrupted."""
    host, _, port_text = config.listen.partition(":")
    app = create_app(config)
    uvicorn.run(app, host=host or "127.0.0.1", port=int(port_text or 8377))
