"""HTTP service binding the metric engine to the experiment protocol.

Sessions are issued against a participant roster; each participant is
assigned an arm once, and the arm decides response shaping: control sessions
get plainly ordered results with no completeness fields at all (the lambda
control is ignored server-side as well), treatment sessions get per-result
and cumulative completeness plus curve points, re-ranked only when the
client actually supplies a lambda. Every served (query, rank) pair is
logged so click telemetry can be validated against what the session saw.
"""

from __future__ import annotations

import csv
import hashlib
import json
import secrets
import threading
import time
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path
from typing import Optional

import numpy as np
from fastapi import FastAPI, HTTPException
from fastapi.responses import PlainTextResponse
from pydantic import BaseModel, Field

from . import completeness as comp
from .embedding import EmbedderConfig, embed_batch, embed_text
from .errors import NotFound
from .experiment import ArmAssigner, ARM_TREATMENT, SurveyResponse, load_scale, score_survey
from .ingestion import CorpusStore


def hash_password(password: str) -> str:
    return hashlib.sha256(password.encode("utf-8")).hexdigest()


def load_roster(path: str | Path) -> dict[str, str]:
    """participant id -> sha256 password hash, from a two-column CSV."""
    roster = {}
    with open(path, newline="", encoding="utf-8") as fh:
        for row in csv.reader(fh):
            if not row or row[0].startswith("#"):
                continue
            if row[0] == "id" and row[1] == "password_hash":
                continue
            roster[row[0]] = row[1]
    return roster


@dataclass
class ServiceConfig:
    data_dir: str = "./sonder-data"
    roster_path: Optional[str] = None
    seed: int = 0
    session_ttl_seconds: float = 3600.0
    embedder: EmbedderConfig = field(default_factory=EmbedderConfig)
    frontend_dir: Optional[str] = None

    @classmethod
    def from_env(cls, env=None) -> "ServiceConfig":
        import os
        env = os.environ if env is None else env
        return cls(
            data_dir=env.get("SONDER_DATA_DIR", "./sonder-data"),
            roster_path=env.get("SONDER_ROSTER"),
            seed=int(env.get("SONDER_SEED", "0")),
            embedder=EmbedderConfig.from_env(env),
        )


class SessionRequest(BaseModel):
    participant_id: str
    password: str


class SearchRequest(BaseModel):
    session_token: str
    query: str
    lambda_: Optional[float] = Field(default=None, alias="lambda")
    max_results: int = 10

    model_config = {"populate_by_name": True}


class ClickRequest(BaseModel):
    session_token: str
    query: str
    rank: int
    result_id: Optional[str] = None
    topic: str = ""


class SurveyRequest(BaseModel):
    session_token: str
    scale: str
    answers: list[int]


@dataclass
class _Session:
    token: str
    participant_id: str
    arm: str
    created_at: float
    expires_at: float


@dataclass
class _ScoredCorpus:
    key: tuple
    records: list
    relevance: list[float]
    completeness_raw: list[float]
    curve: comp.CompletenessCurve
    vectors: np.ndarray  # one row per record, rank order


def _utc_now() -> str:
    return datetime.now(timezone.utc).isoformat(timespec="seconds")


class SonderService:
    def __init__(self, config: ServiceConfig):
        self.config = config
        self.store = CorpusStore(config.data_dir)
        self.roster = (load_roster(config.roster_path)
                       if config.roster_path else {})
        self.assigner = ArmAssigner(config.seed)
        self._lock = threading.Lock()
        self.sessions: dict[str, _Session] = {}
        self.served: dict[str, dict[tuple[str, int], float]] = {}
        self.submitted_surveys: set[tuple[str, str]] = set()
        self._scored: dict[tuple, _ScoredCorpus] = {}
        self._query_index: Optional[dict[str, tuple]] = None
        self.counters: dict[str, int] = {}
        self.search_latencies: list[float] = []
        self._telemetry_dir = Path(config.data_dir) / "telemetry"
        self._load_arm_registry()

    # -- persistence helpers ------------------------------------------------

    def _arm_registry_path(self) -> Path:
        return Path(self.config.data_dir) / "arms.json"

    def _load_arm_registry(self):
        path = self._arm_registry_path()
        if path.exists():
            for pid, arm in json.loads(path.read_text("utf-8")).items():
                self.assigner._assigned[pid] = arm

    def _save_arm_registry(self):
        path = self._arm_registry_path()
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(json.dumps(self.assigner.assigned, indent=0), "utf-8")

    def _append_telemetry(self, name: str, obj: dict):
        self._telemetry_dir.mkdir(parents=True, exist_ok=True)
        with (self._telemetry_dir / name).open("a", encoding="utf-8") as fh:
            fh.write(json.dumps(obj, ensure_ascii=False) + "\n")

    # -- corpus resolution --------------------------------------------------

    def _index(self) -> dict[str, tuple]:
        if self._query_index is None:
            index: dict[str, tuple] = {}
            for key in sorted(self.store.keys()):
                index.setdefault(key[0], key)
            self._query_index = index
        return self._query_index

    def _scored_corpus(self, query: str) -> _ScoredCorpus:
        key = self._index().get(query)
        if key is None:
            raise NotFound(f"query not indexed: {query!r}")
        if key in self._scored:
            return self._scored[key]
        corpus = self.store.load(key)
        vectors = embed_batch(corpus.texts(), self.config.embedder)
        query_vec = embed_text(query, self.config.embedder)
        cvec = comp.build_corpus_vector(vectors)
        rel = [comp.relevance(query_vec, v) for v in vectors]
        cpl = [comp.result_completeness(v, cvec) for v in vectors]
        curve = comp.completeness_curve(vectors, cvec)
        scored = _ScoredCorpus(
            key=key,
            records=list(corpus.records),
            relevance=rel,
            completeness_raw=cpl,
            curve=curve,
            vectors=np.stack([v.as_array() for v in vectors]),
        )
        self._scored[key] = scored
        return scored

    # -- session handling ---------------------------------------------------

    def _session_for(self, token: str) -> _Session:
        sess = self.sessions.get(token)
        if sess is None or time.monotonic() > sess.expires_at:
            raise HTTPException(status_code=401, detail="invalid or expired session")
        return sess

    def _count(self, name: str):
        self.counters[name] = self.counters.get(name, 0) + 1


def create_app(config: Optional[ServiceConfig] = None) -> FastAPI:
    if config is None:
        config = ServiceConfig.from_env()
    svc = SonderService(config)
    app = FastAPI(title="sonder")
    app.state.service = svc

    @app.get("/health")
    def health():
        return {"status": "ok"}

    @app.post("/session")
    def create_session(req: SessionRequest):
        with svc._lock:
            svc._count("session")
            if req.participant_id not in svc.roster:
                raise HTTPException(status_code=404, detail="unknown participant")
            if svc.roster[req.participant_id] != hash_password(req.password):
                raise HTTPException(status_code=401, detail="bad credentials")
            arm = svc.assigner.assign(req.participant_id)
            svc._save_arm_registry()
            token = secrets.token_urlsafe(32)
            now = time.monotonic()
            sess = _Session(
                token=token,
                participant_id=req.participant_id,
                arm=arm,
                created_at=now,
                expires_at=now + config.session_ttl_seconds,
            )
            svc.sessions[token] = sess
            svc.served[token] = {}
            svc._append_telemetry("sessions.jsonl", {
                "participant_id": req.participant_id,
                "arm": arm,
                "timestamp": _utc_now(),
            })
        return {"token": token, "participant_id": req.participant_id,
                "ttl_seconds": config.session_ttl_seconds}

    @app.post("/search")
    def search(req: SearchRequest):
        started = time.perf_counter()
        with svc._lock:
            svc._count("search")
            sess = svc._session_for(req.session_token)
            if not req.query.strip():
                raise HTTPException(status_code=400, detail="empty query")
            if not (10 <= req.max_results <= 100):
                raise HTTPException(status_code=400,
                                    detail="max_results outside [10, 100]")
            if req.lambda_ is not None and not (0.0 <= req.lambda_ <= 1.0):
                raise HTTPException(status_code=400,
                                    detail="lambda outside [0, 1]")
            try:
                scored = svc._scored_corpus(req.query)
            except NotFound:
                raise HTTPException(status_code=404, detail="QueryNotIndexed")

            treatment = sess.arm == ARM_TREATMENT
            order = list(range(len(scored.records)))
            use_lambda = req.lambda_ if treatment else None
            if use_lambda is not None:
                blend = [
                    comp.blended_score(scored.relevance[i],
                                       scored.completeness_raw[i],
                                       comp.Lambda(use_lambda))
                    for i in order
                ]
                order.sort(key=lambda i: (-blend[i], i))
            slice_idx = order[:req.max_results]

            results = []
            for i in slice_idx:
                rec = scored.records[i]
                item = {
                    "title": rec.title,
                    "snippet": rec.snippet,
                    "url": rec.url,
                    "rank": rec.rank,
                }
                if treatment:
                    item["relevance"] = round(scored.relevance[i], 6)
                    item["completeness"] = comp.report_scale(
                        scored.completeness_raw[i]
                    )
                    if use_lambda is not None:
                        item["blended"] = round(
                            comp.blended_score(scored.relevance[i],
                                               scored.completeness_raw[i],
                                               comp.Lambda(use_lambda)), 6,
                        )
                results.append(item)

            body = {
                "query": req.query,
                "results": results,
                "scores_visible": treatment,
            }
            if treatment:
                # cumulative completeness of the returned slice, uniform corpus
                partial = scored.vectors[slice_idx].sum(axis=0)
                corpus_arr = scored.vectors.sum(axis=0)
                cum_raw = comp.cosine_arrays(corpus_arr, partial)
                body["cumulative_completeness"] = comp.report_scale(cum_raw)
                body["curve"] = [
                    [round(f, 6), comp.report_scale(v)]
                    for f, v in scored.curve.points
                ]
                if use_lambda is not None:
                    body["lambda"] = use_lambda

            log = svc.served.setdefault(sess.token, {})
            for i in slice_idx:
                rec = scored.records[i]
                log[(req.query, rec.rank)] = scored.completeness_raw[i]
            svc.search_latencies.append(time.perf_counter() - started)
        return body

    @app.post("/click")
    def click(req: ClickRequest):
        with svc._lock:
            svc._count("click")
            sess = svc._session_for(req.session_token)
            log = svc.served.get(sess.token, {})
            if (req.query, req.rank) not in log:
                raise HTTPException(status_code=422, detail="UnservedResult")
            event = {
                "participant_id": sess.participant_id,
                "arm": sess.arm,
                "topic": req.topic,
                "query": req.query,
                "rank_clicked": req.rank,
                "completeness_of_result": comp.report_scale(
                    log[(req.query, req.rank)]
                ),
                "timestamp": _utc_now(),
            }
            svc._append_telemetry("clicks.jsonl", event)
        return {"status": "recorded", "rank": req.rank}

    @app.post("/survey")
    def survey(req: SurveyRequest):
        with svc._lock:
            svc._count("survey")
            sess = svc._session_for(req.session_token)
            try:
                scale = load_scale(req.scale)
            except FileNotFoundError:
                raise HTTPException(status_code=404, detail="unknown scale")
            phase_key = (sess.participant_id, req.scale)
            if phase_key in svc.submitted_surveys:
                raise HTTPException(status_code=409, detail="AlreadySubmitted")
            response = SurveyResponse(
                participant_id=sess.participant_id,
                scale_name=req.scale,
                answers=tuple(req.answers),
            )
            from .errors import InvalidResponse
            try:
                scores = score_survey(response, scale)
            except InvalidResponse as exc:
                raise HTTPException(status_code=400, detail=str(exc))
            svc.submitted_surveys.add(phase_key)
            svc._append_telemetry("surveys.jsonl", {
                "participant_id": sess.participant_id,
                "scale": req.scale,
                "answers": list(req.answers),
                "timestamp": _utc_now(),
            })
        return {"scale": req.scale, **scores}

    @app.get("/scale/{name}")
    def scale_definition(name: str):
        # participant-facing: item texts and the six selectable values only;
        # dimensions and reverse-coding stay server-side
        with svc._lock:
            svc._count("scale")
            try:
                scale = load_scale(name)
            except FileNotFoundError:
                raise HTTPException(status_code=404, detail="unknown scale")
        return {
            "name": scale.name,
            "items": [item.text for item in scale.items],
            "presented_values": [-3, -2, -1, 1, 2, 3],
        }

    @app.get("/metrics", response_class=PlainTextResponse)
    def metrics():
        with svc._lock:
            lines = []
            for name in sorted(svc.counters):
                lines.append(f'sonder_requests_total{{endpoint="{name}"}} '
                             f"{svc.counters[name]}")
            lat = sorted(svc.search_latencies)
            p50 = lat[len(lat) // 2] if lat else 0.0
            p99 = lat[min(len(lat) - 1, int(len(lat) * 0.99))] if lat else 0.0
            lines.append(f"sonder_search_latency_seconds_p50 {p50:.6f}")
            lines.append(f"sonder_search_latency_seconds_p99 {p99:.6f}")
            by_arm = {"treatment": 0, "control": 0}
            for sess in svc.sessions.values():
                by_arm[sess.arm] += 1
            for arm, count in sorted(by_arm.items()):
                lines.append(f'sonder_sessions{{arm="{arm}"}} {count}')
            lines.append(f"sonder_store_corpora {svc.store.size()}")
        return "\n".join(lines) + "\n"

    frontend = config.frontend_dir
    if frontend and Path(frontend).exists():
        from fastapi.staticfiles import StaticFiles
        app.mount("/app", StaticFiles(directory=frontend, html=True),
                  name="app")

    return app
