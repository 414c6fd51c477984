"""Corpus ingestion, persistence, trending fixtures, and domain weighting.

The store keeps one line-delimited JSON file per (query, country, date, kind)
corpus, sharded by country/date so fixtures stay diff-able. Domain trust
weights come from PageRank over a domain link graph (damping 0.85, dangling
mass redistributed uniformly, output normalized to sum to 1).
"""

from __future__ import annotations

import hashlib
import json
import os
import re
import threading
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Optional, Sequence
from urllib.parse import urlparse

import numpy as np

from .errors import (
    CorruptStore,
    DuplicateRank,
    InvalidInput,
    NoConvergence,
    NotFound,
    ParseError,
)

RECORD_FIELDS = ("query", "country", "date", "rank", "kind", "title",
                 "snippet", "url", "domain")

_DATE_RE = re.compile(r"^\d{4}-\d{2}-\d{2}$")
_COUNTRY_RE = re.compile(r"^[A-Z]{2}$")

# second-level labels under which the registrable domain needs three labels
_SECOND_LEVEL = {"co", "com", "net", "org", "gov", "ac", "edu", "mil"}


def extract_domain(url: str) -> str:
    host = urlparse(url).hostname or ""
    host = host.lower().rstrip(".")
    labels = host.split(".")
    if len(labels) <= 2:
        return host
    if labels[-2] in _SECOND_LEVEL and len(labels[-1]) == 2:
        return ".".join(labels[-3:])
    return ".".join(labels[-2:])


@dataclass(frozen=True)
class SearchRecord:
    query: str
    country: str
    date: str
    rank: int
    kind: str
    title: str
    snippet: str
    url: str
    domain: str = ""

    def __post_init__(self):
        if self.rank < 1:
            raise InvalidInput(f"rank must be >= 1, got {self.rank}")
        if not _COUNTRY_RE.match(self.country):
            raise InvalidInput(f"bad country code {self.country!r}")
        if not _DATE_RE.match(self.date):
            raise InvalidInput(f"bad date {self.date!r}")
        if self.kind not in ("web", "news"):
            raise InvalidInput(f"kind must be web|news, got {self.kind!r}")
        if not self.domain:
            object.__setattr__(self, "domain", extract_domain(self.url))

    @property
    def key(self) -> tuple[str, str, str, str]:
        return (self.query, self.country, self.date, self.kind)

    @property
    def text(self) -> str:
        return f"{self.title} {self.snippet}".strip()

    def to_json(self) -> dict:
        return {f: getattr(self, f) for f in RECORD_FIELDS}

    @classmethod
    def from_json(cls, obj: dict) -> "SearchRecord":
        missing = [f for f in RECORD_FIELDS if f != "domain" and f not in obj]
        if missing:
            raise InvalidInput(f"missing fields: {', '.join(missing)}")
        return cls(**{f: obj[f] for f in RECORD_FIELDS if f in obj})


@dataclass(frozen=True)
class QueryCorpus:
    key: tuple[str, str, str, str]
    records: tuple[SearchRecord, ...]

    def __post_init__(self):
        if not self.records:
            raise InvalidInput("corpus must be nonempty")
        ranks = [r.rank for r in self.records]
        if ranks != sorted(ranks):
            object.__setattr__(
                self, "records",
                tuple(sorted(self.records, key=lambda r: r.rank)),
            )
            ranks = [r.rank for r in self.records]
        if len(set(ranks)) != len(ranks):
            dup = next(r for r in ranks if ranks.count(r) > 1)
            raise DuplicateRank(f"duplicate rank {dup} in corpus", rank=dup)
        if ranks != list(range(1, len(ranks) + 1)):
            raise InvalidInput("ranks must be contiguous from 1")

    def texts(self) -> list[str]:
        return [r.text for r in self.records]


# ---------------------------------------------------------------------------
# persistence

def _slug(query: str, kind: str) -> str:
    stem = re.sub(r"[^0-9a-z]+", "-", query.lower()).strip("-")[:60] or "q"
    digest = hashlib.blake2b(
        f"{kind}::{query}".encode("utf-8"), digest_size=6
    ).hexdigest()
    return f"{kind}__{stem}__{digest}"


class CorpusStore:
    """One JSONL file per corpus under root/country/date/."""

    def __init__(self, root: str | os.PathLike | None = None):
        if root is None:
            root = os.environ.get("SONDER_DATA_DIR", "./sonder-data")
        self.root = Path(root)
        self._locks: dict[tuple, threading.Lock] = {}
        self._locks_guard = threading.Lock()

    def _lock(self, key: tuple) -> threading.Lock:
        with self._locks_guard:
            return self._locks.setdefault(key, threading.Lock())

    def _path(self, key: tuple[str, str, str, str]) -> Path:
        query, country, date, kind = key
        return self.root / country / date / (_slug(query, kind) + ".jsonl")

    def store(self, corpus: QueryCorpus) -> Path:
        path = self._path(corpus.key)
        with self._lock(corpus.key):
            path.parent.mkdir(parents=True, exist_ok=True)
            tmp = path.with_suffix(".tmp")
            with tmp.open("w", encoding="utf-8") as fh:
                for rec in corpus.records:
                    fh.write(json.dumps(rec.to_json(), ensure_ascii=False))
                    fh.write("\n")
            tmp.replace(path)
        return path

    def load(self, key: tuple[str, str, str, str]) -> QueryCorpus:
        path = self._path(key)
        if not path.exists():
            raise NotFound(f"no corpus stored for {key!r}")
        records = []
        with path.open("r", encoding="utf-8") as fh:
            for i, line in enumerate(fh, start=1):
                if not line.strip():
                    continue
                try:
                    records.append(SearchRecord.from_json(json.loads(line)))
                except (json.JSONDecodeError, InvalidInput) as exc:
                    raise CorruptStore(f"{path}:{i}: {exc}") from exc
        return QueryCorpus(key=key, records=tuple(records))

    def exists(self, key: tuple[str, str, str, str]) -> bool:
        return self._path(key).exists()

    def keys(self) -> list[tuple[str, str, str, str]]:
        found = []
        if not self.root.exists():
            return found
        for path in sorted(self.root.glob("*/*/*.jsonl")):
            try:
                with path.open("r", encoding="utf-8") as fh:
                    first = json.loads(fh.readline())
                rec = SearchRecord.from_json(first)
            except Exception as exc:  # noqa: BLE001
                raise CorruptStore(f"{path}: {exc}") from exc
            found.append(rec.key)
        return found

    def size(self) -> int:
        if not self.root.exists():
            return 0
        return sum(1 for _ in self.root.glob("*/*/*.jsonl"))


def ingest_jsonl(path: str | os.PathLike, store: CorpusStore,
                 strict: bool = False) -> int:
    """Validate and persist records from a JSONL file; returns accepted count.

    Malformed lines abort in strict mode and are skipped otherwise.
    Within-file duplicate ranks raise DuplicateRank; corpora whose key is
    already in the store are rejected whole (re-runs are no-ops).
    """
    path = Path(path)
    if not path.exists():
        raise NotFound(f"no such file: {path}")
    grouped: dict[tuple, list[SearchRecord]] = {}
    with path.open("r", encoding="utf-8") as fh:
        for i, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                rec = SearchRecord.from_json(json.loads(line))
            except (json.JSONDecodeError, InvalidInput) as exc:
                if strict:
                    raise ParseError(f"line {i}: {exc}", line_number=i) from exc
                continue
            grouped.setdefault(rec.key, []).append(rec)

    accepted = 0
    for key, records in grouped.items():
        ranks = [r.rank for r in records]
        dups = sorted({r for r in ranks if ranks.count(r) > 1})
        if dups:
            raise DuplicateRank(
                f"duplicate rank {dups[0]} for key {key!r}", rank=dups[0]
            )
        if store.exists(key):
            continue
        store.store(QueryCorpus(key=key, records=tuple(records)))
        accepted += len(records)
    return accepted


# ---------------------------------------------------------------------------
# trending-query fixtures

class FixtureTrendingProvider:
    """Reads trending queries from <root>/<country>/<date>.txt fixtures."""

    def __init__(self, root: str | os.PathLike):
        self.root = Path(root)

    def fetch(self, country: str, date: str) -> list[str]:
        path = self.root / country / f"{date}.txt"
        if not path.exists():
            raise NotFound(f"no trending fixture for {country} {date}")
        with path.open("r", encoding="utf-8") as fh:
            return [line.strip() for line in fh if line.strip()]


def fetch_trending(provider, country: str, date: str) -> list[str]:
    return provider.fetch(country, date)


# ---------------------------------------------------------------------------
# PageRank domain weights

@dataclass(frozen=True)
class DomainGraph:
    nodes: tuple[str, ...]
    edges: tuple[tuple[int, int], ...]

    def __post_init__(self):
        n = len(self.nodes)
        if n < 1:
            raise InvalidInput("graph needs at least one node")
        kept = []
        for a, b in self.edges:
            if not (0 <= a < n and 0 <= b < n):
                raise InvalidInput(f"edge ({a}, {b}) out of range")
            if a != b:  # self-loops dropped at load
                kept.append((a, b))
        object.__setattr__(self, "edges", tuple(kept))


def pagerank(graph: DomainGraph, damping: float = 0.85,
             tol: float = 1e-10, max_iter: int = 200) -> dict[str, float]:
    n = len(graph.nodes)
    out_degree = np.zeros(n)
    for a, _ in graph.edges:
        out_degree[a] += 1.0
    p = np.full(n, 1.0 / n)
    by_target: dict[int, list[int]] = {}
    for a, b in graph.edges:
        by_target.setdefault(b, []).append(a)
    for _ in range(max_iter):
        incoming = np.zeros(n)
        with np.errstate(divide="ignore", invalid="ignore"):
            contrib = np.where(out_degree > 0, p / np.maximum(out_degree, 1), 0.0)
        for b, sources in by_target.items():
            incoming[b] = sum(contrib[a] for a in sources)
        dangling = p[out_degree == 0].sum()
        new_p = (1.0 - damping) / n + damping * (incoming + dangling / n)
        if np.abs(new_p - p).sum() < tol:
            p = new_p
            break
        p = new_p
    else:
        raise NoConvergence(
            f"pagerank did not converge in {max_iter} iterations",
            last_iterate={d: float(v) for d, v in zip(graph.nodes, p)},
        )
    p = p / p.sum()
    return {d: float(v) for d, v in zip(graph.nodes, p)}


def weights_for_corpus(corpus: QueryCorpus, weights: dict[str, float],
                       floor: float = 1e-6) -> list[float]:
    """Per-result weights in rank order; unknown domains get the floor."""
    return [max(weights.get(rec.domain, floor), floor)
            for rec in corpus.records]
