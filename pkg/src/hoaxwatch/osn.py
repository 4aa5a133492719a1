"""Search-API client for a Twitter-shaped social network.

Executes keyword queries with a date floor and cursor pagination under a
client-side rate limit, checkpoints progress, and hashes author identifiers at
ingestion so raw user ids never reach disk. Endpoints starting with ``mock:``
are served in-process from recorded fixture files, which keeps the test suite
fully offline; the wire shape mirrors a recent-search endpoint:

    GET {endpoint}/2/tweets/search/all?query=...&start_time=...&next_token=...
    -> {"data": [...], "meta": {"next_token": ...}}
"""

from __future__ import annotations

import hashlib
import json
import logging
import os
import time
from collections import deque
from dataclasses import dataclass, field
from datetime import datetime, timezone
from typing import Callable, Iterator, Sequence

import requests

from .errors import (
    AuthFailedError,
    MalformedQueryError,
    MalformedResponseError,
    PageLossError,
    RateLimitedError,
)

log = logging.getLogger(__name__)

MOCK_PREFIX = "mock:"
BEARER_TOKEN_ENV = "HOAXWATCH_OSN_TOKEN"

# "the beginning of the pandemic" is not a date; this floor is config
DEFAULT_DATE_FLOOR = datetime(2020, 1, 1, tzinfo=timezone.utc)


def parse_utc(value: str) -> datetime:
    dt = datetime.fromisoformat(value.replace("Z", "+00:00"))
    if dt.tzinfo is None:
        dt = dt.replace(tzinfo=timezone.utc)
    return dt.astimezone(timezone.utc)


def iso_utc(dt: datetime) -> str:
    return dt.astimezone(timezone.utc).strftime("%Y-%m-%dT%H:%M:%SZ")


def hash_author(author_id: str, salt: str) -> str:
    return hashlib.sha256(f"{salt}:{author_id}".encode("utf-8")).hexdigest()


@dataclass(frozen=True)
class TweetRecord:
    id: str
    text: str
    created_at: datetime
    author_hash: str
    lang: str = "und"
    is_reply: bool = False


@dataclass(frozen=True)
class SearchJob:
    hoax_id: int | str
    query: str
    since: datetime = DEFAULT_DATE_FLOOR
    until: datetime | None = None
    max_results: int | None = None
    cursor: str | None = None

    def __post_init__(self):
        if not self.query.strip():
            raise ValueError("query must be nonempty")
        if self.until is not None and self.since > self.until:
            raise ValueError("since must not exceed until")


@dataclass(frozen=True)
class OsnClientConfig:
    endpoint: str
    rate_limit_per_window: int = 300
    window_seconds: float = 900.0
    hash_salt: str = "hoaxwatch"
    page_size: int = 100
    bearer_token: str | None = None

    def resolved_token(self) -> str | None:
        return self.bearer_token or os.environ.get(BEARER_TOKEN_ENV)


class MockOsnServer:
    """In-process stand-in for the search endpoint, fed by fixture files.

    Fixture file: a JSON list of {"request_matcher": {"query": ...},
    "pages": [{"data": [...], "meta": {...}}, ...]}. Cursors are synthesized
    as "page-<n>"; unknown cursors get a 400, mimicking expiry. The server
    also counts requests per rate window so tests can assert the client never
    exceeds the advertised limit.
    """

    def __init__(self, fixture_path: str, rate_limit: int | None = None,
                 window_seconds: float = 900.0,
                 clock: Callable[[], float] = time.monotonic):
        with open(fixture_path, encoding="utf-8") as fh:
            self.fixtures = json.load(fh)
        if isinstance(self.fixtures, dict):
            self.fixtures = [self.fixtures]
        self.rate_limit = rate_limit
        self.window_seconds = window_seconds
        self.clock = clock
        self.request_times: deque[float] = deque()
        self.total_requests = 0
        self.max_seen_in_window = 0

    def _match(self, query: str) -> dict | None:
        for fixture in self.fixtures:
            if fixture.get("request_matcher", {}).get("query") == query:
                return fixture
        return None

    def handle(self, params: dict) -> tuple[int, dict]:
        now = self.clock()
        self.total_requests += 1
        while self.request_times and now - self.request_times[0] >= self.window_seconds:
            self.request_times.popleft()
        self.request_times.append(now)
        self.max_seen_in_window = max(self.max_seen_in_window, len(self.request_times))
        if self.rate_limit is not None and len(self.request_times) > self.rate_limit:
            retry_after = self.window_seconds - (now - self.request_times[0])
            return 429, {"title": "Too Many Requests", "retry_after": retry_after}

        fixture = self._match(params.get("query", ""))
        if fixture is None:
            return 400, {"errors": [{"message": "no fixture for query"}]}
        pages = fixture.get("pages", [])
        token = params.get("next_token")
        if token is None:
            page_idx = 0
        else:
            if not token.startswith("page-"):
                return 400, {"errors": [{"message": "invalid or expired next_token"}]}
            try:
                page_idx = int(token.split("-", 1)[1])
            except ValueError:
                return 400, {"errors": [{"message": "invalid or expired next_token"}]}
            if not 0 <= page_idx < len(pages):
                return 400, {"errors": [{"message": "invalid or expired next_token"}]}
        if not pages:
            return 200, {"data": [], "meta": {"result_count": 0}}
        page = dict(pages[page_idx])
        meta = dict(page.get("meta", {}))
        if page_idx + 1 < len(pages):
            meta["next_token"] = f"page-{page_idx + 1}"
        else:
            meta.pop("next_token", None)
        page["meta"] = meta
        return 200, page


class OsnClient:
    """Paginating search client with checkpoint/resume semantics."""

    def __init__(self, config: OsnClientConfig,
                 clock: Callable[[], float] = time.monotonic,
                 sleep: Callable[[float], None] = time.sleep,
                 mock_server: MockOsnServer | None = None):
        self.config = config
        self.clock = clock
        self.sleep = sleep
        self._request_times: deque[float] = deque()
        if config.endpoint.startswith(MOCK_PREFIX):
            self.mock = mock_server or MockOsnServer(
                config.endpoint[len(MOCK_PREFIX):], clock=clock
            )
            self._session = None
        else:
            self.mock = mock_server
            self._session = requests.Session() if mock_server is None else None

    def _throttle(self) -> None:
        limit = self.config.rate_limit_per_window
        window = self.config.window_seconds
        now = self.clock()
        while self._request_times and now - self._request_times[0] >= window:
            self._request_times.popleft()
        if len(self._request_times) >= limit:
            wait = window - (now - self._request_times[0])
            if wait > 0:
                self.sleep(wait)
            now = self.clock()
            while self._request_times and now - self._request_times[0] >= window:
                self._request_times.popleft()
        self._request_times.append(self.clock())

    def _get_page(self, params: dict) -> dict:
        while True:
            self._throttle()
            if self.mock is not None:
                status, doc = self.mock.handle(params)
            else:
                resp = self._session.get(
                    self.config.endpoint.rstrip("/") + "/2/tweets/search/all",
                    params=params,
                    headers={"Authorization": f"Bearer {self.config.resolved_token() or ''}"},
                    timeout=30,
                )
                status = resp.status_code
                try:
                    doc = resp.json()
                except ValueError as exc:
                    raise MalformedResponseError("search endpoint returned non-JSON") from exc
            if status == 429:
                retry_after = float(doc.get("retry_after", self.config.window_seconds))
                log.warning("rate limited; sleeping %.1fs", retry_after)
                self.sleep(retry_after)
                continue
            if status in (401, 403):
                raise AuthFailedError(f"authentication rejected ({status})")
            if status == 400:
                message = "; ".join(
                    e.get("message", "") for e in doc.get("errors", [])
                ) or "bad request"
                if "next_token" in message:
                    raise PageLossError(message)
                raise MalformedQueryError(message)
            if status != 200:
                raise MalformedResponseError(f"search endpoint returned {status}")
            return doc

    def _to_record(self, tweet: dict) -> TweetRecord:
        return TweetRecord(
            id=str(tweet["id"]),
            text=str(tweet.get("text", "")),
            created_at=parse_utc(tweet["created_at"]),
            author_hash=hash_author(str(tweet.get("author_id", "")), self.config.hash_salt),
            lang=str(tweet.get("lang", "und")),
            is_reply=bool(tweet.get("in_reply_to_user_id")),
        )

    def run_search(self, job: SearchJob,
                   checkpoint_path: str | None = None) -> Iterator[list[TweetRecord]]:
        """Yield pages of unique records satisfying the job's date floor.

        After each page the cursor and seen ids are checkpointed (when a path
        is given); an expired cursor restarts pagination from the beginning,
        skipping already-seen ids, instead of failing the job.
        """
        state = _Checkpoint.load(checkpoint_path) if checkpoint_path else _Checkpoint()
        if job.cursor is not None and state.cursor is None:
            state.cursor = job.cursor
        emitted = state.count
        cursor = state.cursor
        restarted = False
        while True:
            params = {
                "query": job.query,
                "start_time": iso_utc(job.since),
                "max_results": self.config.page_size,
            }
            if job.until is not None:
                params["end_time"] = iso_utc(job.until)
            if cursor:
                params["next_token"] = cursor
            try:
                doc = self._get_page(params)
            except PageLossError:
                if restarted:
                    raise
                log.warning("cursor expired; restarting from checkpoint")
                restarted = True
                cursor = None
                continue
            batch = []
            for tweet in doc.get("data", []):
                record = self._to_record(tweet)
                if record.id in state.seen_ids:
                    continue
                if record.created_at < job.since:
                    continue
                if job.until is not None and record.created_at > job.until:
                    continue
                state.seen_ids.add(record.id)
                batch.append(record)
                if job.max_results is not None and emitted + len(batch) >= job.max_results:
                    break
            cursor = doc.get("meta", {}).get("next_token")
            emitted += len(batch)
            state.cursor = cursor
            state.count = emitted
            if checkpoint_path:
                state.save(checkpoint_path)
            if batch:
                yield batch
            if job.max_results is not None and emitted >= job.max_results:
                return
            if not cursor:
                return


@dataclass
class _Checkpoint:
    cursor: str | None = None
    seen_ids: set[str] = field(default_factory=set)
    count: int = 0

    @staticmethod
    def load(path: str) -> "_Checkpoint":
        if not os.path.exists(path):
            return _Checkpoint()
        with open(path, encoding="utf-8") as fh:
            doc = json.load(fh)
        return _Checkpoint(
            cursor=doc.get("cursor"),
            seen_ids=set(doc.get("seen_ids", ())),
            count=int(doc.get("count", 0)),
        )

    def save(self, path: str) -> None:
        doc = {"cursor": self.cursor, "seen_ids": sorted(self.seen_ids), "count": self.count}
        tmp = path + ".tmp"
        with open(tmp, "w", encoding="utf-8") as fh:
            json.dump(doc, fh)
        os.replace(tmp, path)


# --- corpus persistence ---


def persist_tweets(records: Sequence[TweetRecord], corpus_path: str) -> int:
    """Append records to a JSONL corpus; returns the number written."""
    count = 0
    with open(corpus_path, "a", encoding="utf-8") as fh:
        for record in records:
            doc = {
                "id": record.id,
                "text": record.text,
                "created_at": iso_utc(record.created_at),
                "author_hash": record.author_hash,
                "lang": record.lang,
                "is_reply": record.is_reply,
            }
            fh.write(json.dumps(doc, ensure_ascii=False) + "\n")
            count += 1
    return count


def load_tweets(corpus_path: str) -> list[TweetRecord]:
    """Load a corpus, dropping duplicate ids and corrupt lines (with a warning)."""
    records: list[TweetRecord] = []
    seen: set[str] = set()
    corrupt = 0
    with open(corpus_path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                doc = json.loads(line)
                record = TweetRecord(
                    id=str(doc["id"]),
                    text=str(doc["text"]),
                    created_at=parse_utc(doc["created_at"]),
                    author_hash=str(doc["author_hash"]),
                    lang=str(doc.get("lang", "und")),
                    is_reply=bool(doc.get("is_reply", False)),
                )
            except (ValueError, KeyError, TypeError):
                corrupt += 1
                log.warning("%s:%d corrupt line skipped", corpus_path, lineno)
                continue
            if record.id in seen:
                continue
            seen.add(record.id)
            records.append(record)
    if corrupt:
        log.warning("%s: skipped %d corrupt line(s)", corpus_path, corrupt)
    return records


def export_public(labeled, out_path: str) -> int:
    """Write the publishable dataset: ids and labels only, no text, no authors."""
    count = 0
    with open(out_path, "w", encoding="utf-8") as fh:
        for item in labeled:
            label = getattr(item.label, "value", item.label)
            doc = {
                "tweet_id": item.tweet_id,
                "hoax_id": item.hoax_id,
                "label": label,
                "similarity": item.similarity,
            }
            fh.write(json.dumps(doc) + "\n")
            count += 1
    return count
