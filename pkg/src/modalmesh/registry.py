"""Agent card discovery with a TTL cache.

Capability lookups happen on every routing decision, so cards are cached for
a configurable TTL (60 s by default) with request coalescing: concurrent
misses for the same URL share one fetch. If a refetch fails while a stale
entry exists, the stale card is served with a logged warning for up to
`stale_grace_seconds` beyond the TTL.

Entries are immutable and replaced atomically, so readers never observe a
partially updated card. The clock is injectable for deterministic tests.
"""

from __future__ import annotations

import logging
import threading
import time
from dataclasses import dataclass, field
from typing import Callable, Optional

import httpx

from .protocol import AgentCard, MessageDecodeError, decode_card

log = logging.getLogger(__name__)

WELL_KNOWN_PATH = "/.well-known/agent-card.json"

DEFAULT_TTL_SECONDS = 60.0
DEFAULT_STALE_GRACE_SECONDS = 300.0


class CardFetchError(RuntimeError):
    """Base class for card retrieval failures."""


class NetworkUnreachableError(CardFetchError):
    pass


class HttpStatusError(CardFetchError):
    def __init__(self, url: str, status_code: int):
        super().__init__(f"card endpoint {url} returned HTTP {status_code}")
        self.status_code = status_code


class CardParseError(CardFetchError):
    pass


def fetch_card_http(agent_url: str, timeout: float = 5.0) -> AgentCard:
    """Fetch and decode the card published at the agent's well-known path."""
    url = agent_url.rstrip("/") + WELL_KNOWN_PATH
    try:
        response = httpx.get(url, timeout=timeout)
    except httpx.HTTPError as exc:
        raise NetworkUnreachableError(f"cannot reach {url}: {exc}") from exc
    if response.status_code != 200:
        raise HttpStatusError(url, response.status_code)
    try:
        return decode_card(response.content)
    except MessageDecodeError as exc:
        raise CardParseError(f"bad card from {url}: {exc}") from exc


@dataclass(frozen=True)
class _CacheEntry:
    card: AgentCard
    capabilities: frozenset[str]
    fetched_at: float


@dataclass
class RegistryStats:
    fetches: dict[str, int] = field(default_factory=dict)
    stale_serves: int = 0

    def fetch_count(self, url: str) -> int:
        return self.fetches.get(url, 0)


class CardRegistry:
    def __init__(
        self,
        ttl_seconds: float = DEFAULT_TTL_SECONDS,
        stale_grace_seconds: float = DEFAULT_STALE_GRACE_SECONDS,
        clock: Callable[[], float] = time.monotonic,
        fetcher: Callable[[str], AgentCard] = fetch_card_http,
    ):
        self.ttl_seconds = ttl_seconds
        self.stale_grace_seconds = stale_grace_seconds
        self._clock = clock
        self._fetcher = fetcher
        self._entries: dict[str, _CacheEntry] = {}
        self._master_lock = threading.Lock()
        self._url_locks: dict[str, threading.Lock] = {}
        self.stats = RegistryStats()

    def _lock_for(self, url: str) -> threading.Lock:
        with self._master_lock:
            lock = self._url_locks.get(url)
            if lock is None:
                lock = self._url_locks[url] = threading.Lock()
            return lock

    def get_card(self, agent_url: str) -> AgentCard:
        entry = self._entries.get(agent_url)
        if entry is not None and self._clock() - entry.fetched_at < self.ttl_seconds:
            return entry.card
        return self._refresh(agent_url).card

    def get_capabilities(self, agent_url: str) -> frozenset[str]:
        """Union of declared input modes across the agent's skills."""
        entry = self._entries.get(agent_url)
        if entry is not None and self._clock() - entry.fetched_at < self.ttl_seconds:
            return entry.capabilities
        return self._refresh(agent_url).capabilities

    def _refresh(self, agent_url: str) -> _CacheEntry:
        with self._lock_for(agent_url):
            # A concurrent miss may have refreshed while this thread waited.
            entry = self._entries.get(agent_url)
            now = self._clock()
            if entry is not None and now - entry.fetched_at < self.ttl_seconds:
                return entry
            try:
                card = self._fetcher(agent_url)
            except CardFetchError:
                if entry is not None and (
                    now - entry.fetched_at < self.ttl_seconds + self.stale_grace_seconds
                ):
                    log.warning(
                        "card refetch for %s failed; serving stale entry aged %.1fs",
                        agent_url,
                        now - entry.fetched_at,
                    )
                    with self._master_lock:
                        self.stats.stale_serves += 1
                    return entry
                raise
            fresh = _CacheEntry(
                card=card,
                capabilities=card.capability_set(),
                fetched_at=self._clock(),
            )
            self._entries[agent_url] = fresh
            with self._master_lock:
                self.stats.fetches[agent_url] = self.stats.fetches.get(agent_url, 0) + 1
            return fresh

    def invalidate(self, agent_url: Optional[str] = None) -> None:
        with self._master_lock:
            if agent_url is None:
                self._entries.clear()
            else:
                self._entries.pop(agent_url, None)

    def lookup_latency_probe(self, agent_url: str, samples: int = 10_000) -> list[float]:
        """Per-lookup wall times (seconds) for warm-cache capability reads.

        The card must already be cached; the probe never triggers a fetch.
        """
        if agent_url not in self._entries:
            raise RuntimeError(f"card for {agent_url} is not cached; probe is warm-only")
        timings: list[float] = []
        for _ in range(samples):
            start = time.perf_counter()
            self.get_capabilities(agent_url)
            timings.append(time.perf_counter() - start)
        return timings
