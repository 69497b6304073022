"""Card registry: TTL caching, coalesced fetches, stale fallback, lookup speed."""

import threading

import pytest

from modalmesh.agents import build_agent_card
from modalmesh.httpd import start_server, RpcApp
from modalmesh.protocol import AgentCard, Skill, encode_card
from modalmesh.registry import (
    DEFAULT_TTL_SECONDS,
    CardFetchError,
    CardParseError,
    CardRegistry,
    HttpStatusError,
    NetworkUnreachableError,
    WELL_KNOWN_PATH,
    fetch_card_http,
)

URL = "http://agent.test"


def _card(name: str = "voice-agent") -> AgentCard:
    return AgentCard(name=name, url=URL, skills=[
        Skill(id="s", input_modes=["audio/wav"], output_modes=["text/plain"])])


class FakeClock:
    def __init__(self) -> None:
        self.now = 1000.0

    def __call__(self) -> float:
        return self.now

    def tick(self, seconds: float) -> None:
        self.now += seconds


class CountingFetcher:
    def __init__(self, card: AgentCard):
        self.card = card
        self.calls = 0
        self.fail_next = False
        self.block = None  # optional threading.Event to stall fetches

    def __call__(self, url: str) -> AgentCard:
        if self.block is not None:
            self.block.wait(timeout=5)
        self.calls += 1
        if self.fail_next:
            raise NetworkUnreachableError(f"injected outage for {url}")
        return self.card


def test_default_ttl_is_sixty_seconds():
    assert DEFAULT_TTL_SECONDS == 60.0


def test_exactly_one_fetch_per_ttl_window():
    clock = FakeClock()
    fetcher = CountingFetcher(_card())
    registry = CardRegistry(clock=clock, fetcher=fetcher)
    for _ in range(200):
        registry.get_capabilities(URL)
        clock.tick(0.25)  # 200 lookups over 50 s
    assert fetcher.calls == 1
    clock.tick(10.01)  # crosses the 60 s boundary
    registry.get_capabilities(URL)
    assert fetcher.calls == 2
    for _ in range(50):
        registry.get_capabilities(URL)
    assert fetcher.calls == 2


def test_capabilities_are_input_modes():
    registry = CardRegistry(clock=FakeClock(), fetcher=CountingFetcher(_card()))
    assert registry.get_capabilities(URL) == frozenset({"audio/wav"})


def test_concurrent_misses_coalesce_into_one_fetch():
    clock = FakeClock()
    fetcher = CountingFetcher(_card())
    fetcher.block = threading.Event()
    registry = CardRegistry(clock=clock, fetcher=fetcher)

    results = []
    threads = [threading.Thread(target=lambda: results.append(
        registry.get_capabilities(URL))) for _ in range(8)]
    for t in threads:
        t.start()
    fetcher.block.set()
    for t in threads:
        t.join(timeout=5)
    assert len(results) == 8
    assert fetcher.calls == 1


def test_stale_card_served_when_refetch_fails():
    clock = FakeClock()
    fetcher = CountingFetcher(_card())
    registry = CardRegistry(clock=clock, fetcher=fetcher)
    registry.get_capabilities(URL)

    clock.tick(61)
    fetcher.fail_next = True
    assert registry.get_capabilities(URL) == frozenset({"audio/wav"})
    assert registry.stats.stale_serves == 1

    # beyond the grace window the failure propagates
    clock.tick(registry.stale_grace_seconds + 1)
    with pytest.raises(CardFetchError):
        registry.get_capabilities(URL)


def test_cold_miss_failure_propagates():
    fetcher = CountingFetcher(_card())
    fetcher.fail_next = True
    registry = CardRegistry(clock=FakeClock(), fetcher=fetcher)
    with pytest.raises(CardFetchError):
        registry.get_capabilities(URL)


def test_invalidate_forces_refetch():
    clock = FakeClock()
    fetcher = CountingFetcher(_card())
    registry = CardRegistry(clock=clock, fetcher=fetcher)
    registry.get_card(URL)
    registry.invalidate(URL)
    registry.get_card(URL)
    assert fetcher.calls == 2


def test_warm_lookup_probe_requires_cached_card():
    registry = CardRegistry(clock=FakeClock(), fetcher=CountingFetcher(_card()))
    with pytest.raises(RuntimeError):
        registry.lookup_latency_probe(URL, samples=1)
    registry.get_capabilities(URL)
    timings = registry.lookup_latency_probe(URL, samples=100)
    assert len(timings) == 100 and all(t >= 0 for t in timings)


class _CardApp(RpcApp):
    def __init__(self, body: bytes, status: int = 200):
        self.body = body
        self.status = status

    def handle_get(self, path):
        if path == WELL_KNOWN_PATH:
            return self.status, "application/json", self.body
        return None


def test_fetch_card_http_against_live_server():
    card = build_agent_card("voice", "http://placeholder")
    handle = start_server(_CardApp(encode_card(card)))
    try:
        fetched = fetch_card_http(handle.url)
        assert fetched.capability_set() == frozenset({"audio/wav", "audio/webm"})
    finally:
        handle.shutdown()


def test_fetch_card_http_error_paths():
    handle = start_server(_CardApp(b"{not json", status=200))
    try:
        with pytest.raises(CardParseError):
            fetch_card_http(handle.url)
    finally:
        handle.shutdown()
    broken = start_server(_CardApp(b"", status=500))
    try:
        with pytest.raises(HttpStatusError):
            fetch_card_http(broken.url)
    finally:
        broken.shutdown()
    with pytest.raises(NetworkUnreachableError):
        fetch_card_http("http://127.0.0.1:9", timeout=0.3)
