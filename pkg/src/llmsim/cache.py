"""KV-cache memory sizing and the per-session prompt-prefix cache."""

from __future__ import annotations

import enum
from collections import OrderedDict
from dataclasses import dataclass
from typing import Optional

from .catalog import LLMConfig, SimParams
from .traces import WorkloadTask


def kv_cache_bytes(llm: LLMConfig, n_tokens):
    """Bytes of keys plus values held for ``n_tokens`` tokens (scalar or array)."""
    return 2 * llm.layers * llm.heads * llm.head_dim * n_tokens * llm.bytes_per_param


@dataclass(frozen=True)
class PrefixKey:
    session_id: Optional[str]
    prefix_ids: tuple

    def __post_init__(self):
        if not self.prefix_ids:
            raise ValueError("prefix key needs at least one token")


@dataclass
class CacheStats:
    lookups: int = 0
    hits: int = 0
    misses: int = 0
    insertions: int = 0
    evictions: int = 0

    @property
    def hit_ratio(self) -> float:
        return cache_hit_ratio(self)


def cache_hit_ratio(stats: CacheStats) -> float:
    if stats.lookups <= 0:
        raise ZeroDivisionError("hit ratio undefined with zero lookups")
    return stats.hits / stats.lookups


class SessionCache:
    """Fixed-capacity LRU set of prefix keys for one session."""

    def __init__(self, capacity: int):
        if capacity < 1:
            raise ValueError("capacity must be >= 1")
        self.capacity = capacity
        self.entries: OrderedDict[PrefixKey, None] = OrderedDict()

    def __len__(self):
        return len(self.entries)

    def __contains__(self, key):
        return key in self.entries

    def lookup(self, key: PrefixKey) -> bool:
        if key in self.entries:
            self.entries.move_to_end(key)
            return True
        return False

    def insert(self, key: PrefixKey) -> Optional[PrefixKey]:
        """Insert ``key`` as most recent; return the evicted key, if any."""
        if key in self.entries:
            self.entries.move_to_end(key)
            return None
        evicted = None
        if len(self.entries) >= self.capacity:
            evicted, _ = self.entries.popitem(last=False)
        self.entries[key] = None
        return evicted


class PrefixDecision(enum.Enum):
    INELIGIBLE = "ineligible"
    HIT = "hit"
    MISS = "miss"


class PrefixCache:
    """All session caches of a run, with shared statistics.

    Sessions never see each other's entries. Output tokens are not cached.
    """

    def __init__(self, capacity: int, min_len: int):
        self.capacity = capacity
        self.min_len = min_len
        self.sessions: dict[Optional[str], SessionCache] = {}
        self.stats = CacheStats()

    @classmethod
    def from_params(cls, params: SimParams) -> "PrefixCache":
        return cls(params.prefix_cache_capacity, params.prefix_min_len)

    def eligible(self, task: WorkloadTask) -> bool:
        # strictly longer than the prefix length, per the reference listing
        return (
            self.min_len > 0
            and task.input_token_ids is not None
            and len(task.input_token_ids) > self.min_len
        )

    def access(self, task: WorkloadTask) -> PrefixDecision:
        if not self.eligible(task):
            return PrefixDecision.INELIGIBLE
        key = PrefixKey(task.session_id, tuple(task.input_token_ids[: self.min_len]))
        session = self.sessions.get(task.session_id)
        if session is None:
            session = self.sessions[task.session_id] = SessionCache(self.capacity)
        self.stats.lookups += 1
        if session.lookup(key):
            self.stats.hits += 1
            return PrefixDecision.HIT
        self.stats.misses += 1
        self.stats.insertions += 1
        if session.insert(key) is not None:
            self.stats.evictions += 1
        return PrefixDecision.MISS


def try_prefix_hit(cache: PrefixCache, task: WorkloadTask, params: SimParams = None) -> PrefixDecision:
    """Look up ``task`` in ``cache``, inserting its prefix on an eligible miss.

    ``params`` is accepted for symmetry with the other engines; the cache
    already carries its capacity and prefix length.
    """
    if params is not None and (params.prefix_min_len != cache.min_len
                               or params.prefix_cache_capacity != cache.capacity):
        raise ValueError("params disagree with the cache configuration")
    return cache.access(task)
