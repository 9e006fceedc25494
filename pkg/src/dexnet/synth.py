"""Seeded synthetic pool registries and transfer streams.

Each new token opens a pool with the hub token with probability ``p_hub``
and otherwise with an existing token picked by preferential attachment
(weight ``degree ** attachment_exponent``). With probability
``extra_pool_rate`` it opens a second pool chosen by the same rule.
Transfers land on pools with Zipf-distributed popularity (rank = creation
order, so early pools are the busiest) at uniformly random blocks.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .core import BlockRange, Platform, TokenId
from .ingest import Pool, PoolRegistry, TransferRecord

__all__ = ["SynthParams", "generate_stream", "write_stream", "token_address", "pool_address"]

STUDY_RANGE = BlockRange(10_060_850, 15_076_596)


def _addr(kind: str, i: int) -> str:
    return "0x" + hashlib.sha256(f"{kind}:{i}".encode()).hexdigest()[:40]


def token_address(i: int) -> str:
    return _addr("token", i)


def pool_address(i: int) -> str:
    return _addr("pool", i)


@dataclass(frozen=True)
class SynthParams:
    n_tokens: int = 10_000
    n_transfers: int = 100_000
    p_hub: float = 0.4
    attachment_exponent: float = 1.0
    block_range: BlockRange = field(default=STUDY_RANGE)
    seed: int = 0
    zipf_exponent: float = 1.1
    extra_pool_rate: float = 0.1
    platform: Platform = Platform.UNISWAP
    hub_symbol: str = "WETH"

    def __post_init__(self):
        if self.n_tokens < 2:
            raise ValueError("need at least two tokens")
        if self.n_transfers < 1:
            raise ValueError("n_transfers must be positive")
        if not 0.0 <= self.p_hub <= 1.0:
            raise ValueError("p_hub must lie in [0, 1]")
        if not 0.0 <= self.extra_pool_rate <= 1.0:
            raise ValueError("extra_pool_rate must lie in [0, 1]")
        if self.zipf_exponent < 0:
            raise ValueError("zipf_exponent must be non-negative")


class _Attachment:
    """Samples existing tokens with probability proportional to degree**alpha."""

    def __init__(self, n, alpha, rng):
        self.alpha = alpha
        self.rng = rng
        self.degree = np.zeros(n)
        self.ends: list[int] = []  # one entry per edge endpoint; used when alpha == 1

    def add_edge(self, a, b):
        self.degree[a] += 1
        self.degree[b] += 1
        self.ends += (a, b)

    def pick(self, upto, exclude=()):
        for _ in range(64):
            if self.alpha == 1.0:
                c = self.ends[int(self.rng.integers(len(self.ends)))]
            else:
                w = self.degree[:upto] ** self.alpha
                c = int(self.rng.choice(upto, p=w / w.sum()))
            if c not in exclude:
                return c
        return None


def generate_stream(params: SynthParams = SynthParams()) -> tuple[PoolRegistry, list[TransferRecord]]:
    rng = np.random.default_rng(params.seed)
    n = params.n_tokens
    tokens = [TokenId(token_address(0), params.hub_symbol)]
    tokens += [TokenId(token_address(i), f"TK{i}") for i in range(1, n)]

    pairs: list[tuple[int, int]] = []
    seen: set[tuple[int, int]] = set()
    attach = _Attachment(n, params.attachment_exponent, rng)

    def open_pool(a, b):
        key = (min(a, b), max(a, b))
        if a == b or key in seen:
            return
        seen.add(key)
        pairs.append((a, b))
        attach.add_edge(a, b)

    def partner_for(i, exclude=()):
        if rng.random() < params.p_hub:
            return 0
        return attach.pick(i, exclude)

    open_pool(1, 0)
    for i in range(2, n):
        partner = partner_for(i)
        open_pool(i, partner)
        if rng.random() < params.extra_pool_rate:
            other = partner_for(i, exclude=(partner,))
            if other is not None:
                open_pool(i, other)  # a repeat of the first pair is dropped

    registry = PoolRegistry()
    for k, (a, b) in enumerate(pairs):
        registry.add(Pool(pool_address(k), tokens[a], tokens[b], params.platform))

    n_pools = len(pairs)
    # older pools are busier: popularity rank follows creation order
    ranks = np.arange(1, n_pools + 1)
    popularity = ranks.astype(float) ** -params.zipf_exponent
    chosen = rng.choice(n_pools, size=params.n_transfers, p=popularity / popularity.sum())
    blocks = rng.integers(params.block_range.start, params.block_range.end + 1,
                          size=params.n_transfers)
    order = np.argsort(blocks, kind="stable")
    addrs = [pool_address(k) for k in range(n_pools)]
    records = [TransferRecord(int(blocks[j]), addrs[chosen[j]], params.platform) for j in order]
    return registry, records


def write_stream(registry: PoolRegistry, records, prefix) -> tuple[Path, Path]:
    """Write ``<prefix>.pools.jsonl`` and ``<prefix>.transfers.jsonl``."""
    prefix = Path(prefix)
    prefix.parent.mkdir(parents=True, exist_ok=True)
    pools_path = prefix.with_name(prefix.name + ".pools.jsonl")
    transfers_path = prefix.with_name(prefix.name + ".transfers.jsonl")
    with open(pools_path, "w", encoding="utf-8", newline="\n") as fh:
        for line in registry.to_lines():
            fh.write(line + "\n")
    with open(transfers_path, "w", encoding="utf-8", newline="\n") as fh:
        for rec in records:
            fh.write(rec.to_json() + "\n")
    return pools_path, transfers_path
