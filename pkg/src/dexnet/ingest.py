"""Loading pool registries and transfer records from line-delimited JSON.

Pool lines::

    {"pool": "0x..", "token0": "0x..", "token1": "0x..", "platform": "uniswap",
     "symbol0": "WETH", "symbol1": "USDC"}

Transfer lines::

    {"block": 10060851, "pool": "0x..", "platform": "uniswap"}

Parse errors are collected per line rather than raised; a stream aborts
with :class:`IngestError` only once the error count exceeds ``max_errors``.
"""

from __future__ import annotations

import gzip
import io
import json
import logging
from collections import Counter
from collections.abc import Iterable, Iterator
from dataclasses import dataclass, field
from pathlib import Path

from .core import BlockRange, Platform, TokenId, normalize_address
from .errors import IngestError

log = logging.getLogger(__name__)

DEFAULT_MAX_ERRORS = 1000


@dataclass(frozen=True, slots=True)
class Pool:
    address: str
    token0: TokenId
    token1: TokenId
    platform: Platform

    def __post_init__(self):
        object.__setattr__(self, "address", normalize_address(self.address))
        if self.token0 == self.token1:
            raise ValueError(f"pool {self.address} pairs {self.token0.address} with itself")

    @property
    def pair(self) -> tuple[TokenId, TokenId]:
        """Token pair in canonical (address-ascending) order."""
        a, b = self.token0, self.token1
        return (a, b) if a < b else (b, a)


@dataclass
class PoolRegistry:
    """Pool address -> :class:`Pool`."""

    pools: dict[str, Pool] = field(default_factory=dict)

    def add(self, pool: Pool) -> bool:
        """Insert or replace ``pool``; returns True when an entry was replaced."""
        replaced = pool.address in self.pools
        self.pools[pool.address] = pool
        return replaced

    def get(self, address: str) -> Pool | None:
        return self.pools.get(address.lower())

    def __contains__(self, address):
        return address.lower() in self.pools

    def __len__(self):
        return len(self.pools)

    def __iter__(self) -> Iterator[Pool]:
        return iter(self.pools.values())

    def counts(self) -> dict[Platform, int]:
        return dict(Counter(p.platform for p in self.pools.values()))

    def for_platform(self, platform) -> PoolRegistry:
        platform = Platform(platform)
        return PoolRegistry({a: p for a, p in self.pools.items() if p.platform == platform})

    def symbols(self) -> dict[TokenId, str]:
        out = {}
        for pool in self.pools.values():
            for tok in (pool.token0, pool.token1):
                if tok.symbol:
                    out[tok] = tok.symbol
        return out

    def to_lines(self) -> Iterator[str]:
        """Serialize back into the fixture line format, address-ordered."""
        for addr in sorted(self.pools):
            p = self.pools[addr]
            rec = {"pool": p.address, "token0": p.token0.address,
                   "token1": p.token1.address, "platform": str(p.platform)}
            if p.token0.symbol:
                rec["symbol0"] = p.token0.symbol
            if p.token1.symbol:
                rec["symbol1"] = p.token1.symbol
            yield json.dumps(rec, sort_keys=True)


@dataclass(frozen=True, slots=True)
class TransferRecord:
    block: int
    pool: str
    platform: Platform

    def to_json(self) -> str:
        return json.dumps({"block": self.block, "platform": str(self.platform),
                           "pool": self.pool}, sort_keys=True)


@dataclass(frozen=True, slots=True)
class EdgeEvent:
    """A transfer resolved to the unordered token pair of its pool (``a < b``)."""

    block: int
    a: TokenId
    b: TokenId
    platform: Platform

    def __post_init__(self):
        if self.a == self.b:
            raise ValueError("edge event endpoints must differ")
        if self.b < self.a:
            a, b = self.b, self.a
            object.__setattr__(self, "a", a)
            object.__setattr__(self, "b", b)

    @property
    def pair(self) -> tuple[TokenId, TokenId]:
        return self.a, self.b


@dataclass(frozen=True, slots=True)
class LineError:
    line: int
    message: str

    def __str__(self):
        return f"line {self.line}: {self.message}"


@dataclass
class ParseLog:
    """Diagnostics accumulated while parsing one stream."""

    errors: list[LineError] = field(default_factory=list)
    warnings: list[LineError] = field(default_factory=list)
    duplicates: int = 0
    rejected: int = 0
    dropped_out_of_range: int = 0
    max_errors: int = DEFAULT_MAX_ERRORS

    def error(self, line, message):
        self.errors.append(LineError(line, message))
        if len(self.errors) > self.max_errors:
            raise IngestError(
                f"aborting after {len(self.errors)} parse errors "
                f"(threshold {self.max_errors}); first: {self.errors[0]}"
            )

    def warn(self, line, message):
        self.warnings.append(LineError(line, message))

    @property
    def ok(self) -> bool:
        return not self.errors


def open_lines(path) -> Iterator[str]:
    """Yield text lines from ``path``; ``.gz`` files are decompressed."""
    path = Path(path)
    if path.suffix == ".gz":
        fh = io.TextIOWrapper(gzip.open(path, "rb"), encoding="utf-8")
    else:
        fh = open(path, encoding="utf-8")
    with fh:
        yield from fh


def _records(lines: Iterable[str], plog: ParseLog) -> Iterator[tuple[int, dict]]:
    for lineno, raw in enumerate(lines, start=1):
        text = raw.strip()
        if not text:
            continue
        try:
            obj = json.loads(text)
        except json.JSONDecodeError as exc:
            plog.error(lineno, f"invalid JSON: {exc.msg}")
            continue
        if not isinstance(obj, dict):
            plog.error(lineno, "expected a JSON object")
            continue
        yield lineno, obj


def parse_pool_registry(lines: Iterable[str], *, max_errors: int = DEFAULT_MAX_ERRORS
                        ) -> tuple[PoolRegistry, ParseLog]:
    plog = ParseLog(max_errors=max_errors)
    registry = PoolRegistry()
    for lineno, rec in _records(lines, plog):
        missing = [k for k in ("pool", "token0", "token1", "platform") if k not in rec]
        if missing:
            plog.error(lineno, f"missing field(s): {', '.join(missing)}")
            continue
        try:
            t0 = TokenId(rec["token0"], rec.get("symbol0"))
            t1 = TokenId(rec["token1"], rec.get("symbol1"))
            platform = Platform(rec["platform"])
            address = normalize_address(rec["pool"])
        except (ValueError, TypeError) as exc:
            plog.error(lineno, str(exc))
            continue
        if t0 == t1:
            plog.rejected += 1
            plog.warn(lineno, f"pool {address} pairs a token with itself; rejected")
            continue
        if registry.add(Pool(address, t0, t1, platform)):
            plog.duplicates += 1
            plog.warn(lineno, f"duplicate pool {address}; later record wins")
    if plog.warnings:
        log.warning("pool registry: %d warning(s)", len(plog.warnings))
    return registry, plog


def parse_transfers(lines: Iterable[str], block_range: BlockRange | None = None, *,
                    max_errors: int = DEFAULT_MAX_ERRORS
                    ) -> tuple[list[TransferRecord], ParseLog]:
    """Parse transfer lines, dropping blocks outside ``block_range``.

    Output is sorted by block (stable with respect to input order).
    """
    plog = ParseLog(max_errors=max_errors)
    out = []
    for lineno, rec in _records(lines, plog):
        missing = [k for k in ("block", "pool", "platform") if k not in rec]
        if missing:
            plog.error(lineno, f"missing field(s): {', '.join(missing)}")
            continue
        block = rec["block"]
        if isinstance(block, bool) or not isinstance(block, (int, str)):
            plog.error(lineno, f"non-numeric block {block!r}")
            continue
        try:
            block = int(block, 0) if isinstance(block, str) else block
        except ValueError:
            plog.error(lineno, f"non-numeric block {rec['block']!r}")
            continue
        if block < 0:
            plog.error(lineno, f"negative block {block}")
            continue
        try:
            pool = normalize_address(rec["pool"])
            platform = Platform(rec["platform"])
        except (ValueError, TypeError) as exc:
            plog.error(lineno, str(exc))
            continue
        if block_range is not None and block not in block_range:
            plog.dropped_out_of_range += 1
            continue
        out.append(TransferRecord(block, pool, platform))
    out.sort(key=lambda r: r.block)
    return out, plog


def resolve_edge_events(records: Iterable[TransferRecord], registry: PoolRegistry
                        ) -> tuple[list[EdgeEvent], int]:
    """Map each transfer to its pool's token pair.

    Returns the events and the number of records skipped because their pool
    is not in ``registry``.
    """
    events = []
    skipped = 0
    pools = registry.pools
    for rec in records:
        pool = pools.get(rec.pool)
        if pool is None:
            skipped += 1
            continue
        a, b = pool.pair
        events.append(EdgeEvent(rec.block, a, b, rec.platform))
    if skipped:
        log.info("skipped %d transfer(s) on unregistered pools", skipped)
    return events, skipped


def load_pool_registry(path, **kw) -> tuple[PoolRegistry, ParseLog]:
    return parse_pool_registry(open_lines(path), **kw)


def load_transfers(path, block_range=None, **kw) -> tuple[list[TransferRecord], ParseLog]:
    return parse_transfers(open_lines(path), block_range, **kw)
