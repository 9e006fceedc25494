"""Shared domain types and block-range segmentation."""

from __future__ import annotations

import bisect
import re
from dataclasses import dataclass, field

from .errors import InvalidSegmentationError, OutOfRangeError

__all__ = [
    "TokenId",
    "Platform",
    "BlockRange",
    "TimeSegmentation",
    "WHOLE_RANGE",
    "normalize_address",
    "segment_blocks",
    "slice_of_block",
]

# Slice index 0 denotes the whole block range; 1..n are the segments.
WHOLE_RANGE = 0

_HEX40 = re.compile(r"[0-9a-f]{40}")


def normalize_address(text: str) -> str:
    """Return the canonical ``0x``-prefixed lowercase form of a 20-byte address."""
    if not isinstance(text, str):
        raise ValueError(f"address must be text, got {type(text).__name__}")
    body = text.strip().lower()
    if body.startswith("0x"):
        body = body[2:]
    if not _HEX40.fullmatch(body):
        raise ValueError(f"not a 20-byte hex address: {text!r}")
    return "0x" + body


@dataclass(frozen=True, order=True, slots=True)
class TokenId:
    """A token identified by its contract address.

    Equality, hashing and ordering use the lowercased address only; the
    symbol is display metadata (symbols collide on-chain).
    """

    address: str
    symbol: str | None = field(default=None, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "address", normalize_address(self.address))

    @property
    def label(self) -> str:
        return self.symbol or self.address

    def __str__(self):
        return self.label


class Platform(str):
    """Exchange platform tag. Any non-empty lowercase name is accepted."""

    UNISWAP: Platform
    SUSHISWAP: Platform

    def __new__(cls, name):
        name = str(name).strip().lower()
        if not name or not re.fullmatch(r"[a-z0-9_\-]+", name):
            raise ValueError(f"invalid platform name: {name!r}")
        return super().__new__(cls, name)

    def __repr__(self):
        return f"Platform({str(self)!r})"


Platform.UNISWAP = Platform("uniswap")
Platform.SUSHISWAP = Platform("sushiswap")


@dataclass(frozen=True, slots=True)
class BlockRange:
    start: int
    end: int

    def __post_init__(self):
        if self.start < 0 or self.end < self.start:
            raise ValueError(f"invalid block range [{self.start}, {self.end}]")

    def __contains__(self, block):
        return self.start <= block <= self.end

    def __len__(self):
        return self.end - self.start + 1

    @classmethod
    def parse(cls, text: str) -> BlockRange:
        """Parse ``"start:end"`` (both inclusive)."""
        try:
            lo, hi = text.split(":")
            return cls(int(lo), int(hi))
        except ValueError as exc:
            raise ValueError(f"expected START:END block range, got {text!r}") from exc


@dataclass(frozen=True, slots=True)
class TimeSegmentation:
    """Partition of a block range into ``n_segments`` half-open slices.

    Slice ``i`` (1-based) covers ``[boundaries[i-1], boundaries[i])``; slice 0
    is the whole range.
    """

    range: BlockRange
    n_segments: int
    boundaries: tuple[int, ...]

    def __post_init__(self):
        b = self.boundaries
        if len(b) != self.n_segments + 1:
            raise InvalidSegmentationError("need n_segments + 1 boundaries")
        if b[0] != self.range.start or b[-1] != self.range.end + 1:
            raise InvalidSegmentationError("boundaries must span the range exactly")
        if any(x >= y for x, y in zip(b, b[1:])):
            raise InvalidSegmentationError("boundaries must be strictly increasing")

    def bounds(self, index: int) -> tuple[int, int]:
        """Half-open block interval of slice ``index`` (0 = whole range)."""
        if index == WHOLE_RANGE:
            return self.range.start, self.range.end + 1
        if not 1 <= index <= self.n_segments:
            raise OutOfRangeError(f"slice t_{index} outside 0..{self.n_segments}")
        return self.boundaries[index - 1], self.boundaries[index]

    def widths(self) -> list[int]:
        return [hi - lo for lo, hi in zip(self.boundaries, self.boundaries[1:])]

    def slice_of(self, block: int) -> int:
        return slice_of_block(self, block)

    @property
    def indices(self) -> range:
        return range(1, self.n_segments + 1)


def segment_blocks(block_range: BlockRange, n: int = 100) -> TimeSegmentation:
    """Split ``block_range`` into ``n`` equal-width slices.

    Widths come from integer division; the final slice absorbs the
    remainder.
    """
    n_blocks = len(block_range)
    if n < 1 or n > n_blocks:
        raise InvalidSegmentationError(
            f"cannot split {n_blocks} block(s) into {n} segment(s)"
        )
    width = n_blocks // n
    bounds = [block_range.start + i * width for i in range(n)]
    bounds.append(block_range.end + 1)
    return TimeSegmentation(block_range, n, tuple(bounds))


def slice_of_block(seg: TimeSegmentation, block: int) -> int:
    if block not in seg.range:
        raise OutOfRangeError(
            f"block {block} outside [{seg.range.start}, {seg.range.end}]"
        )
    return bisect.bisect_right(seg.boundaries, block)
