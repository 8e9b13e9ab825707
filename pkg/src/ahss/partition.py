"""Contiguous block partitions of the unknown index range."""

from __future__ import annotations

from dataclasses import dataclass

__all__ = ["BlockPartition", "partition_uniform"]


@dataclass(frozen=True)
class BlockPartition:
    """Ordered, disjoint, contiguous intervals covering [0, n)."""

    n: int
    ranges: tuple

    def __post_init__(self):
        if not self.ranges:
            raise ValueError("partition needs at least one block")
        pos = 0
        for start, stop in self.ranges:
            if start != pos or stop <= start:
                raise ValueError("blocks must be nonempty, ordered and contiguous")
            pos = stop
        if pos != self.n:
            raise ValueError(f"blocks cover [0, {pos}) but n = {self.n}")

    @property
    def m(self):
        return len(self.ranges)

    def slices(self):
        return [slice(start, stop) for start, stop in self.ranges]

    def block_of(self, i):
        """Index of the block owning unknown ``i``."""
        for q, (start, stop) in enumerate(self.ranges):
            if start <= i < stop:
                return q
        raise IndexError(i)


def partition_uniform(n, m):
    """Split [0, n) into m contiguous blocks, larger blocks first.

    Blocks have size ``ceil(n/m)`` or ``floor(n/m)``.
    """
    if m < 1:
        raise ValueError("too_many_blocks: m must be >= 1")
    if m > n:
        raise ValueError(f"too_many_blocks: m = {m} exceeds n = {n}")
    size, rem = divmod(n, m)
    ranges = []
    pos = 0
    for q in range(m):
        width = size + (1 if q < rem else 0)
        ranges.append((pos, pos + width))
        pos += width
    return BlockPartition(n, tuple(ranges))
