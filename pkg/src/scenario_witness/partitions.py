"""Partition structures describing which product states a witness must respect.

A :class:`Partition` splits the parties ``1..n`` into disjoint blocks and
marks one block as *free*: constraints contract every other block with a
sampled unit vector and require the remaining operator on the free block
to be positive semidefinite.  A :class:`PartitionStructure` is a list of
partitions; a witness must satisfy the constraints of all of them.

Text grammar (used by the CLI)::

    full             full separability, free block = largest party (last on ties)
    m-sep:2          every partition into blocks of at most 2 parties
    1|2,3            explicit partition, blocks separated by "|"
    1|2,3!1          same, first block marked free
    1|2,3;2|1,3      several explicit partitions
"""

from __future__ import annotations

from collections.abc import Iterator, Sequence
from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class Partition:
    blocks: tuple[tuple[int, ...], ...]
    free: int

    def __post_init__(self):
        if not 0 <= self.free < len(self.blocks):
            raise ValueError(f"free block index {self.free} out of range")

    @property
    def free_block(self) -> tuple[int, ...]:
        return self.blocks[self.free]

    @property
    def contracted(self) -> list[int]:
        return [i for i in range(len(self.blocks)) if i != self.free]

    def block_dim(self, dims: Sequence[int], i: int) -> int:
        return int(np.prod([dims[p - 1] for p in self.blocks[i]]))

    def free_dim(self, dims: Sequence[int]) -> int:
        return self.block_dim(dims, self.free)

    def label(self) -> str:
        text = "|".join(",".join(map(str, b)) for b in self.blocks)
        return f"{text}!{self.free + 1}"

    def letters(self) -> str:
        """Party letters, e.g. ``A-BC`` for ``1|2,3``."""
        return "-".join("".join(chr(ord("A") + p - 1) for p in b) for b in self.blocks)

    def as_sets(self) -> frozenset[frozenset[int]]:
        return frozenset(frozenset(b) for b in self.blocks)


@dataclass(frozen=True)
class PartitionStructure:
    dims: tuple[int, ...]
    partitions: tuple[Partition, ...]
    m: int | None = None

    def __post_init__(self):
        n = len(self.dims)
        if n < 1 or any(d < 1 for d in self.dims):
            raise ValueError(f"bad dims {self.dims}")
        for part in self.partitions:
            parties = sorted(p for b in part.blocks for p in b)
            if parties != list(range(1, n + 1)):
                raise ValueError(f"{part.label()} is not a partition of parties 1..{n}")
            if any(len(b) == 0 for b in part.blocks):
                raise ValueError("empty block")
            if self.m is not None and any(len(b) > self.m for b in part.blocks):
                raise ValueError(f"{part.label()} has a block larger than m={self.m}")

    @property
    def n(self) -> int:
        return len(self.dims)

    @property
    def total_dim(self) -> int:
        return int(np.prod(self.dims))

    def label(self) -> str:
        return ";".join(p.label() for p in self.partitions)


def default_free(dims: Sequence[int], blocks: Sequence[Sequence[int]]) -> int:
    """Largest-dimension block, ties broken toward the highest party index."""
    def key(i):
        b = blocks[i]
        return (-int(np.prod([dims[p - 1] for p in b])), -max(b))

    return min(range(len(blocks)), key=key)


def make_partition(dims: Sequence[int], blocks: Sequence[Sequence[int]], free: int | None = None) -> Partition:
    blocks = tuple(tuple(sorted(b)) for b in blocks)
    parties = sorted(p for b in blocks for p in b)
    if parties != list(range(1, len(dims) + 1)):
        raise ValueError(f"blocks {blocks} do not partition parties 1..{len(dims)}")
    if free is None:
        free = default_free(dims, blocks)
    return Partition(blocks, free)


def full_separability_structure(dims: Sequence[int]) -> PartitionStructure:
    """Singleton blocks; the largest party is left free (the last one on ties)."""
    dims = tuple(int(d) for d in dims)
    n = len(dims)
    if n < 2:
        raise ValueError("full separability needs at least two parties")
    return PartitionStructure(dims, (make_partition(dims, [(p,) for p in range(1, n + 1)]),), m=1)


def set_partitions(items: Sequence[int]) -> Iterator[list[list[int]]]:
    items = list(items)
    if not items:
        yield []
        return
    first, rest = items[0], items[1:]
    for part in set_partitions(rest):
        yield [[first]] + part
        for i in range(len(part)):
            yield part[:i] + [[first] + part[i]] + part[i + 1 :]


def _refines(fine: frozenset, coarse: frozenset) -> bool:
    return fine != coarse and all(any(b <= c for c in coarse) for b in fine)


def m_separability_structure(dims: Sequence[int], m: int) -> PartitionStructure:
    """All partitions into blocks of at most ``m`` parties, refinements pruned.

    A refinement's product states are contained in those of any coarser
    partition, so its constraints are redundant.
    """
    dims = tuple(int(d) for d in dims)
    n = len(dims)
    if not 1 <= m < n:
        raise ValueError(f"need 1 <= m < n, got m={m}, n={n}")
    cands = [
        [sorted(b) for b in part]
        for part in set_partitions(range(1, n + 1))
        if all(len(b) <= m for b in part)
    ]
    sets = [frozenset(frozenset(b) for b in c) for c in cands]
    kept = [c for c, s in zip(cands, sets) if not any(_refines(s, o) for o in sets)]
    parts = []
    for c in kept:
        c.sort(key=min)
        parts.append(make_partition(dims, c))
    parts.sort(key=lambda p: [sorted(b) for b in sorted(p.blocks, key=len)])
    return PartitionStructure(dims, tuple(parts), m=m)


def _parse_partition(text: str, dims: Sequence[int]) -> Partition:
    free = None
    if "!" in text:
        text, _, k = text.partition("!")
        free = int(k) - 1
    blocks = []
    for chunk in text.split("|"):
        chunk = chunk.strip()
        if not chunk:
            raise ValueError("empty block in partition")
        blocks.append(tuple(int(tok) for tok in chunk.split(",")))
    if free is not None and not 0 <= free < len(blocks):
        raise ValueError(f"free block !{free + 1} out of range")
    return make_partition(dims, blocks, free)


def parse_structure(text: str, dims: Sequence[int]) -> PartitionStructure:
    """Parse the structure grammar described in the module docstring."""
    dims = tuple(int(d) for d in dims)
    text = text.strip()
    try:
        if text == "full":
            return full_separability_structure(dims)
        if text.startswith("m-sep:"):
            return m_separability_structure(dims, int(text.split(":", 1)[1]))
        parts = tuple(_parse_partition(t, dims) for t in text.split(";") if t.strip())
        if not parts:
            raise ValueError("no partition given")
        return PartitionStructure(dims, parts)
    except ValueError as exc:
        raise ValueError(f"cannot parse structure {text!r}: {exc}") from None
