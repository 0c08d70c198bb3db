"""Tokenizer abstractions: partitions of the masked-view space.

A discrete tokenizer is modelled as an equivalence relation on masked
views, i.e. a set partition.  Three named partition families are supported
along with arbitrary explicit partitions, plus an exhaustive set-partition
enumerator based on restricted growth strings.
"""

from __future__ import annotations

from collections import Counter
from collections.abc import Iterable, Iterator, Sequence
from dataclasses import dataclass, field

from ..errors import ValidationError
from .space import PointSpace

MAE_LIKE = "mae_like"
CLASS_WISE = "class_wise"
CROSS_CLASS = "cross_class"
EXPLICIT = "explicit"

PARTITION_KINDS = (MAE_LIKE, CLASS_WISE, CROSS_CLASS, EXPLICIT)


@dataclass(frozen=True)
class TokenPartition:
    """Disjoint blocks of point ids covering the masked-view space.

    ``compositions`` holds, per block, a Counter from label-set to the number
    of block members carrying that label-set.
    """

    kind: str
    blocks: tuple[tuple[int, ...], ...]
    compositions: tuple[Counter, ...] = field(compare=False)

    @property
    def n_blocks(self) -> int:
        return len(self.blocks)

    def two_class_compositions(self) -> list[tuple[int, int, int]]:
        """Per-block (n_i1, n_i2, n_i3) counts for a two-class space."""
        out = []
        for comp in self.compositions:
            n1 = comp.get(frozenset((0,)), 0)
            n2 = comp.get(frozenset((1,)), 0)
            n3 = comp.get(frozenset((0, 1)), 0)
            out.append((n1, n2, n3))
        return out


def _compositions(space: PointSpace, blocks: Sequence[Sequence[int]]) -> tuple[Counter, ...]:
    return tuple(Counter(space.labels[i] for i in block) for block in blocks)


def _check_cover(space: PointSpace, blocks: Sequence[Sequence[int]]) -> None:
    seen: set[int] = set()
    for block in blocks:
        if not block:
            raise ValidationError("partition blocks must be non-empty")
        for i in block:
            if not 0 <= i < space.n_points:
                raise ValidationError(f"point id {i} out of range")
            if i in seen:
                raise ValidationError(f"point id {i} appears in more than one block")
            seen.add(i)
    if len(seen) != space.n_points:
        raise ValidationError(
            f"blocks cover {len(seen)} of {space.n_points} points"
        )


def make_partition(
    space: PointSpace,
    kind: str,
    cross_split: int = 2,
    blocks: Iterable[Iterable[int]] | None = None,
) -> TokenPartition:
    """Build a partition of the masked-view space.

    mae_like:    every point is its own block.
    class_wise:  one block per class; each overlap set is split evenly
                 between the two blocks of its classes (requires m even).
    cross_class: ``cross_split`` blocks, each taking an equal share of every
                 exclusive set and every overlap set (requires the share
                 sizes to be exact).
    explicit:    caller-provided ``blocks``.
    """
    s = space.spec.num_classes
    n = space.spec.points_per_class
    m = space.spec.pairwise_overlap

    if kind == MAE_LIKE:
        raw = [(i,) for i in range(space.n_points)]
    elif kind == CLASS_WISE:
        if m % 2 != 0:
            raise ValidationError(
                f"class_wise requires an even pairwise_overlap so each overlap "
                f"set splits in half; got m = {m}"
            )
        groups: list[list[int]] = [list(space.exclusive_ids(a)) for a in range(s)]
        for a in range(s):
            for b in range(a + 1, s):
                ids = space.overlap_ids(a, b)
                groups[a].extend(ids[: m // 2])
                groups[b].extend(ids[m // 2:])
        raw = [tuple(g) for g in groups]
    elif kind == CROSS_CLASS:
        l = cross_split
        if l < 1:
            raise ValidationError(f"cross_split must be >= 1, got {l}")
        exclusive = n - (s - 1) * m if s >= 2 else n
        if exclusive % l != 0 or m % l != 0:
            raise ValidationError(
                f"cross_class({l}) requires {l} to divide both the exclusive "
                f"class size {exclusive} and the overlap size {m}"
            )
        groups = [[] for _ in range(l)]
        for a in range(s):
            ids = space.exclusive_ids(a)
            share = len(ids) // l
            for i in range(l):
                groups[i].extend(ids[i * share:(i + 1) * share])
        for a in range(s):
            for b in range(a + 1, s):
                ids = space.overlap_ids(a, b)
                share = m // l
                for i in range(l):
                    groups[i].extend(ids[i * share:(i + 1) * share])
        raw = [tuple(g) for g in groups]
    elif kind == EXPLICIT:
        if blocks is None:
            raise ValidationError("explicit partition requires blocks")
        raw = [tuple(b) for b in blocks]
    else:
        raise ValidationError(
            f"unknown partition kind {kind!r}; expected one of {PARTITION_KINDS}"
        )

    _check_cover(space, raw)
    return TokenPartition(kind=kind, blocks=tuple(raw), compositions=_compositions(space, raw))


def label_partition(space: PointSpace) -> TokenPartition:
    """Partition grouping points by their class label.

    Only defined when every point has a single label (no overlaps).
    """
    if space.spec.pairwise_overlap != 0:
        raise ValidationError("label partition requires pairwise_overlap = 0")
    blocks = [tuple(space.exclusive_ids(a)) for a in range(space.spec.num_classes)]
    return TokenPartition(kind=EXPLICIT, blocks=tuple(blocks),
                          compositions=_compositions(space, blocks))


def bell_number(n: int) -> int:
    """Number of set partitions of an n-element set."""
    if n < 0:
        raise ValidationError("bell_number needs n >= 0")
    row = [1]
    for _ in range(n):
        nxt = [row[-1]]
        for v in row:
            nxt.append(nxt[-1] + v)
        row = nxt
    return row[0]


def restricted_growth_strings(n: int) -> Iterator[tuple[int, ...]]:
    """All restricted growth strings of length n, in lexicographic order.

    A restricted growth string a satisfies a[0] = 0 and
    a[i] <= max(a[:i]) + 1; each string encodes one set partition.
    """
    if n <= 0:
        return
    a = [0] * n
    b = [1] * n  # b[i] = 1 + max(a[:i]), the largest value allowed at i
    while True:
        yield tuple(a)
        i = n - 1
        while i > 0 and a[i] == b[i]:
            i -= 1
        if i == 0:
            return
        a[i] += 1
        bound = max(b[i], a[i] + 1)
        for j in range(i + 1, n):
            a[j] = 0
            b[j] = bound


def rgs_to_blocks(rgs: Sequence[int]) -> tuple[tuple[int, ...], ...]:
    """Blocks of the partition encoded by a restricted growth string."""
    n_blocks = max(rgs) + 1
    blocks: list[list[int]] = [[] for _ in range(n_blocks)]
    for i, v in enumerate(rgs):
        blocks[v].append(i)
    return tuple(tuple(b) for b in blocks)


def enumerate_partitions(space: PointSpace) -> Iterator[TokenPartition]:
    """Every set partition of the point space, RGS-lexicographic order."""
    for rgs in restricted_growth_strings(space.n_points):
        blocks = rgs_to_blocks(rgs)
        yield TokenPartition(kind=EXPLICIT, blocks=blocks,
                             compositions=_compositions(space, blocks))
