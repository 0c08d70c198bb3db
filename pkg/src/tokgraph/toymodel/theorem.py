"""Exhaustive search for the partition minimizing the bound objective.

Enumerates every set partition of a small masked-view space, scores each
with c1 * (sum of squared eigenvalues) + c2 * (labeling error), and checks
whether grouping views by their class label attains the minimum.
"""

from __future__ import annotations

from dataclasses import dataclass

from ..errors import ValidationError
from .graph import build_augmentation_matrix, labeling_error, spectrum_sum_squares
from .partition import (
    TokenPartition,
    bell_number,
    enumerate_partitions,
    label_partition,
)
from .space import MaskJoint, PointSpace

MAX_ENUMERABLE_VIEWS = 10
_TIE_TOL = 1e-12


@dataclass
class TheoremSearchResult:
    """Outcome of the exhaustive partition search."""

    n_partitions: int
    c1: float
    c2: float
    min_objective: float
    minimizers: list[tuple[tuple[int, ...], ...]]
    first_minimizer: tuple[tuple[int, ...], ...]
    label_blocks: tuple[tuple[int, ...], ...]
    label_objective: float
    label_attains_minimum: bool

    def to_dict(self) -> dict:
        return {
            "n_partitions": self.n_partitions,
            "constants": {"c1": self.c1, "c2": self.c2},
            "min_objective": self.min_objective,
            "n_minimizers": len(self.minimizers),
            "first_minimizer": [list(b) for b in self.first_minimizer],
            "minimizers": [[list(b) for b in p] for p in self.minimizers],
            "label_partition": [list(b) for b in self.label_blocks],
            "label_objective": self.label_objective,
            "label_attains_minimum": self.label_attains_minimum,
        }


def partition_objective(
    joint: MaskJoint, space: PointSpace, partition: TokenPartition,
    c1: float, c2: float,
) -> float:
    """Bound objective of one partition."""
    aug = build_augmentation_matrix(joint, partition)
    return c1 * spectrum_sum_squares(aug) + c2 * labeling_error(space, aug)


def verify_theorem1(
    space: PointSpace,
    joint: MaskJoint,
    c1: float,
    c2: float,
    max_views: int = MAX_ENUMERABLE_VIEWS,
) -> TheoremSearchResult:
    """Search all partitions of the masked-view space for the minimum.

    Requires an overlap-free space, so that masking never links views of
    different classes, and a view count small enough for Bell-number
    enumeration.  Ties within 1e-12 of the minimum are all reported;
    enumeration order (restricted growth strings, lexicographic) breaks
    the tie for ``first_minimizer``.
    """
    if space.spec.pairwise_overlap != 0:
        raise ValidationError(
            "the search requires pairwise_overlap = 0 so that complementary "
            "views always share a class"
        )
    if space.n_points > max_views:
        raise ValidationError(
            f"{space.n_points} masked views exceed the enumeration cap "
            f"of {max_views} (Bell numbers grow too fast)"
        )
    if c1 <= 0 or c2 <= 0:
        raise ValidationError(f"constants must be positive, got c1={c1}, c2={c2}")

    label_part = label_partition(space)
    label_key = _canonical(label_part.blocks)

    n_partitions = 0
    min_objective = None
    minimizers: list[tuple[tuple[int, ...], ...]] = []
    label_objective = None

    for partition in enumerate_partitions(space):
        n_partitions += 1
        objective = partition_objective(joint, space, partition, c1, c2)
        key = _canonical(partition.blocks)
        if key == label_key:
            label_objective = objective
        if min_objective is None or objective < min_objective - _TIE_TOL:
            min_objective = objective
            minimizers = [partition.blocks]
        elif abs(objective - min_objective) <= _TIE_TOL:
            minimizers.append(partition.blocks)

    assert min_objective is not None and label_objective is not None
    assert n_partitions == bell_number(space.n_points)

    return TheoremSearchResult(
        n_partitions=n_partitions,
        c1=c1,
        c2=c2,
        min_objective=min_objective,
        minimizers=minimizers,
        first_minimizer=minimizers[0],
        label_blocks=label_part.blocks,
        label_objective=label_objective,
        label_attains_minimum=label_objective <= min_objective + _TIE_TOL,
    )


def _canonical(blocks: tuple[tuple[int, ...], ...]) -> tuple[tuple[int, ...], ...]:
    return tuple(sorted(tuple(sorted(b)) for b in blocks))
